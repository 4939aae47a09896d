"""
Tipos de dominio del modelo SPVAR(∞).

Los valores son inmutables: los arreglos numpy se copian al construir y se
marcan como de solo lectura, de modo que pueden compartirse entre hilos y
procesos sin copias defensivas.
"""

import math
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator


class Estimator(str, Enum):
    """Estimadores disponibles."""
    JE = "je"
    RE = "re"


class EdgeKind(str, Enum):
    """Clasificación temporal de una arista de Granger."""
    SHORT_ONLY = "short"
    LONG_ONLY = "long"
    BOTH = "both"


class RefitSchedule(str, Enum):
    """Calendario de reajuste en la evaluación rodante."""
    EVERY_STEP = "every"
    ONCE = "once"


class GInit(str, Enum):
    """Inicialización de g."""
    ZERO = "zero"
    VAR_LASSO = "var-lasso"


class OmegaUpdate(str, Enum):
    """Granularidad de la actualización de ω dentro de una iteración."""
    JACOBI = "jacobi"
    GAUSS_SEIDEL = "gauss-seidel"


class SparsityMode(str, Enum):
    """Patrón de dispersión de las matrices G_k simuladas."""
    ROW = "row"
    TOTAL = "total"


class ForecastEstimator(str, Enum):
    """Estimadores comparados en el pronóstico rodante."""
    SPVAR_JE = "spvar-je"
    SPVAR_RE = "spvar-re"
    VAR_LASSO = "var-lasso"
    VAR_OLS = "var-ols"


class ExperimentName(str, Enum):
    """Réplicas Monte Carlo disponibles en la CLI."""
    ERROR_SCALING = "error-scaling"
    BIC_CONSISTENCY = "bic-consistency"
    VARMA_FORECAST = "varma-forecast"
    JE_RE_COMPARISON = "je-re-comparison"
    INIT_SENSITIVITY = "init-sensitivity"


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


class ModelOrders(BaseModel):
    """Órdenes (p, r, s) con d = p + r + 2s."""

    model_config = ConfigDict(frozen=True)

    p: int = Field(default=0, ge=0)
    r: int = Field(default=0, ge=0)
    s: int = Field(default=0, ge=0)

    @computed_field
    @property
    def d(self) -> int:
        return self.p + self.r + 2 * self.s

    def within(self, max_p: int, max_r: int, max_s: int) -> bool:
        return self.p <= max_p and self.r <= max_r and self.s <= max_s

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.p, self.r, self.s)

    def __str__(self) -> str:
        return f"({self.p},{self.r},{self.s})"


class Omega(BaseModel):
    """
    Vector de decaimientos ω: r tasas reales λ_j y s pares η_m = (γ_m, θ_m).

    El tipo solo exige valores finitos; la pertenencia a la caja
    C_λ × C_η se comprueba con ``in_box`` y se impone con la proyección del
    solver.
    """

    model_config = ConfigDict(frozen=True)

    lambdas: Tuple[float, ...] = ()
    etas: Tuple[Tuple[float, float], ...] = ()

    @field_validator("lambdas", "etas")
    @classmethod
    def valores_finitos(cls, v):
        flat = np.asarray(v, dtype=float).ravel()
        if not np.all(np.isfinite(flat)):
            raise ValueError("ω contiene valores no finitos")
        return v

    @property
    def r(self) -> int:
        return len(self.lambdas)

    @property
    def s(self) -> int:
        return len(self.etas)

    @property
    def rho_bar(self) -> float:
        """max{|λ_j|, γ_m}; 0 cuando r = s = 0."""
        decays = [abs(lam) for lam in self.lambdas] + [gamma for gamma, _ in self.etas]
        return max(decays) if decays else 0.0

    def as_vector(self) -> np.ndarray:
        """Orden (λ_1..λ_r, γ_1, θ_1, ..., γ_s, θ_s)."""
        values: List[float] = list(self.lambdas)
        for gamma, theta in self.etas:
            values.extend([gamma, theta])
        return np.asarray(values, dtype=float)

    @classmethod
    def from_vector(cls, vector: Sequence[float], r: int, s: int) -> "Omega":
        vector = np.asarray(vector, dtype=float)
        if vector.shape != (r + 2 * s,):
            raise ValueError(f"se esperaban {r + 2 * s} parámetros, se recibieron {vector.shape}")
        lambdas = tuple(float(x) for x in vector[:r])
        etas = tuple((float(vector[r + 2 * m]), float(vector[r + 2 * m + 1])) for m in range(s))
        return cls(lambdas=lambdas, etas=etas)

    def in_box(self, epsilon: float) -> bool:
        """Pertenencia a C_λ = [−1+ε, 1−ε] y C_η = [0, 1−ε] × [ε, π−ε]."""
        ok = all(-1 + epsilon <= lam <= 1 - epsilon for lam in self.lambdas)
        return ok and all(
            0.0 <= gamma <= 1 - epsilon and epsilon <= theta <= math.pi - epsilon
            for gamma, theta in self.etas
        )


class CoefSet(BaseModel):
    """Matrices G_1..G_d (N×N), almacenadas como arreglo d×N×N."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    N: int = Field(..., gt=0)
    mats: np.ndarray

    @field_validator("mats", mode="before")
    @classmethod
    def convertir(cls, v):
        return np.array(v, dtype=float)

    @model_validator(mode="after")
    def forma_valida(self) -> "CoefSet":
        mats = self.mats
        if mats.size == 0:
            mats = mats.reshape(0, self.N, self.N)
            object.__setattr__(self, "mats", mats)
        if mats.ndim != 3 or mats.shape[1:] != (self.N, self.N):
            raise ValueError(f"las matrices G deben ser d×{self.N}×{self.N}, se recibió {mats.shape}")
        if not np.all(np.isfinite(mats)):
            raise ValueError("las matrices G contienen valores no finitos")
        _frozen(mats)
        return self

    @property
    def d(self) -> int:
        return self.mats.shape[0]

    @classmethod
    def zeros(cls, N: int, d: int) -> "CoefSet":
        return cls(N=N, mats=np.zeros((d, N, N)))

    def concat(self) -> np.ndarray:
        """Concatenación horizontal N×(N·d) = (G_1, ..., G_d)."""
        return np.concatenate(list(self.mats), axis=1) if self.d else np.zeros((self.N, 0))

    @classmethod
    def from_concat(cls, G: np.ndarray, d: int) -> "CoefSet":
        N = G.shape[0]
        mats = np.stack([G[:, k * N:(k + 1) * N] for k in range(d)]) if d else np.zeros((0, N, N))
        return cls(N=N, mats=mats)

    def vector(self) -> np.ndarray:
        """g = vec(G_1, ..., G_d)."""
        return self.mats.ravel().copy()

    def nnz(self, zero_tol: float = 0.0) -> int:
        return int(np.count_nonzero(np.abs(self.mats) > zero_tol))

    def scaled(self, factor: float) -> "CoefSet":
        return CoefSet(N=self.N, mats=self.mats * factor)


class SpvarModel(BaseModel):
    """Modelo completo: órdenes, ω y matrices G."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    orders: ModelOrders
    omega: Omega
    coefs: CoefSet
    names: Optional[Tuple[str, ...]] = None

    @model_validator(mode="after")
    def dimensiones_consistentes(self) -> "SpvarModel":
        if (self.omega.r, self.omega.s) != (self.orders.r, self.orders.s):
            raise ValueError(
                f"ω tiene (r,s)=({self.omega.r},{self.omega.s}) pero los órdenes son {self.orders}"
            )
        if self.coefs.d != self.orders.d:
            raise ValueError(f"se esperaban {self.orders.d} matrices G, hay {self.coefs.d}")
        if self.names is not None and len(self.names) != self.coefs.N:
            raise ValueError("la cantidad de nombres no coincide con N")
        return self

    @property
    def N(self) -> int:
        return self.coefs.N

    @classmethod
    def zero(cls, N: int, orders: ModelOrders, omega: Optional[Omega] = None) -> "SpvarModel":
        if omega is None:
            omega = Omega(lambdas=(0.5,) * orders.r, etas=((0.5, math.pi / 2),) * orders.s)
        return cls(orders=orders, omega=omega, coefs=CoefSet.zeros(N, orders.d))


class SeriesPanel(BaseModel):
    """Panel T×N (fila t = y_t) con nombres y metadatos de estandarización."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    data: np.ndarray
    names: Tuple[str, ...]
    standardized: bool = False
    means: Optional[np.ndarray] = None
    sds: Optional[np.ndarray] = None

    @field_validator("data", mode="before")
    @classmethod
    def convertir(cls, v):
        array = np.array(v, dtype=float)
        if array.ndim == 1:
            array = array.reshape(-1, 1)
        return array

    @model_validator(mode="after")
    def panel_valido(self) -> "SeriesPanel":
        if self.data.ndim != 2 or self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise ValueError(f"el panel debe ser T×N con T, N ≥ 1, se recibió {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("el panel contiene valores no finitos")
        if len(self.names) != self.data.shape[1]:
            raise ValueError("la cantidad de nombres no coincide con N")
        _frozen(self.data)
        return self

    @property
    def T(self) -> int:
        return self.data.shape[0]

    @property
    def N(self) -> int:
        return self.data.shape[1]

    @classmethod
    def from_array(cls, data: np.ndarray, names: Optional[Sequence[str]] = None) -> "SeriesPanel":
        data = np.array(data, dtype=float)
        if data.ndim == 1:
            data = data.reshape(-1, 1)
        if names is None:
            names = [f"y{i + 1}" for i in range(data.shape[1])]
        return cls(data=data, names=tuple(names))
