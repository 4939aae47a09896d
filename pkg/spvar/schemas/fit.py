import numpy as np
from pydantic import Field, field_validator
from typing import List, Optional

from spvar.config import settings
from spvar.models import Estimator, GInit, Omega, OmegaUpdate, SpvarModel
from spvar.schemas.common import ArrayModel


class FitConfig(ArrayModel):
    """
    Parámetros del descenso por bloques de coordenadas.

    ``presample`` filas iniciales del panel solo alimentan los predictores;
    la pérdida se evalúa en las filas restantes.
    """
    lambda_g: float = Field(default=0.0, ge=0)
    step: Optional[float] = Field(default=None, gt=0)
    backtracking: bool = True
    epsilon_box: float = Field(default_factory=lambda: settings.EPSILON_BOX, gt=0, lt=0.5)
    max_iter: int = Field(default_factory=lambda: settings.MAX_ITER, ge=1)
    tol: float = Field(default_factory=lambda: settings.TOL, gt=0)
    omega_inits: Optional[List[Omega]] = None
    max_starts: Optional[int] = Field(default=None, ge=1)
    g_init: GInit = GInit.VAR_LASSO
    g_explicit: Optional[np.ndarray] = None
    init_lambda_g: Optional[float] = Field(default=None, ge=0)
    omega_update: OmegaUpdate = OmegaUpdate.JACOBI
    row_lambdas: Optional[List[float]] = None
    max_order: int = Field(default_factory=lambda: settings.MAX_ORDER, ge=0)
    presample: int = Field(default=0, ge=0)
    threads: int = Field(default_factory=lambda: settings.THREADS, ge=1)
    seed: int = Field(default_factory=lambda: settings.SEED)

    @field_validator("g_explicit", mode="before")
    @classmethod
    def convertir_g(cls, v):
        return None if v is None else np.array(v, dtype=float)

    @field_validator("row_lambdas")
    @classmethod
    def penalizaciones_no_negativas(cls, v):
        if v is not None and any(x < 0 for x in v):
            raise ValueError("row_lambdas debe ser no negativo")
        return v


class FitResult(ArrayModel):
    """Resultado de un ajuste JE o RE."""
    model: SpvarModel
    estimator: Estimator = Estimator.JE
    objective_trace: List[float] = []
    converged: bool = False
    iterations: int = 0
    in_sample_loss: float
    nnz: int
    prox_residual: float = 0.0
    config_used: FitConfig
    start_index: Optional[int] = None
    failed_starts: List[str] = []
    per_row_omega: Optional[List[Omega]] = None
    per_row_loss: Optional[List[float]] = None
    failed_rows: List[int] = []

    @property
    def objective(self) -> float:
        return self.objective_trace[-1] if self.objective_trace else float("nan")


class DescentRun(ArrayModel):
    """Trayectoria de un arranque del descenso por bloques."""
    omega: Omega
    G: np.ndarray
    trace: List[float]
    converged: bool
    iterations: int
    loss: float
    prox_residual: float

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.G))
