from pydantic import BaseModel, Field, model_validator
from typing import Optional, Tuple

from spvar.config import settings
from spvar.models import CoefSet, ModelOrders, Omega, SparsityMode
from spvar.schemas.common import ArrayModel


class DgpSpec(BaseModel):
    """Especificación de un proceso generador de datos SPVAR(∞)."""
    name: str = "custom"
    N: int = Field(..., gt=0)
    orders: ModelOrders
    omega: Omega
    sparsity_mode: SparsityMode = SparsityMode.ROW
    nonzeros_per_row: int = Field(default=3, ge=0)
    total_nonzeros: Optional[int] = Field(default=None, ge=0)
    coef_range: Tuple[float, float] = (-0.5, 0.5)
    stationarity_target: float = Field(default_factory=lambda: settings.STATIONARITY_TARGET)
    noise_sd: float = Field(default_factory=lambda: settings.NOISE_SD)
    burn_in: int = Field(default_factory=lambda: settings.BURN_IN, ge=0)
    seed: int = 0

    @model_validator(mode="after")
    def especificacion_valida(self) -> "DgpSpec":
        if not 0 < self.stationarity_target < 1:
            raise ValueError("stationarity_target debe estar en (0, 1)")
        if self.noise_sd <= 0:
            raise ValueError("noise_sd debe ser positivo")
        if self.coef_range[0] > self.coef_range[1]:
            raise ValueError("coef_range invertido")
        if (self.omega.r, self.omega.s) != (self.orders.r, self.orders.s):
            raise ValueError("ω no coincide con los órdenes")
        return self

    @property
    def nonzeros_per_matrix(self) -> int:
        """Entradas no nulas por G_k (3N por defecto en el modo total)."""
        if self.sparsity_mode == SparsityMode.ROW:
            return self.nonzeros_per_row * self.N
        return self.total_nonzeros if self.total_nonzeros is not None else 3 * self.N


class RescaleOutcome(ArrayModel):
    """Resultado del reescalado común de las matrices G."""
    coefs: CoefSet
    factor: float
    criterion: float
    degenerate: bool = False
