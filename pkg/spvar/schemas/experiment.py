from pydantic import BaseModel, Field, field_validator
from typing import List, Optional, Tuple

from spvar.config import settings
from spvar.models import Estimator, ExperimentName, ModelOrders
from spvar.schemas.fit import FitConfig

ESTIMATION_COLUMNS = [
    "dgp", "N", "T", "replicate", "estimator", "lambda_g", "err_a", "err_g", "err_omega", "converged",
]

# Tamaños, dimensión y columnas por defecto de cada réplica
DEFAULT_SIZES = {
    ExperimentName.ERROR_SCALING: [60, 120, 240],
    ExperimentName.BIC_CONSISTENCY: [1000],
    ExperimentName.VARMA_FORECAST: [125],
    ExperimentName.JE_RE_COMPARISON: [50, 100, 150, 300, 500],
    ExperimentName.INIT_SENSITIVITY: [60, 120, 240],
}

DEFAULT_N = {
    ExperimentName.ERROR_SCALING: 10,
    ExperimentName.BIC_CONSISTENCY: 20,
    ExperimentName.VARMA_FORECAST: 10,
    ExperimentName.JE_RE_COMPARISON: 20,
    ExperimentName.INIT_SENSITIVITY: 10,
}

COLUMNS = {
    ExperimentName.ERROR_SCALING: ESTIMATION_COLUMNS,
    ExperimentName.BIC_CONSISTENCY: [
        "dgp", "rho_bar", "T", "replicate", "selected_p", "selected_r", "selected_s", "correct",
    ],
    ExperimentName.VARMA_FORECAST: ["N", "T", "replicate", "estimator", "l2_error"],
    ExperimentName.JE_RE_COMPARISON: ESTIMATION_COLUMNS,
    ExperimentName.INIT_SENSITIVITY: ESTIMATION_COLUMNS[:5] + ["init"] + ESTIMATION_COLUMNS[5:],
}


class ExperimentConfig(BaseModel):
    """
    Parámetros de una réplica Monte Carlo reducida.

    ``estimator`` solo afecta a error-scaling; je-re-comparison e
    init-sensitivity ajustan siempre ambos estimadores.
    """
    name: ExperimentName
    replicates: int = Field(default=20, ge=1)
    sizes: Optional[List[int]] = None
    N: Optional[int] = Field(default=None, ge=1)
    dgp: str = "dgp1"
    estimator: Estimator = Estimator.JE
    true_orders: ModelOrders = ModelOrders(p=1, r=1, s=0)
    rho_bar: float = Field(default=0.55, gt=0, lt=1)
    max_orders: Tuple[int, int, int] = (3, 3, 3)
    tau: float = Field(default_factory=lambda: settings.TAU, ge=0)
    q: float = Field(default_factory=lambda: settings.BIC_Q, ge=0, le=1)
    lambda_g: Optional[float] = Field(default=None, ge=0)
    phi_scale: float = Field(default=0.5, gt=-1, lt=1)
    varma_lambda: float = Field(default=-0.7, gt=-1, lt=1)
    ols_lag: int = Field(default=2, ge=1)
    comparison_lambda: float = Field(default=0.6, gt=-1, lt=1)
    nonzeros_per_row: int = Field(default=2, ge=0)
    presample: int = Field(default=200, ge=1)
    fit: FitConfig = Field(default_factory=FitConfig)
    seed: int = Field(default_factory=lambda: settings.SEED)
    threads: int = Field(default_factory=lambda: settings.THREADS, ge=1)

    @field_validator("sizes")
    @classmethod
    def tamanos_validos(cls, v):
        if v is not None and (not v or any(T < 2 for T in v)):
            raise ValueError("sizes debe contener valores de T ≥ 2")
        return v

    @field_validator("dgp")
    @classmethod
    def dgp_conocido(cls, v):
        if v not in ("dgp1", "dgp2"):
            raise ValueError(f"dgp desconocido '{v}' (dgp1 | dgp2)")
        return v

    @property
    def resolved_sizes(self) -> List[int]:
        return list(self.sizes) if self.sizes is not None else list(DEFAULT_SIZES[self.name])

    @property
    def resolved_N(self) -> int:
        return self.N if self.N is not None else DEFAULT_N[self.name]

    @property
    def columns(self) -> List[str]:
        return COLUMNS[self.name]
