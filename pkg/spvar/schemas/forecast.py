from pydantic import BaseModel, Field
from typing import List, Optional

from spvar.models import ForecastEstimator, ModelOrders, RefitSchedule
from spvar.schemas.fit import FitConfig


class FitSpec(BaseModel):
    """Qué estimador ajustar en cada ventana del pronóstico rodante."""
    estimator: ForecastEstimator = ForecastEstimator.SPVAR_JE
    orders: ModelOrders = ModelOrders(p=1, r=1, s=0)
    config: FitConfig = Field(default_factory=FitConfig)
    var_lag: Optional[int] = Field(default=None, ge=1)


class ForecastStep(BaseModel):
    """Un paso del pronóstico: fila pronosticada (1-based) y su error ℓ2."""
    origin: int
    forecast: List[float] = []
    realized: List[float] = []
    l2_error: Optional[float] = None
    failed: bool = False
    message: Optional[str] = None


class RollingReport(BaseModel):
    """Informe de la evaluación rodante."""
    estimator: ForecastEstimator
    refit: RefitSchedule
    per_step: List[ForecastStep] = []
    mean_error: Optional[float] = None
    failed_steps: int = 0


class EstimationErrors(BaseModel):
    """Errores de estimación frente al modelo verdadero."""
    err_a: float
    err_g: float
    err_omega: float
