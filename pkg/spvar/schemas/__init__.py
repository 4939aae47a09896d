from .common import ArrayModel, Outcome
from .model import (
    OrdersDocument, OmegaDocument, ModelDocument, SufficientCondition, StationarityReport
)
from .simulation import DgpSpec, RescaleOutcome
from .loss import PredictorPanel
from .fit import FitConfig, FitResult, DescentRun
from .selection import BicRow, BicTable, LambdaPathPoint
from .diagnostics import GrangerEdge, GrangerNetwork
from .forecast import FitSpec, ForecastStep, RollingReport, EstimationErrors
from .run_config import RunConfig, parse_triple
from .experiment import ExperimentConfig

__all__ = [
    # Comunes
    "ArrayModel", "Outcome",
    # Modelo
    "OrdersDocument", "OmegaDocument", "ModelDocument", "SufficientCondition", "StationarityReport",
    # Simulación
    "DgpSpec", "RescaleOutcome",
    # Pérdida y ajuste
    "PredictorPanel", "FitConfig", "FitResult", "DescentRun",
    # Selección
    "BicRow", "BicTable", "LambdaPathPoint",
    # Diagnósticos
    "GrangerEdge", "GrangerNetwork",
    # Pronóstico
    "FitSpec", "ForecastStep", "RollingReport", "EstimationErrors",
    # CLI
    "RunConfig", "parse_triple", "ExperimentConfig",
]
