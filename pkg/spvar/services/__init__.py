"""
Archivo de inicialización para el paquete de servicios.

Este módulo expone los servicios disponibles para importación fácil.
"""

from .base_service import BaseService
from .model_service import ModelService, model_service
from .loss_service import LossService, loss_service
from .simulation_service import SimulationService, simulation_service
from .solver_service import SolverService, solver_service
from .selection_service import SelectionService, selection_service
from .diagnostics_service import DiagnosticsService, diagnostics_service
from .forecast_service import ForecastService, forecast_service
from .io_service import IoService, io_service
from .experiment_service import ExperimentService, experiment_service

__all__ = [
    "BaseService",
    "ModelService", "model_service",
    "LossService", "loss_service",
    "SimulationService", "simulation_service",
    "SolverService", "solver_service",
    "SelectionService", "selection_service",
    "DiagnosticsService", "diagnostics_service",
    "ForecastService", "forecast_service",
    "IoService", "io_service",
    "ExperimentService", "experiment_service",
]
