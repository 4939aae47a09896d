"""
Servicio de experimentos: réplicas Monte Carlo reducidas con salida en CSV
de formato largo (una fila por réplica y configuración).

Cada unidad (tamaño, réplica) recibe su propio generador derivado de la
semilla base, por lo que el CSV no depende del número de hilos.
"""

from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
import structlog

from spvar.errors import FitError
from spvar.models import Estimator, ExperimentName, ForecastEstimator, ModelOrders, Omega, SpvarModel
from spvar.schemas.experiment import ExperimentConfig
from spvar.schemas.fit import FitConfig
from spvar.schemas.forecast import FitSpec
from spvar.schemas.simulation import DgpSpec
from spvar.services.base_service import BaseService
from spvar.services.forecast_service import forecast_service
from spvar.services.io_service import io_service
from spvar.services.selection_service import selection_service
from spvar.services.simulation_service import simulation_service
from spvar.services.solver_service import solver_service

logger = structlog.get_logger(__name__)

Unit = Tuple[int, int, int]

PRESAMPLE_ZERO = "zero"
PRESAMPLE_ACTUAL = "actual"

FORECAST_ESTIMATORS = (
    ForecastEstimator.SPVAR_JE,
    ForecastEstimator.SPVAR_RE,
    ForecastEstimator.VAR_LASSO,
    ForecastEstimator.VAR_OLS,
)


class ExperimentService(BaseService):
    """
    Servicio para ejecutar las réplicas Monte Carlo.
    """

    def __init__(self):
        super().__init__("experiment")

    def _units(self, config: ExperimentConfig) -> List[Unit]:
        """(índice de semilla, T, réplica) en orden tamaño-mayor."""
        units = []
        for setting, T in enumerate(config.resolved_sizes):
            for replicate in range(config.replicates):
                units.append((setting * config.replicates + replicate, T, replicate))
        return units

    def _fit_config(self, config: ExperimentConfig) -> FitConfig:
        return config.fit.model_copy(update={"threads": 1, "seed": config.seed})

    def _lambda_g(self, data: np.ndarray, orders: ModelOrders, fit_config: FitConfig,
                  config: ExperimentConfig, estimator: Estimator = Estimator.JE) -> float:
        if config.lambda_g is not None:
            return config.lambda_g
        return selection_service.select_lambda_g(data, orders, None, fit_config, estimator)

    def _estimation_row(self, Y, truth: SpvarModel, fit_config: FitConfig, estimator: Estimator) -> dict:
        """Ajustar con ``estimator`` y medir los errores frente al modelo verdadero."""
        fit = solver_service.fit(Y, truth.orders, fit_config, estimator)
        errors = forecast_service.estimation_errors(fit.model, truth, per_row_omega=fit.per_row_omega)
        return {
            "estimator": estimator.value, "lambda_g": fit_config.lambda_g,
            "err_a": errors.err_a, "err_g": errors.err_g, "err_omega": errors.err_omega,
            "converged": int(fit.converged),
        }

    # ------------------------------------------------------------------
    # Unidades
    # ------------------------------------------------------------------

    def error_scaling_unit(self, config: ExperimentConfig, unit: Unit) -> List[dict]:
        """Error de estimación JE o RE para una réplica de DGP1 o DGP2."""
        index, T, replicate = unit
        N = config.resolved_N
        factory = simulation_service.dgp1 if config.dgp == "dgp1" else simulation_service.dgp2
        spec = factory(N=N, seed=config.seed)
        truth, panel = simulation_service.simulate_dgp(spec, T, rng=self.spawn_rng(config.seed, index))
        fit_config = self._fit_config(config)
        lambda_g = self._lambda_g(panel.data, spec.orders, fit_config, config, config.estimator)
        row = self._estimation_row(
            panel, truth, fit_config.model_copy(update={"lambda_g": lambda_g}), config.estimator
        )
        return [{"dgp": spec.name, "N": N, "T": T, "replicate": replicate, **row}]

    def je_re_comparison_unit(self, config: ExperimentConfig, unit: Unit) -> List[dict]:
        """
        JE frente a RE sobre el mismo panel: (p,r,s) = (1,1,0) con
        λ₁ = ``comparison_lambda`` y ``nonzeros_per_row`` no nulos por fila.
        λ_g se elige una vez con el JE y se comparte.
        """
        index, T, replicate = unit
        N = config.resolved_N
        spec = DgpSpec(
            name=f"row{config.nonzeros_per_row}", N=N, orders=ModelOrders(p=1, r=1, s=0),
            omega=Omega(lambdas=(config.comparison_lambda,)), nonzeros_per_row=config.nonzeros_per_row,
            seed=config.seed,
        )
        truth, panel = simulation_service.simulate_dgp(spec, T, rng=self.spawn_rng(config.seed, index))
        fit_config = self._fit_config(config)
        fit_config = fit_config.model_copy(
            update={"lambda_g": self._lambda_g(panel.data, spec.orders, fit_config, config)}
        )
        return [
            {"dgp": spec.name, "N": N, "T": T, "replicate": replicate,
             **self._estimation_row(panel, truth, fit_config, estimator)}
            for estimator in (Estimator.JE, Estimator.RE)
        ]

    def init_sensitivity_unit(self, config: ExperimentConfig, unit: Unit) -> List[dict]:
        """
        Inicialización en cero frente a valores previos reales.

        Se simulan ``presample`` + T filas; el ajuste ``zero`` usa solo las
        últimas T y el ajuste ``actual`` usa las anteriores como valores
        previos de los predictores. Ambos evalúan la pérdida en las mismas T
        filas con el mismo λ_g.
        """
        index, T, replicate = unit
        N = config.resolved_N
        factory = simulation_service.dgp1 if config.dgp == "dgp1" else simulation_service.dgp2
        spec = factory(N=N, seed=config.seed)
        truth, panel = simulation_service.simulate_dgp(
            spec, config.presample + T, rng=self.spawn_rng(config.seed, index)
        )
        sample = panel.data[config.presample:]
        fit_config = self._fit_config(config)
        lambda_g = self._lambda_g(sample, spec.orders, fit_config, config)
        starts = {PRESAMPLE_ZERO: (sample, 0), PRESAMPLE_ACTUAL: (panel.data, config.presample)}
        rows = []
        for estimator in (Estimator.JE, Estimator.RE):
            for init, (data, presample) in starts.items():
                cell = fit_config.model_copy(update={"lambda_g": lambda_g, "presample": presample})
                row = self._estimation_row(data, truth, cell, estimator)
                rows.append({"dgp": spec.name, "N": N, "T": T, "replicate": replicate, "init": init, **row})
        return rows

    def bic_consistency_unit(self, config: ExperimentConfig, unit: Unit) -> List[dict]:
        """Órdenes elegidos por el BIC para una réplica del DGP de selección."""
        index, T, replicate = unit
        spec = simulation_service.selection_dgp(
            config.true_orders, config.rho_bar, N=config.resolved_N, seed=config.seed
        )
        _, panel = simulation_service.simulate_dgp(spec, T, rng=self.spawn_rng(config.seed, index))
        table = selection_service.select_orders(
            panel, config.max_orders, self._fit_config(config), Estimator.JE,
            lambda_g=config.lambda_g, tau=config.tau, q=config.q,
        )
        chosen = table.chosen_orders
        return [{
            "dgp": spec.name, "rho_bar": config.rho_bar, "T": T, "replicate": replicate,
            "selected_p": chosen.p, "selected_r": chosen.r, "selected_s": chosen.s,
            "correct": int(chosen == config.true_orders),
        }]

    def varma_forecast_unit(self, config: ExperimentConfig, unit: Unit) -> List[dict]:
        """
        Error ℓ2 del pronóstico de y_{T+1} sobre un VARMA(1,1) para los cuatro
        estimadores. λ_g se elige una vez con el JE y se comparte con el VAR
        Lasso.
        """
        index, T, replicate = unit
        N = config.resolved_N
        rng = self.spawn_rng(config.seed, index)
        Phi = config.phi_scale * np.eye(N)
        _, Theta = simulation_service.varma11_from_jordan(Phi, Omega(lambdas=(config.varma_lambda,)), rng=rng)
        panel = simulation_service.simulate_varma11(Phi, Theta, T + 1, rng=rng)
        train, realized = panel.data[:T], panel.data[T]

        fit_config = self._fit_config(config)
        lambda_g = self._lambda_g(train, config.true_orders, fit_config, config)
        fit_config = fit_config.model_copy(update={"lambda_g": lambda_g})
        rows = []
        for estimator in FORECAST_ESTIMATORS:
            var_lag = config.ols_lag if estimator == ForecastEstimator.VAR_OLS else None
            spec = FitSpec(estimator=estimator, orders=config.true_orders, config=fit_config, var_lag=var_lag)
            fit = forecast_service.fit_window(train, spec)
            forecast = forecast_service.forecast_from_fit(fit, train)
            rows.append({
                "N": N, "T": T, "replicate": replicate, "estimator": estimator.value,
                "l2_error": float(np.linalg.norm(forecast - realized)),
            })
        return rows

    # ------------------------------------------------------------------
    # Orquestación
    # ------------------------------------------------------------------

    def _runner(self, name: ExperimentName) -> Callable[[ExperimentConfig, Unit], List[dict]]:
        runners: Dict[ExperimentName, Callable[[ExperimentConfig, Unit], List[dict]]] = {
            ExperimentName.ERROR_SCALING: self.error_scaling_unit,
            ExperimentName.BIC_CONSISTENCY: self.bic_consistency_unit,
            ExperimentName.VARMA_FORECAST: self.varma_forecast_unit,
            ExperimentName.JE_RE_COMPARISON: self.je_re_comparison_unit,
            ExperimentName.INIT_SENSITIVITY: self.init_sensitivity_unit,
        }
        return runners[name]

    def run(self, config: ExperimentConfig) -> pd.DataFrame:
        """
        Ejecutar todas las réplicas y devolver la tabla larga.

        Raises:
            FitError: Si alguna réplica falla; el mensaje indica T y réplica
        """
        units = self._units(config)
        runner = self._runner(config.name)
        logger.info("experimento_inicio", experiment=config.name.value, units=len(units), seed=config.seed)

        def run_unit(unit: Unit) -> List[dict]:
            return runner(config, unit)

        outcomes = self.guarded_map(run_unit, units, n_jobs=config.threads)
        failed = [
            f"T={units[o.index][1]} réplica={units[o.index][2]}: {o.error}" for o in outcomes if not o.ok
        ]
        if failed:
            raise FitError(f"{len(failed)} réplicas fallaron; primera: {failed[0]}")
        rows = [row for outcome in outcomes for row in outcome.value]
        frame = pd.DataFrame(rows, columns=config.columns)
        logger.info("experimento_fin", experiment=config.name.value, rows=len(frame))
        return frame

    def run_experiment(self, config: ExperimentConfig, out_dir: Optional[Path] = None) -> Path:
        """
        Ejecutar el experimento y escribir ``<nombre>.csv`` en ``out_dir``.

        Args:
            config: Parámetros del experimento
            out_dir: Directorio de salida (por defecto el actual)

        Returns:
            Ruta del CSV escrito
        """
        frame = self.run(config)
        path = Path(out_dir or ".") / f"{config.name.value}.csv"
        return io_service.save_frame(frame, path)

    def summarize(self, frame: pd.DataFrame, config: ExperimentConfig) -> pd.DataFrame:
        """Medianas (o proporción de aciertos) por tamaño para el resumen de la CLI."""
        errors = ["err_a", "err_g", "err_omega"]
        if config.name == ExperimentName.ERROR_SCALING:
            return frame.groupby("T", sort=True)[errors].median().reset_index()
        if config.name == ExperimentName.JE_RE_COMPARISON:
            return frame.groupby(["T", "estimator"], sort=True)[errors].median().reset_index()
        if config.name == ExperimentName.INIT_SENSITIVITY:
            return frame.groupby(["T", "estimator", "init"], sort=True)[errors].median().reset_index()
        if config.name == ExperimentName.BIC_CONSISTENCY:
            return frame.groupby("T", sort=True)["correct"].mean().rename("proportion").reset_index()
        return frame.groupby(["T", "estimator"], sort=True)["l2_error"].median().reset_index()


# Instancia del servicio
experiment_service = ExperimentService()
