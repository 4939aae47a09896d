"""
Servicio de pronóstico: predicción a un paso y evaluación rodante.
"""

import math
from typing import List, Optional

import numpy as np
import structlog

from spvar.errors import ArgumentError
from spvar.models import (
    CoefSet, Estimator, ForecastEstimator, ModelOrders, Omega, RefitSchedule, SpvarModel
)
from spvar.schemas.fit import FitResult
from spvar.schemas.forecast import EstimationErrors, FitSpec, ForecastStep, RollingReport
from spvar.services.base_service import RECOVERABLE, BaseService
from spvar.services.loss_service import as_array, loss_service
from spvar.services.model_service import model_service
from spvar.services.solver_service import solver_service

logger = structlog.get_logger(__name__)

DEFAULT_OLS_LAG = 4


class ForecastService(BaseService):
    """
    Servicio para pronósticos a un paso.
    """

    def __init__(self):
        super().__init__("forecast")

    @staticmethod
    def _extended(history) -> np.ndarray:
        data = as_array(history)
        if data.shape[0] < 1:
            raise ArgumentError("el historial debe tener al menos una observación")
        return np.vstack([data, np.zeros((1, data.shape[1]))])

    def one_step_forecast(self, model: SpvarModel, history) -> np.ndarray:
        """
        ŷ_{T+1} = Σ_{h=1}^{T} Â_h y_{T+1−h}.

        Args:
            model: Modelo ajustado
            history: Panel T×N

        Returns:
            Vector de dimensión N
        """
        extended = self._extended(history)
        panel = loss_service.build_predictors(extended, model.orders, model.omega)
        return model.coefs.concat() @ panel.Z[-1]

    def forecast_from_fit(self, fit: FitResult, history) -> np.ndarray:
        """Pronóstico a un paso; con RE cada fila usa su propia ω̂_i."""
        if not fit.per_row_omega:
            return self.one_step_forecast(fit.model, history)
        extended = self._extended(history)
        Gcat = fit.model.coefs.concat()
        forecast = np.zeros(Gcat.shape[0])
        for i, omega in enumerate(fit.per_row_omega):
            panel = loss_service.build_predictors(extended, fit.model.orders, omega)
            forecast[i] = Gcat[i] @ panel.Z[-1]
        return forecast

    def _var_result(self, train: np.ndarray, mats: np.ndarray, spec: FitSpec) -> FitResult:
        P, N = mats.shape[0], train.shape[1]
        model = SpvarModel(orders=ModelOrders(p=P), omega=Omega(), coefs=CoefSet(N=N, mats=mats))
        panel = loss_service.build_predictors(train, model.orders, model.omega)
        loss = loss_service.loss_value(train, panel, model.coefs)
        return FitResult(
            model=model, objective_trace=[loss], converged=True, in_sample_loss=loss,
            nnz=model.coefs.nnz(), config_used=spec.config,
        )

    def fit_window(self, train: np.ndarray, spec: FitSpec) -> FitResult:
        """Ajustar el estimador de ``spec`` sobre una ventana de entrenamiento."""
        T = train.shape[0]
        if spec.estimator == ForecastEstimator.SPVAR_JE:
            return solver_service.fit(train, spec.orders, spec.config, Estimator.JE)
        if spec.estimator == ForecastEstimator.SPVAR_RE:
            return solver_service.fit(train, spec.orders, spec.config, Estimator.RE)
        if spec.estimator == ForecastEstimator.VAR_LASSO:
            P = spec.var_lag or solver_service.preliminary_lag(T)
            mats = solver_service.var_lasso_fit(train, P, spec.config.lambda_g, spec.config)
            return self._var_result(train, mats, spec)
        P = spec.var_lag or DEFAULT_OLS_LAG
        return self._var_result(train, solver_service.var_ols_fit(train, P), spec)

    def rolling_eval(
        self,
        Y,
        fit_spec: FitSpec,
        origin: int,
        horizon_steps: int,
        refit: RefitSchedule = RefitSchedule.EVERY_STEP,
        n_jobs: Optional[int] = None,
    ) -> RollingReport:
        """
        Evaluación rodante a un paso.

        En el paso k se ajusta con las filas 1..origin+k−1 y se pronostica la
        fila origin+k. Con ``once`` el modelo se ajusta una sola vez sobre las
        primeras ``origin`` filas. λ_g se mantiene fijo en toda la ventana.

        Args:
            Y: Panel T×N
            fit_spec: Estimador, órdenes y configuración
            origin: Última fila del primer entrenamiento (1-based)
            horizon_steps: Número de pasos
            refit: Calendario de reajuste
            n_jobs: Trabajadores para los pasos con reajuste

        Returns:
            RollingReport con el error ℓ2 de cada paso
        """
        data = as_array(Y)
        T = data.shape[0]
        if horizon_steps < 0:
            raise ArgumentError("horizon_steps debe ser ≥ 0")
        if origin < 2:
            raise ArgumentError("origin debe ser ≥ 2")
        if origin + horizon_steps > T:
            raise ArgumentError(f"origin + horizon_steps = {origin + horizon_steps} excede T = {T}")
        report = RollingReport(estimator=fit_spec.estimator, refit=refit)
        if horizon_steps == 0:
            return report
        spec = fit_spec.model_copy(update={"config": fit_spec.config.model_copy(update={"threads": 1})})
        steps = list(range(1, horizon_steps + 1))

        if refit == RefitSchedule.ONCE:
            try:
                fixed = self.fit_window(data[:origin], spec)
            except RECOVERABLE as exc:
                message = f"{type(exc).__name__}: {exc}"
                logger.warning("ventana_fallida", origin=origin, error=message)
                failed = [ForecastStep(origin=origin + k, failed=True, message=message) for k in steps]
                return report.model_copy(update={"per_step": failed, "failed_steps": len(failed)})

            def forecast_step(k: int) -> np.ndarray:
                return self.forecast_from_fit(fixed, data[:origin + k - 1])
        else:
            def forecast_step(k: int) -> np.ndarray:
                window = data[:origin + k - 1]
                return self.forecast_from_fit(self.fit_window(window, spec), window)

        jobs = n_jobs if n_jobs is not None else fit_spec.config.threads
        outcomes = self.guarded_map(forecast_step, steps, n_jobs=jobs)
        per_step = []
        for outcome, k in zip(outcomes, steps):
            row = origin + k
            realized = data[row - 1]
            if not outcome.ok:
                per_step.append(ForecastStep(
                    origin=row, realized=realized.tolist(), failed=True, message=outcome.error,
                ))
                continue
            forecast = np.asarray(outcome.value, dtype=float)
            per_step.append(ForecastStep(
                origin=row, forecast=forecast.tolist(), realized=realized.tolist(),
                l2_error=float(np.linalg.norm(forecast - realized)),
            ))
        errors = [step.l2_error for step in per_step if not step.failed]
        failed_steps = len(per_step) - len(errors)
        mean_error = float(np.mean(errors)) if errors else None
        logger.info(
            "evaluacion_rodante", estimator=fit_spec.estimator.value, steps=len(per_step),
            failed=failed_steps, mean_error=mean_error,
        )
        return report.model_copy(
            update={"per_step": per_step, "mean_error": mean_error, "failed_steps": failed_steps}
        )

    def estimation_errors(
        self, fitted: SpvarModel, truth: SpvarModel, H: int = 100, per_row_omega: Optional[List[Omega]] = None,
    ) -> EstimationErrors:
        """
        Errores ‖â − a*‖₂ (A_h hasta H), ‖ĝ − g*‖₂ y ‖ω̂ − ω*‖₂ tras
        canonicalizar ambos modelos. Con órdenes distintos solo err_a está
        definido; los otros dos son NaN.

        Con ``per_row_omega`` (ajustes RE) err_omega es max_i ‖ω̂_i − ω*‖₂.
        """
        if fitted.N != truth.N:
            raise ArgumentError("los modelos tienen dimensiones distintas")
        fitted_c = model_service.canonicalize(fitted)
        truth_c = model_service.canonicalize(truth)
        diff = model_service.lag_matrices(fitted_c, H) - model_service.lag_matrices(truth_c, H)
        err_a = float(np.linalg.norm(diff.ravel()))
        if fitted.orders != truth.orders:
            return EstimationErrors(err_a=err_a, err_g=math.nan, err_omega=math.nan)
        err_g = float(np.linalg.norm(fitted_c.coefs.vector() - truth_c.coefs.vector()))
        target = truth_c.omega.as_vector()
        omegas = per_row_omega if per_row_omega is not None else [fitted.omega]
        err_omega = max(
            float(np.linalg.norm(model_service.canonical_omega(omega).as_vector() - target)) for omega in omegas
        )
        return EstimationErrors(err_a=err_a, err_g=err_g, err_omega=err_omega)


# Instancia del servicio
forecast_service = ForecastService()
