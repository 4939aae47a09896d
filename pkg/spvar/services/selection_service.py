"""
Servicio de selección: BIC de alta dimensión para los órdenes (p, r, s) y
BIC modificado para el parámetro de regularización λ_g.
"""

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog

from spvar.config import settings
from spvar.errors import ArgumentError, FitError, SelectionError
from spvar.models import Estimator, ModelOrders
from spvar.schemas.fit import FitConfig
from spvar.schemas.selection import BicRow, BicTable, LambdaPathPoint
from spvar.services.base_service import BaseService
from spvar.services.loss_service import as_array, loss_service
from spvar.services.solver_service import solver_service

logger = structlog.get_logger(__name__)

LOSS_FLOOR = 1e-300


def _clamped_log(loss: float) -> float:
    if loss <= 0:
        logger.warning("perdida_ajustada", loss=loss, floor=LOSS_FLOOR)
        loss = LOSS_FLOOR
    return math.log(loss)


class SelectionService(BaseService):
    """
    Servicio para la selección de órdenes y de λ_g.
    """

    def __init__(self):
        super().__init__("selection")

    def bic_score(
        self,
        loss: float,
        orders: ModelOrders,
        N: int,
        T: int,
        tau: Optional[float] = None,
        q: Optional[float] = None,
    ) -> float:
        """
        BIC(M) = log L̃_T + τ·d·[log(N·max(p,1))/T]^{1−q/2}·log T.

        Args:
            loss: Pérdida en muestra (> 0)
            orders: Órdenes del modelo
            N: Dimensión
            T: Observaciones (≥ 2)
            tau: Constante de penalización (por defecto settings.TAU)
            q: Exponente de dispersión débil en [0, 1] (por defecto settings.BIC_Q)

        Returns:
            Valor del criterio
        """
        tau = settings.TAU if tau is None else tau
        q = settings.BIC_Q if q is None else q
        if loss <= 0:
            raise ArgumentError(f"la pérdida debe ser positiva, se recibió {loss}")
        if T < 2:
            raise ArgumentError("se requiere T ≥ 2")
        if not 0 <= q <= 1:
            raise ArgumentError(f"q debe estar en [0,1], se recibió {q}")
        if tau < 0:
            raise ArgumentError("tau debe ser ≥ 0")
        rate = (math.log(N * max(orders.p, 1)) / T) ** (1 - q / 2)
        return math.log(loss) + tau * orders.d * rate * math.log(T)

    def sparsity_score(self, loss: float, nnz: int, N: int, d: int, T: int) -> float:
        """
        BIC de alta dimensión de la regresión vectorizada:

            log L̃_T + nnz·C_n·log(N²d)/n,   n = N·T,   C_n = max(log log n, 1)

        L̃_T promedia N·T respuestas escalares, de modo que el tamaño muestral
        del término de penalización es n = N·T y no T.

        Args:
            loss: Pérdida en muestra
            nnz: Coeficientes no nulos de g
            N: Dimensión
            d: Número de matrices G_k
            T: Observaciones

        Returns:
            Valor del criterio
        """
        n = N * T
        c_n = max(math.log(math.log(n)), 1.0) if n > 1 else 1.0
        penalty = nnz * c_n * math.log(N * N * max(d, 1)) / n
        return _clamped_log(loss) + penalty

    def lambda_max(self, Y, orders: ModelOrders, config: FitConfig) -> float:
        """Menor λ_g con solución nula: max|∇_g L̃_T| en g = 0."""
        data = as_array(Y)
        omega = (config.omega_inits or solver_service.init_omega_candidates(orders, 1))[0]
        omega = solver_service.project_omega(omega, config.epsilon_box)
        panel = loss_service.build_predictors(data, orders, omega)
        grad = loss_service.grad_g(data, panel, np.zeros((data.shape[1], panel.Z.shape[1])))
        return float(np.max(np.abs(grad))) if grad.size else 0.0

    def default_grid(self, Y, orders: ModelOrders, config: FitConfig, size: Optional[int] = None) -> List[float]:
        """Rejilla logarítmica descendente sobre [1e−3, 1]·λ_max."""
        size = settings.LAMBDA_GRID_SIZE if size is None else size
        top = self.lambda_max(Y, orders, config)
        if top <= 0:
            return [0.0]
        return (top * np.logspace(0, -3, size)).tolist()

    def lambda_path(
        self,
        Y,
        orders: ModelOrders,
        config: FitConfig,
        lambda_grid: Optional[Sequence[float]] = None,
        estimator: Estimator = Estimator.JE,
    ) -> List[LambdaPathPoint]:
        """
        Trayectoria de λ_g en orden descendente.

        Con JE cada punto arranca en caliente desde la solución anterior; con
        RE cada punto es un ajuste completo.

        Returns:
            Puntos (λ_g, pérdida, nnz, criterio) de los ajustes exitosos
        """
        data = as_array(Y)
        T, N = data.shape
        grid = self.default_grid(data, orders, config) if lambda_grid is None else list(lambda_grid)
        if not grid:
            raise ArgumentError("la rejilla de λ_g está vacía")
        if any(x < 0 for x in grid):
            raise ArgumentError("la rejilla de λ_g debe ser no negativa")
        grid = sorted(grid, reverse=True)

        points: List[LambdaPathPoint] = []
        previous = None
        for lambda_g in grid:
            cell = config.model_copy(update={"lambda_g": lambda_g})
            try:
                if estimator == Estimator.RE:
                    fit = solver_service.fit_re(data, orders, cell)
                elif previous is None:
                    fit = solver_service.fit_je(data, orders, cell)
                else:
                    fit = solver_service.refine(
                        data, orders, previous.model.omega, previous.model.coefs.concat(), cell
                    )
            except FitError as exc:
                logger.warning("punto_fallido", lambda_g=lambda_g, detail=exc.detail)
                continue
            previous = fit
            points.append(LambdaPathPoint(
                lambda_g=lambda_g,
                loss=fit.in_sample_loss,
                nnz=fit.nnz,
                score=self.sparsity_score(fit.in_sample_loss, fit.nnz, N, orders.d, T),
                converged=fit.converged,
            ))
        return points

    def select_lambda_g(
        self,
        Y,
        orders: ModelOrders,
        lambda_grid: Optional[Sequence[float]] = None,
        config: Optional[FitConfig] = None,
        estimator: Estimator = Estimator.JE,
    ) -> float:
        """
        Seleccionar λ_g minimizando el BIC modificado; en empate gana el
        mayor λ_g.

        Raises:
            SelectionError: Si todos los ajustes fallan
        """
        config = config or FitConfig()
        path = self.lambda_path(Y, orders, config, lambda_grid, estimator)
        if not path:
            raise SelectionError("ningún valor de λ_g pudo ajustarse")
        best = min(range(len(path)), key=lambda i: (path[i].score, -path[i].lambda_g))
        logger.info("lambda_seleccionado", orders=str(orders), lambda_g=path[best].lambda_g, nnz=path[best].nnz)
        return path[best].lambda_g

    def _fit_cell(
        self, data: np.ndarray, orders: ModelOrders, config: FitConfig, estimator: Estimator,
        lambda_g: Optional[float], tau: float, q: float,
    ) -> BicRow:
        chosen = lambda_g
        if chosen is None:
            chosen = self.select_lambda_g(data, orders, None, config, estimator) if orders.d else 0.0
        fit = solver_service.fit(data, orders, config.model_copy(update={"lambda_g": chosen}), estimator)
        T, N = data.shape
        loss = fit.in_sample_loss
        if loss <= 0:
            logger.warning("perdida_ajustada", orders=str(orders), loss=loss, floor=LOSS_FLOOR)
            loss = LOSS_FLOOR
        return BicRow(
            orders=orders, lambda_g_used=chosen, loss=fit.in_sample_loss,
            bic=self.bic_score(loss, orders, N, T, tau, q), converged=fit.converged, nnz=fit.nnz,
        )

    def select_orders(
        self,
        Y,
        max_orders: Tuple[int, int, int],
        config: Optional[FitConfig] = None,
        estimator: Estimator = Estimator.JE,
        lambda_g: Optional[float] = None,
        tau: Optional[float] = None,
        q: Optional[float] = None,
    ) -> BicTable:
        """
        Ajustar cada (p, r, s) de la rejilla y elegir el mínimo BIC.

        Args:
            Y: Panel T×N
            max_orders: (p̄, r̄, s̄)
            config: Parámetros del solver
            estimator: JE o RE
            lambda_g: λ_g fijo; si es None se selecciona por celda
            tau: Constante del BIC
            q: Exponente del BIC

        Returns:
            BicTable con todas las celdas y el índice elegido
        """
        config = config or FitConfig()
        tau = settings.TAU if tau is None else tau
        q = settings.BIC_Q if q is None else q
        if any(m < 0 for m in max_orders):
            raise ArgumentError("los órdenes máximos deben ser ≥ 0")
        data = as_array(Y)
        p_max, r_max, s_max = max_orders
        grid = [
            ModelOrders(p=p, r=r, s=s)
            for p in range(p_max + 1) for r in range(r_max + 1) for s in range(s_max + 1)
        ]
        cell_config = config.model_copy(update={"threads": 1, "max_order": max(config.max_order, *max_orders)})
        logger.info("seleccion_inicio", cells=len(grid), estimator=estimator.value, tau=tau, q=q)

        def fit_cell(orders: ModelOrders) -> BicRow:
            return self._fit_cell(data, orders, cell_config, estimator, lambda_g, tau, q)

        outcomes = self.guarded_map(fit_cell, grid, n_jobs=config.threads)
        rows = [
            o.value if o.ok else BicRow(orders=grid[o.index], error=o.error)
            for o in outcomes
        ]
        fitted = [i for i, row in enumerate(rows) if row.bic is not None]
        if not fitted:
            raise SelectionError("ninguna celda de la rejilla pudo ajustarse")
        eligible = [i for i in fitted if rows[i].converged]
        if not eligible:
            logger.warning("sin_celdas_convergentes", cells=len(fitted))
            eligible = fitted

        def rank(i: int):
            orders = rows[i].orders
            return (rows[i].bic, orders.d, orders.as_tuple())

        chosen = min(eligible, key=rank)
        logger.info("seleccion_fin", chosen=str(rows[chosen].orders), bic=rows[chosen].bic)
        return BicTable(rows=rows, chosen=chosen, tau=tau, q=q)


# Instancia del servicio
selection_service = SelectionService()
