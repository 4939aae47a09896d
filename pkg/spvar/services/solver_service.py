"""
Servicio de estimación: descenso por bloques de coordenadas para los
estimadores JE y RE, primitivas de proyección y umbralización, la
inicialización por rejilla de ω y los ajustes VAR(P) auxiliares.

Cada iteración alterna
    (S1) un paso de gradiente proyectado en ω sobre la caja C_λ × C_η, y
    (S2) un paso proximal g ← S_{αλ_g}(g − α∇_g L̃_T),
ambos con búsqueda lineal por retroceso sobre la condición de mayorización
cuadrática.
"""

import itertools
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog

from spvar.errors import ArgumentError, ContractError, FitError
from spvar.models import (
    CoefSet, Estimator, GInit, ModelOrders, Omega, OmegaUpdate, SeriesPanel, SpvarModel
)
from spvar.schemas.fit import DescentRun, FitConfig, FitResult
from spvar.schemas.loss import PredictorPanel
from spvar.services.base_service import BaseService
from spvar.services.loss_service import as_array, loss_service
from spvar.services.model_service import model_service

logger = structlog.get_logger(__name__)

DENSE_LAMBDAS = (0.8, 0.6, 0.4, 0.2, -0.2, -0.4, -0.6, -0.8)
COARSE_LAMBDAS = (0.6, 0.3, -0.3, -0.6)
DENSE_GAMMAS = (0.2, 0.4, 0.6, 0.8)
COARSE_GAMMAS = (0.3, 0.6)
DENSE_THETAS = (math.pi / 4, math.pi / 2, 3 * math.pi / 4)
COARSE_THETAS = (math.pi / 4, 3 * math.pi / 4)
GRID_LIMIT = 4

RIDGE = 1e-8
MIN_STEP = 1e-14
MAX_OMEGA_STEP = 1e3


def _slack(value: float) -> float:
    return 1e-12 * max(1.0, abs(value))


class SolverService(BaseService):
    """
    Servicio para el ajuste penalizado de modelos SPVAR(∞).
    """

    def __init__(self):
        super().__init__("solver")

    # ------------------------------------------------------------------
    # Primitivas
    # ------------------------------------------------------------------

    @staticmethod
    def soft_threshold(z: np.ndarray, tau: float) -> np.ndarray:
        """
        Operador de umbralización suave sign(z)·max{|z| − τ, 0}.

        Args:
            z: Arreglo de entrada
            tau: Umbral (≥ 0)

        Returns:
            Arreglo umbralizado de la misma forma
        """
        if tau < 0:
            raise ArgumentError(f"tau debe ser ≥ 0, se recibió {tau}")
        z = np.asarray(z, dtype=float)
        return np.sign(z) * np.maximum(np.abs(z) - tau, 0.0)

    @staticmethod
    def project_omega(omega: Omega, epsilon_box: float) -> Omega:
        """Proyección componente a componente sobre C_λ × C_η."""
        eps = epsilon_box
        lambdas = tuple(min(max(lam, -1 + eps), 1 - eps) for lam in omega.lambdas)
        etas = tuple(
            (min(max(gamma, 0.0), 1 - eps), min(max(theta, eps), math.pi - eps))
            for gamma, theta in omega.etas
        )
        return Omega(lambdas=lambdas, etas=etas)

    @staticmethod
    def check_box(omega: Omega, epsilon_box: float) -> Omega:
        """
        Verificar que ω pertenece a C_λ × C_η.

        Raises:
            ContractError: Si alguna componente queda fuera de la caja
        """
        if not omega.in_box(epsilon_box):
            raise ContractError(f"ω = {omega.as_vector()} fuera de la caja con ε = {epsilon_box}")
        return omega

    def init_omega_candidates(self, orders: ModelOrders, max_starts: Optional[int] = None) -> List[Omega]:
        """
        Rejilla de valores iniciales de ω.

        Usa la rejilla densa para un único λ (o un único η) y la gruesa en otro
        caso; cada candidato combina valores distintos por posición, en orden
        canónico. Para r o s mayores que 4 se usa un único candidato
        repartido en el intervalo.

        Args:
            orders: Órdenes (p, r, s)
            max_starts: Número máximo de candidatos (subconjunto equiespaciado)

        Returns:
            Lista de candidatos
        """
        r, s = orders.r, orders.s
        if r > GRID_LIMIT:
            spread = np.linspace(0.85, -0.85, r)
            lambda_sets = [tuple(float(x) if x != 0 else 0.05 for x in spread)]
        else:
            grid = DENSE_LAMBDAS if r == 1 else COARSE_LAMBDAS
            lambda_sets = list(itertools.combinations(grid, r))
        if s > GRID_LIMIT:
            eta_sets = [tuple((0.5, m * math.pi / (s + 1)) for m in range(1, s + 1))]
        else:
            gammas, thetas = (DENSE_GAMMAS, DENSE_THETAS) if s == 1 else (COARSE_GAMMAS, COARSE_THETAS)
            pairs = sorted(itertools.product(gammas, thetas), key=lambda eta: (eta[1], eta[0]))
            eta_sets = list(itertools.combinations(pairs, s))
        candidates = [Omega(lambdas=lam, etas=eta) for lam, eta in itertools.product(lambda_sets, eta_sets)]
        if max_starts is not None and len(candidates) > max_starts:
            picks = np.unique(np.round(np.linspace(0, len(candidates) - 1, max_starts)).astype(int))
            candidates = [candidates[i] for i in picks]
        return candidates

    # ------------------------------------------------------------------
    # Descenso por bloques
    # ------------------------------------------------------------------

    def _omega_blocks(self, orders: ModelOrders, update: OmegaUpdate) -> List[np.ndarray]:
        size = orders.r + 2 * orders.s
        if update == OmegaUpdate.JACOBI:
            return [np.arange(size)]
        blocks = [np.array([j]) for j in range(orders.r)]
        blocks += [np.array([orders.r + 2 * m, orders.r + 2 * m + 1]) for m in range(orders.s)]
        return blocks

    def _omega_update(
        self,
        data: np.ndarray,
        target: np.ndarray,
        orders: ModelOrders,
        omega: Omega,
        panel: PredictorPanel,
        G: np.ndarray,
        loss: float,
        step: float,
        config: FitConfig,
    ) -> Tuple[Omega, PredictorPanel, float, float]:
        r, s = orders.r, orders.s
        if config.omega_update == OmegaUpdate.JACOBI:
            grad = loss_service.grad_omega(target, panel, G)
        for idx in self._omega_blocks(orders, config.omega_update):
            if config.omega_update == OmegaUpdate.GAUSS_SEIDEL:
                grad = loss_service.grad_omega(target, panel, G)
            vec = omega.as_vector()
            trial_step = step
            moved = False
            while trial_step >= MIN_STEP:
                candidate = vec.copy()
                candidate[idx] -= trial_step * grad[idx]
                trial_omega = self.project_omega(Omega.from_vector(candidate, r, s), config.epsilon_box)
                diff = trial_omega.as_vector() - vec
                if not np.any(diff):
                    break
                trial_panel = loss_service.build_predictors(data, orders, trial_omega, presample=config.presample)
                trial_loss = loss_service.loss_value(target, trial_panel, G)
                bound = loss + float(grad @ diff) + float(diff @ diff) / (2 * trial_step)
                if not config.backtracking or (np.isfinite(trial_loss) and trial_loss <= bound + _slack(loss)):
                    omega, loss, moved = trial_omega, trial_loss, True
                    break
                trial_step /= 2
            if moved:
                if config.backtracking:
                    step = min(2 * trial_step, MAX_OMEGA_STEP)
                panel = loss_service.build_predictors(
                    data, orders, omega, with_derivatives=True, presample=config.presample
                )
        return omega, panel, loss, step

    def _g_update(
        self,
        target: np.ndarray,
        panel: PredictorPanel,
        G: np.ndarray,
        loss: float,
        lambda_g: float,
        step: float,
        config: FitConfig,
    ) -> Tuple[np.ndarray, float, float]:
        grad = loss_service.grad_g(target, panel, G)
        while True:
            G_new = self.soft_threshold(G - step * grad, step * lambda_g)
            new_loss = loss_service.loss_value(target, panel, G_new)
            if not config.backtracking:
                return G_new, new_loss, step
            D = G_new - G
            bound = loss + float(np.sum(grad * D)) + float(np.sum(D * D)) / (2 * step)
            if np.isfinite(new_loss) and new_loss <= bound + _slack(loss):
                return G_new, new_loss, step
            step /= 2
            if step < MIN_STEP:
                return G, loss, step

    def _prox_residual(
        self, target: np.ndarray, panel: PredictorPanel, G: np.ndarray, lambda_g: float, step: float
    ) -> float:
        grad = loss_service.grad_g(target, panel, G)
        moved = self.soft_threshold(G - step * grad, step * lambda_g) - G
        return float(np.max(np.abs(moved))) if moved.size else 0.0

    def descend(
        self,
        data: np.ndarray,
        target: np.ndarray,
        orders: ModelOrders,
        omega0: Omega,
        G0: np.ndarray,
        lambda_g: float,
        config: FitConfig,
    ) -> DescentRun:
        """
        Un arranque del descenso por bloques.

        Args:
            data: Panel completo T×N (predictores)
            target: Objetivo T×M (todas las filas para JE, una para RE)
            orders: Órdenes (p, r, s)
            omega0: ω inicial (se proyecta sobre la caja)
            G0: Coeficientes iniciales M×(N·d)
            lambda_g: Penalización ℓ1
            config: Parámetros del solver

        Returns:
            DescentRun con la trayectoria del objetivo

        Raises:
            FitError: Si el objetivo deja de ser finito
        """
        if target.shape[0] != data.shape[0] - config.presample:
            raise ContractError(
                f"el objetivo tiene {target.shape[0]} filas, se esperaban {data.shape[0] - config.presample}"
            )
        has_omega = orders.r + orders.s > 0
        omega = self.project_omega(omega0, config.epsilon_box)
        G = np.array(G0, dtype=float)
        panel = loss_service.build_predictors(
            data, orders, omega, with_derivatives=has_omega, presample=config.presample
        )
        loss = loss_service.loss_value(target, panel, G)
        objective = loss + lambda_g * float(np.abs(G).sum())
        if not np.isfinite(objective):
            raise FitError("objetivo no finito en el punto inicial")
        trace = [objective]

        if config.step is not None:
            g_step = omega_step = config.step
        else:
            lipschitz = loss_service.lipschitz_estimate(panel.Z)
            g_step = 1.0 / lipschitz if lipschitz > 0 else 1.0
            omega_step = 1.0

        converged = False
        residual = math.inf
        iteration = 0
        tol = config.tol
        for iteration in range(1, config.max_iter + 1):
            if has_omega:
                omega, panel, loss, omega_step = self._omega_update(
                    data, target, orders, omega, panel, G, loss, omega_step, config
                )
            G, loss, g_step = self._g_update(target, panel, G, loss, lambda_g, g_step, config)
            new_objective = loss + lambda_g * float(np.abs(G).sum())
            if not np.isfinite(new_objective):
                raise FitError(f"objetivo no finito en la iteración {iteration}")
            trace.append(new_objective)
            change = abs(objective - new_objective) / max(1.0, objective)
            objective = new_objective
            if change < tol:
                residual = self._prox_residual(target, panel, G, lambda_g, g_step)
                scale = 1.0 + (float(np.max(np.abs(G))) if G.size else 0.0)
                if residual <= 10 * tol * scale:
                    converged = True
                    break
        if not converged:
            residual = self._prox_residual(target, panel, G, lambda_g, g_step)
        return DescentRun(
            omega=self.check_box(omega, config.epsilon_box), G=G, trace=trace, converged=converged,
            iterations=iteration, loss=loss, prox_residual=residual,
        )

    # ------------------------------------------------------------------
    # Inicialización de g
    # ------------------------------------------------------------------

    @staticmethod
    def preliminary_lag(T: int) -> int:
        """P = ⌊1.5√T⌋ limitado a [1, T−1]."""
        return max(1, min(int(math.floor(1.5 * math.sqrt(T))), T - 1))

    def var_lasso_fit(
        self, Y, P: int, lambda_g: float, config: Optional[FitConfig] = None
    ) -> np.ndarray:
        """
        VAR(P) Lasso por gradiente proximal con rezagos inicializados en cero.

        Args:
            Y: Panel T×N
            P: Orden del VAR
            lambda_g: Penalización ℓ1
            config: Parámetros del solver (tolerancia, iteraciones, paso)

        Returns:
            Arreglo P×N×N con A_1..A_P
        """
        data = as_array(Y)
        T, N = data.shape
        if not 1 <= P < T:
            raise ArgumentError(f"se requiere 1 ≤ P < T, se recibió P={P}, T={T}")
        config = config or FitConfig()
        orders = ModelOrders(p=P)
        run = self.descend(
            data, data[config.presample:], orders, Omega(), np.zeros((N, N * P)), lambda_g, config
        )
        logger.debug("var_lasso", P=P, lambda_g=lambda_g, iterations=run.iterations, converged=run.converged)
        return CoefSet.from_concat(run.G, P).mats

    def var_ols_fit(self, Y, P: int) -> np.ndarray:
        """VAR(P) por mínimos cuadrados sobre los mismos predictores; P×N×N."""
        data = as_array(Y)
        T, N = data.shape
        if not 1 <= P < T:
            raise ArgumentError(f"se requiere 1 ≤ P < T, se recibió P={P}, T={T}")
        panel = loss_service.build_predictors(data, ModelOrders(p=P), Omega())
        solution, *_ = np.linalg.lstsq(panel.Z, data, rcond=None)
        return CoefSet.from_concat(solution.T, P).mats

    def init_g(
        self,
        Y,
        omega0: Omega,
        orders: ModelOrders,
        config: FitConfig,
        var_coefs: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """
        g⁽⁰⁾ = (L⁺(ω⁽⁰⁾) ⊗ I) a⁽⁰⁾ a partir de un VAR(P) Lasso preliminar.

        Args:
            Y: Panel T×N
            omega0: ω inicial
            orders: Órdenes (p, r, s)
            config: Configuración (g_init, g_explicit, init_lambda_g)
            var_coefs: A⁽⁰⁾ ya estimado (P×N×N), compartido entre candidatos

        Returns:
            Matriz concatenada N×(N·d)
        """
        data = as_array(Y)
        T, N = data.shape
        d = orders.d
        if config.g_explicit is not None:
            G = np.asarray(config.g_explicit, dtype=float)
            if G.shape == (d, N, N):
                G = CoefSet(N=N, mats=G).concat()
            if G.shape != (N, N * d):
                raise ArgumentError(f"g_explicit debe ser {N}×{N * d} o {d}×{N}×{N}")
            return G.copy()
        if d == 0 or config.g_init == GInit.ZERO or T < 2:
            return np.zeros((N, N * d))
        if var_coefs is None:
            var_coefs = self.preliminary_var(data, config)
        P = var_coefs.shape[0]
        L = model_service.weight_matrix(P, orders, omega0)
        gram = L.T @ L
        try:
            if np.linalg.cond(gram) > 1e12:
                raise np.linalg.LinAlgError("mal condicionada")
            L_plus = np.linalg.solve(gram, L.T)
        except np.linalg.LinAlgError:
            logger.warning("pseudoinversa_regularizada", ridge=RIDGE, P=P, d=d)
            L_plus = np.linalg.solve(gram + RIDGE * np.eye(d), L.T)
        mats = np.tensordot(L_plus, var_coefs, axes=(1, 0))
        return CoefSet(N=N, mats=mats).concat()

    def preliminary_var(self, data: np.ndarray, config: FitConfig) -> np.ndarray:
        """VAR(P) Lasso preliminar con P = ⌊1.5√T⌋."""
        lambda_g = config.init_lambda_g if config.init_lambda_g is not None else config.lambda_g
        return self.var_lasso_fit(data, self.preliminary_lag(data.shape[0]), lambda_g, config)

    # ------------------------------------------------------------------
    # Arranques múltiples
    # ------------------------------------------------------------------

    def _candidates(self, orders: ModelOrders, config: FitConfig) -> List[Omega]:
        if config.omega_inits:
            for omega in config.omega_inits:
                if (omega.r, omega.s) != (orders.r, orders.s):
                    raise ArgumentError(f"ω inicial {omega.as_vector()} no coincide con {orders}")
            return list(config.omega_inits)
        return self.init_omega_candidates(orders, config.max_starts)

    def _best_start(
        self,
        data: np.ndarray,
        target_rows: Sequence[int],
        orders: ModelOrders,
        config: FitConfig,
        lambda_g: float,
        var_coefs: Optional[np.ndarray],
        n_jobs: int,
    ) -> Tuple[DescentRun, int, List[str]]:
        candidates = self._candidates(orders, config)
        target = data[config.presample:, list(target_rows)]

        def run(omega: Omega) -> DescentRun:
            G0 = self.init_g(data, omega, orders, config, var_coefs)[list(target_rows)]
            return self.descend(data, target, orders, omega, G0, lambda_g, config)

        outcomes = self.guarded_map(run, candidates, n_jobs=n_jobs)
        failed = [f"{o.index}: {o.error}" for o in outcomes if not o.ok]
        ok = [o for o in outcomes if o.ok]
        if not ok:
            raise FitError(f"todos los arranques fallaron ({len(failed)}): {failed[0]}")
        best = min(ok, key=lambda o: (o.value.loss, o.value.nnz, o.index))
        return best.value, best.index, failed

    def _validate(self, data: np.ndarray, orders: ModelOrders, config: FitConfig) -> None:
        limit = config.max_order
        if not orders.within(limit, limit, limit):
            raise ArgumentError(f"los órdenes {orders} exceden el máximo {limit}")
        if data.shape[0] - config.presample < 2:
            raise ArgumentError(
                f"se requieren al menos 2 observaciones tras {config.presample} filas de valores previos"
            )

    def _zero_result(self, data: np.ndarray, orders: ModelOrders, config: FitConfig, estimator: Estimator,
                     names) -> FitResult:
        N = data.shape[1]
        sample = data[config.presample:]
        loss = float(((sample ** 2).sum(axis=0) / sample.shape[0]).sum())
        model = SpvarModel.zero(N, orders).model_copy(update={"names": names})
        return FitResult(
            model=model, estimator=estimator, objective_trace=[loss], converged=True, iterations=0,
            in_sample_loss=loss, nnz=0, config_used=config,
        )

    def multi_start(self, Y, orders: ModelOrders, config: FitConfig) -> FitResult:
        """
        Ajuste JE desde cada candidato de ω; gana la menor pérdida en muestra.

        Los empates se resuelven por menos entradas no nulas y luego por el
        orden del candidato.
        """
        data = as_array(Y)
        names = Y.names if isinstance(Y, SeriesPanel) else None
        self._validate(data, orders, config)
        if orders.d == 0:
            return self._zero_result(data, orders, config, Estimator.JE, names)
        N = data.shape[1]
        var_coefs = self._shared_var(data, config)
        logger.info("ajuste_inicio", estimator="je", orders=str(orders), lambda_g=config.lambda_g)
        run, index, failed = self._best_start(
            data, range(N), orders, config, config.lambda_g, var_coefs, config.threads
        )
        coefs = CoefSet.from_concat(run.G, orders.d)
        model = SpvarModel(orders=orders, omega=run.omega, coefs=coefs, names=names)
        logger.info(
            "ajuste_fin", estimator="je", orders=str(orders), iterations=run.iterations,
            converged=run.converged, loss=run.loss,
        )
        return FitResult(
            model=model, estimator=Estimator.JE, objective_trace=run.trace, converged=run.converged,
            iterations=run.iterations, in_sample_loss=run.loss, nnz=run.nnz,
            prox_residual=run.prox_residual, config_used=config, start_index=index, failed_starts=failed,
        )

    def _shared_var(self, data: np.ndarray, config: FitConfig) -> Optional[np.ndarray]:
        if config.g_explicit is not None or config.g_init == GInit.ZERO:
            return None
        return self.preliminary_var(data, config)

    def fit_je(self, Y, orders: ModelOrders, config: Optional[FitConfig] = None) -> FitResult:
        """
        Estimador conjunto (JE): una sola ω para todas las filas.

        Args:
            Y: Panel T×N
            orders: Órdenes (p, r, s)
            config: Parámetros del solver

        Returns:
            FitResult del mejor arranque
        """
        return self.multi_start(Y, orders, config or FitConfig())

    def fit_re(self, Y, orders: ModelOrders, config: Optional[FitConfig] = None) -> FitResult:
        """
        Estimador por filas (RE): cada fila i tiene su propia ω_i.

        Las filas se ajustan de forma independiente; el modelo devuelto apila
        las filas ĝ_i y lleva la ω de la fila con mayor reducción de pérdida.
        ``per_row_omega`` conserva todas las ω_i y ``failed_rows`` las filas
        con algún arranque fallido.
        """
        config = config or FitConfig()
        data = as_array(Y)
        names = Y.names if isinstance(Y, SeriesPanel) else None
        self._validate(data, orders, config)
        N = data.shape[1]
        if orders.d == 0:
            return self._zero_result(data, orders, config, Estimator.RE, names)
        if config.row_lambdas is not None and len(config.row_lambdas) != N:
            raise ArgumentError(f"row_lambdas debe tener {N} valores")
        var_coefs = self._shared_var(data, config)
        logger.info("ajuste_inicio", estimator="re", orders=str(orders), lambda_g=config.lambda_g, rows=N)

        def fit_row(i: int) -> Tuple[DescentRun, int, List[str]]:
            lambda_g = config.row_lambdas[i] if config.row_lambdas is not None else config.lambda_g
            return self._best_start(data, [i], orders, config, lambda_g, var_coefs, 1)

        outcomes = self.guarded_map(fit_row, range(N), n_jobs=config.threads)
        lost_rows = [o.index for o in outcomes if not o.ok]
        if lost_rows:
            raise FitError(f"las filas {lost_rows} no tienen ningún arranque exitoso")
        runs = [o.value[0] for o in outcomes]

        row_losses = [run.loss for run in runs]
        sample = data[config.presample:]
        baseline = (sample ** 2).sum(axis=0) / sample.shape[0]
        reductions = [baseline[i] - row_losses[i] for i in range(N)]
        leader = int(np.argmax(reductions))
        G = np.vstack([run.G for run in runs])
        length = max(len(run.trace) for run in runs)
        trace = np.zeros(length)
        for run in runs:
            trace += np.pad(run.trace, (0, length - len(run.trace)), mode="edge")
        model = SpvarModel(
            orders=orders, omega=runs[leader].omega, coefs=CoefSet.from_concat(G, orders.d), names=names
        )
        converged = all(run.converged for run in runs)
        logger.info("ajuste_fin", estimator="re", orders=str(orders), converged=converged, leader=leader)
        return FitResult(
            model=model,
            estimator=Estimator.RE,
            objective_trace=trace.tolist(),
            converged=converged,
            iterations=max(run.iterations for run in runs),
            in_sample_loss=float(np.sum(row_losses)),
            nnz=int(np.count_nonzero(G)),
            prox_residual=max(run.prox_residual for run in runs),
            config_used=config,
            start_index=outcomes[leader].value[1],
            failed_starts=[f"fila {o.index}: {msg}" for o in outcomes for msg in o.value[2]],
            per_row_omega=[run.omega for run in runs],
            per_row_loss=row_losses,
            failed_rows=[o.index for o in outcomes if o.value[2]],
        )

    def fit(self, Y, orders: ModelOrders, config: Optional[FitConfig] = None,
            estimator: Estimator = Estimator.JE) -> FitResult:
        """Despachar al estimador JE o RE."""
        if estimator == Estimator.RE:
            return self.fit_re(Y, orders, config)
        return self.fit_je(Y, orders, config)

    def refine(self, Y, orders: ModelOrders, omega0: Omega, G0: np.ndarray, config: FitConfig) -> FitResult:
        """Un único arranque JE desde (ω⁽⁰⁾, G⁽⁰⁾); se usa en trayectorias con arranque en caliente."""
        data = as_array(Y)
        names = Y.names if isinstance(Y, SeriesPanel) else None
        self._validate(data, orders, config)
        if orders.d == 0:
            return self._zero_result(data, orders, config, Estimator.JE, names)
        run = self.descend(data, data[config.presample:], orders, omega0, G0, config.lambda_g, config)
        model = SpvarModel(
            orders=orders, omega=run.omega, coefs=CoefSet.from_concat(run.G, orders.d), names=names
        )
        return FitResult(
            model=model, estimator=Estimator.JE, objective_trace=run.trace, converged=run.converged,
            iterations=run.iterations, in_sample_loss=run.loss, nnz=run.nnz,
            prox_residual=run.prox_residual, config_used=config, start_index=0,
        )


# Instancia del servicio
solver_service = SolverService()
