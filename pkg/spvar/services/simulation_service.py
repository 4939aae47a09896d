"""
Servicio de simulación de procesos SPVAR(∞) y VARMA(1,1).
"""

import math
from typing import Optional, Tuple

import numpy as np
import structlog
from scipy.linalg import block_diag
from scipy.optimize import bisect

from spvar.config import settings
from spvar.errors import ArgumentError, NonStationaryError, PreconditionError
from spvar.models import CoefSet, ModelOrders, Omega, SeriesPanel, SparsityMode, SpvarModel
from spvar.schemas.simulation import DgpSpec, RescaleOutcome
from spvar.services.base_service import BaseService
from spvar.services.model_service import model_service

logger = structlog.get_logger(__name__)

_SCALE_BRACKET = (1e-8, 1e8)
_SCALE_MAX_ITER = 200


class SimulationService(BaseService):
    """
    Servicio para la generación de coeficientes y trayectorias sintéticas.
    """

    def __init__(self):
        super().__init__("simulation")

    # ------------------------------------------------------------------
    # Coeficientes
    # ------------------------------------------------------------------

    def stationarity_criterion(self, mats: np.ndarray, p: int, rho_bar: float) -> float:
        """ρ(Ḡ₁) + ρ̄/(1−ρ̄) Σ_k ρ(G_{p+k}) para un arreglo d×N×N."""
        value = model_service.spectral_radius(model_service.companion_matrix(mats[:p]))
        if mats.shape[0] > p and rho_bar > 0:
            value += rho_bar / (1 - rho_bar) * sum(model_service.spectral_radius(G) for G in mats[p:])
        return float(value)

    def rescale_for_stationarity(
        self, coefs: CoefSet, orders: ModelOrders, omega: Omega, target: float
    ) -> RescaleOutcome:
        """
        Reescalar todas las G_k por un factor común c > 0 de modo que el
        criterio de estacionariedad suficiente valga ``target``.

        Args:
            coefs: Matrices a reescalar
            orders: Órdenes (p, r, s)
            omega: Decaimientos verdaderos
            target: Valor objetivo en (0, 1)

        Returns:
            RescaleOutcome con el conjunto reescalado y el factor
        """
        if not 0 < target < 1:
            raise ArgumentError(f"target debe estar en (0,1), se recibió {target}")
        rho_bar = omega.rho_bar
        if rho_bar >= 1:
            raise PreconditionError(f"max{{|λ_j|, γ_m}} = {rho_bar} no es menor que 1")
        mats = coefs.mats

        def excess(c: float) -> float:
            return self.stationarity_criterion(c * mats, orders.p, rho_bar) - target

        lo, hi = _SCALE_BRACKET
        if not np.any(mats) or excess(hi) <= 0:
            logger.warning("reescalado_degenerado", nnz=coefs.nnz())
            return RescaleOutcome(coefs=coefs, factor=1.0, criterion=excess(1.0) + target, degenerate=True)
        factor = bisect(excess, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=_SCALE_MAX_ITER)
        scaled = coefs.scaled(factor)
        criterion = self.stationarity_criterion(scaled.mats, orders.p, rho_bar)
        logger.debug("reescalado", factor=factor, criterion=criterion)
        return RescaleOutcome(coefs=scaled, factor=factor, criterion=criterion)

    def gen_sparse_coefs(self, spec: DgpSpec, rng: np.random.Generator) -> CoefSet:
        """
        Generar G_1..G_d dispersas con entradas uniformes y reescalarlas.

        En modo ``row`` cada fila tiene exactamente ``nonzeros_per_row``
        entradas no nulas en columnas uniformes; en modo ``total`` se eligen
        posiciones sin reemplazo en toda la matriz.
        """
        N, d = spec.N, spec.orders.d
        if spec.sparsity_mode == SparsityMode.ROW and spec.nonzeros_per_row > N:
            raise ArgumentError(f"nonzeros_per_row={spec.nonzeros_per_row} excede N={N}")
        if spec.nonzeros_per_matrix > N * N:
            raise ArgumentError(f"{spec.nonzeros_per_matrix} entradas no nulas no caben en {N}×{N}")
        low, high = spec.coef_range
        mats = np.zeros((d, N, N))
        for k in range(d):
            if spec.sparsity_mode == SparsityMode.ROW:
                for i in range(N):
                    cols = rng.choice(N, size=spec.nonzeros_per_row, replace=False)
                    mats[k, i, cols] = rng.uniform(low, high, size=cols.size)
            else:
                flat = rng.choice(N * N, size=spec.nonzeros_per_matrix, replace=False)
                mats[k].flat[flat] = rng.uniform(low, high, size=flat.size)
        outcome = self.rescale_for_stationarity(
            CoefSet(N=N, mats=mats), spec.orders, spec.omega, spec.stationarity_target
        )
        return outcome.coefs

    # ------------------------------------------------------------------
    # Trayectorias
    # ------------------------------------------------------------------

    def _innovations(
        self, shape: Tuple[int, int], noise_sd: float, rng: Optional[np.random.Generator],
        innovations: Optional[np.ndarray],
    ) -> np.ndarray:
        if innovations is not None:
            eps = np.asarray(innovations, dtype=float)
            if eps.shape != shape:
                raise ArgumentError(f"las innovaciones deben ser {shape}, se recibió {eps.shape}")
            return eps
        if rng is None:
            raise ArgumentError("se requiere rng o innovaciones explícitas")
        return noise_sd * rng.standard_normal(shape)

    def simulate_spvar(
        self,
        model: SpvarModel,
        T: int,
        burn_in: Optional[int] = None,
        noise_sd: Optional[float] = None,
        rng: Optional[np.random.Generator] = None,
        force: bool = False,
        innovations: Optional[np.ndarray] = None,
    ) -> SeriesPanel:
        """
        Simular y_t = Σ_k G_k x_t^{[k]} + ε_t desde valores iniciales nulos.

        Los predictores se actualizan en O(1) por paso con las mismas
        recursiones que ``loss_service.build_predictors``.

        Args:
            model: Modelo verdadero
            T: Observaciones devueltas
            burn_in: Pasos descartados al inicio
            noise_sd: Desviación típica de ε_t
            rng: Generador aleatorio
            force: Simular aunque falle la condición suficiente
            innovations: Innovaciones explícitas (burn_in + T)×N

        Returns:
            SeriesPanel con las últimas T filas
        """
        if T < 1:
            raise ArgumentError("T debe ser ≥ 1")
        burn_in = settings.BURN_IN if burn_in is None else burn_in
        noise_sd = settings.NOISE_SD if noise_sd is None else noise_sd
        if not force:
            try:
                ok, condition = model_service.stationarity_sufficient(model)
            except PreconditionError as exc:
                logger.error("simulacion_rechazada", detail=exc.detail)
                raise NonStationaryError(f"{exc.detail}; use force para simular igualmente") from exc
            if not ok:
                logger.error("simulacion_rechazada", lhs=condition.lhs)
                raise NonStationaryError(
                    f"condición suficiente de estacionariedad no satisfecha (lhs = {condition.lhs:.6g})"
                )

        N, p = model.N, model.orders.p
        n = burn_in + T
        eps = self._innovations((n, N), noise_sd, rng, innovations)
        Gcat = model.coefs.concat()
        lambdas = np.asarray(model.omega.lambdas, dtype=float)
        zs = np.asarray([g * np.exp(1j * th) for g, th in model.omega.etas], dtype=complex)
        u = np.zeros((lambdas.size, N))
        c = np.zeros((zs.size, N), dtype=complex)
        y = np.zeros((n, N))
        for i in range(n):
            parts = [y[i - k] if i >= k else np.zeros(N) for k in range(1, p + 1)]
            parts.extend(u)
            for state in c:
                parts.extend([state.real, state.imag])
            x = np.concatenate(parts) if parts else np.zeros(0)
            y[i] = Gcat @ x + eps[i]
            w = y[i - p] if i >= p else np.zeros(N)
            u = lambdas[:, None] * (u + w)
            c = zs[:, None] * (c + w)
        return SeriesPanel.from_array(y[burn_in:], names=model.names)

    # ------------------------------------------------------------------
    # VARMA(1,1)
    # ------------------------------------------------------------------

    @staticmethod
    def varma11_ar_coef(Phi: np.ndarray, Theta: np.ndarray, h: int) -> np.ndarray:
        """A_h(Φ, Θ) = Θ^{h−1}(Φ − Θ)."""
        if h < 1:
            raise ArgumentError(f"el rezago debe ser ≥ 1, se recibió {h}")
        A = Phi - Theta
        for _ in range(h - 1):
            A = Theta @ A
        return A

    @staticmethod
    def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
        """Matriz ortogonal n×n por QR de una gaussiana con diagonal de R positiva."""
        Q, R = np.linalg.qr(rng.standard_normal((n, n)))
        signs = np.sign(np.diag(R))
        signs[signs == 0] = 1.0
        return Q * signs

    def varma11_from_jordan(
        self,
        Phi: np.ndarray,
        omega: Omega,
        B0: Optional[np.ndarray] = None,
        rng: Optional[np.random.Generator] = None,
        b0_size: int = 3,
    ) -> Tuple[SpvarModel, np.ndarray]:
        """
        Construir Θ = BJB⁻¹ a partir de ω y el modelo SPVAR(∞) equivalente.

        J = diag{λ_1..λ_r, C_1..C_s, 0} con C_m = γ_m [[cos θ_m, sin θ_m],
        [−sin θ_m, cos θ_m]] y B = diag{B₀, I}. Con B̃₋ = B⁻¹(Φ − Θ):
        G_1 = Φ − Θ, G_{1+j} = b_j b̃_jᵀ y, para cada par (columnas b₁, b₂ y
        filas c₁, c₂ de B̃₋), bloque coseno b₁c₁ᵀ + b₂c₂ᵀ y bloque seno
        b₁c₂ᵀ − b₂c₁ᵀ.

        Args:
            Phi: Matriz AR N×N
            omega: Autovalores de Θ (reales distintos y pares complejos)
            B0: Bloque invertible superior de B; por defecto ortogonal aleatorio
            rng: Generador para B0 cuando no se da
            b0_size: Tamaño de B0 cuando se genera

        Returns:
            Tupla (modelo equivalente con p = 1, Θ)
        """
        Phi = np.asarray(Phi, dtype=float)
        N = Phi.shape[0]
        r, s = omega.r, omega.s
        m = r + 2 * s
        if Phi.shape != (N, N):
            raise ArgumentError("Φ debe ser cuadrada")
        if m > N:
            raise ArgumentError(f"r + 2s = {m} excede N = {N}")
        for lam in omega.lambdas:
            if not 0 < abs(lam) < 1:
                raise ArgumentError(f"λ = {lam} debe tener módulo en (0, 1)")
        if len(set(omega.lambdas)) != r:
            raise ArgumentError("los λ_j deben ser distintos")
        for gamma, theta in omega.etas:
            if not 0 < gamma < 1 or not 0 < theta < math.pi:
                raise ArgumentError(f"η = ({gamma}, {theta}) fuera de (0,1)×(0,π)")
        if len(set(omega.etas)) != s:
            raise ArgumentError("los η_m deben ser distintos")

        if B0 is None:
            if rng is None:
                raise ArgumentError("se requiere B0 o rng")
            B0 = self.random_orthogonal(max(b0_size, m), rng)
        B0 = np.asarray(B0, dtype=float)
        b = B0.shape[0]
        if B0.shape != (b, b) or b > N or b < m:
            raise ArgumentError(f"B0 debe ser cuadrada de tamaño entre {m} y {N}")
        B = block_diag(B0, np.eye(N - b)) if b < N else B0

        blocks = [np.array([[lam]]) for lam in omega.lambdas]
        for gamma, theta in omega.etas:
            cos, sin = math.cos(theta), math.sin(theta)
            blocks.append(gamma * np.array([[cos, sin], [-sin, cos]]))
        if N > m:
            blocks.append(np.zeros((N - m, N - m)))
        J = block_diag(*blocks)
        B_inv = np.linalg.inv(B)
        Theta = B @ J @ B_inv

        G1 = Phi - Theta
        tilde = B_inv @ G1
        mats = [G1]
        for j in range(r):
            mats.append(np.outer(B[:, j], tilde[j]))
        for q in range(s):
            a = r + 2 * q
            b1, b2 = B[:, a], B[:, a + 1]
            c1, c2 = tilde[a], tilde[a + 1]
            mats.append(np.outer(b1, c1) + np.outer(b2, c2))
            mats.append(np.outer(b1, c2) - np.outer(b2, c1))
        model = SpvarModel(
            orders=ModelOrders(p=1, r=r, s=s), omega=omega, coefs=CoefSet(N=N, mats=np.stack(mats))
        )
        return model, Theta

    def simulate_varma11(
        self,
        Phi: np.ndarray,
        Theta: np.ndarray,
        T: int,
        burn_in: Optional[int] = None,
        noise_sd: Optional[float] = None,
        rng: Optional[np.random.Generator] = None,
        innovations: Optional[np.ndarray] = None,
    ) -> SeriesPanel:
        """Recursión directa y_t = Φy_{t−1} + ε_t − Θε_{t−1} desde ceros."""
        if T < 1:
            raise ArgumentError("T debe ser ≥ 1")
        burn_in = settings.BURN_IN if burn_in is None else burn_in
        noise_sd = settings.NOISE_SD if noise_sd is None else noise_sd
        Phi = np.asarray(Phi, dtype=float)
        Theta = np.asarray(Theta, dtype=float)
        if model_service.spectral_radius(Phi) >= 1:
            raise ArgumentError("Φ no es estacionaria (radio espectral ≥ 1)")
        if model_service.spectral_radius(Theta) >= 1:
            raise ArgumentError("Θ no es invertible (radio espectral ≥ 1)")
        N = Phi.shape[0]
        n = burn_in + T
        eps = self._innovations((n, N), noise_sd, rng, innovations)
        y = np.zeros((n, N))
        for i in range(n):
            if i == 0:
                y[i] = eps[i]
            else:
                y[i] = Phi @ y[i - 1] + eps[i] - Theta @ eps[i - 1]
        return SeriesPanel.from_array(y[burn_in:])

    # ------------------------------------------------------------------
    # DGP predefinidos
    # ------------------------------------------------------------------

    @staticmethod
    def dgp1(N: int = 10, seed: int = 0) -> DgpSpec:
        """(p,r,s) = (1,1,0) con λ₁ = −0.6 y tres no nulos por fila."""
        return DgpSpec(
            name="dgp1", N=N, orders=ModelOrders(p=1, r=1, s=0), omega=Omega(lambdas=(-0.6,)), seed=seed
        )

    @staticmethod
    def dgp2(N: int = 10, seed: int = 0) -> DgpSpec:
        """(p,r,s) = (1,0,1) con η₁ = (0.6, π/4) y tres no nulos por fila."""
        return DgpSpec(
            name="dgp2", N=N, orders=ModelOrders(p=1, r=0, s=1),
            omega=Omega(etas=((0.6, math.pi / 4),)), seed=seed,
        )

    @staticmethod
    def selection_dgp(orders: ModelOrders, rho_bar: float, N: int = 40, seed: int = 0) -> DgpSpec:
        """
        DGP de selección de órdenes: λ₁ = −ρ̄, γ₁ = ρ̄, θ₁ = π/4 y 3N entradas
        no nulas por G_k sin restricción por fila.
        """
        if orders.r > 1 or orders.s > 1:
            raise ArgumentError("los DGP de selección usan r, s ≤ 1")
        omega = Omega(
            lambdas=(-rho_bar,) * orders.r,
            etas=((rho_bar, math.pi / 4),) * orders.s,
        )
        return DgpSpec(
            name=f"order{orders.p}{orders.r}{orders.s}", N=N, orders=orders, omega=omega,
            sparsity_mode=SparsityMode.TOTAL, total_nonzeros=3 * N, seed=seed,
        )

    def simulate_dgp(
        self, spec: DgpSpec, T: int, rng: Optional[np.random.Generator] = None
    ) -> Tuple[SpvarModel, SeriesPanel]:
        """
        Generar coeficientes y una trayectoria para ``spec``.

        Returns:
            Tupla (modelo verdadero, panel simulado)
        """
        rng = self.spawn_rng(spec.seed) if rng is None else rng
        coefs = self.gen_sparse_coefs(spec, rng)
        model = SpvarModel(orders=spec.orders, omega=spec.omega, coefs=coefs)
        panel = self.simulate_spvar(model, T, burn_in=spec.burn_in, noise_sd=spec.noise_sd, rng=rng)
        logger.debug("dgp_simulado", dgp=spec.name, N=spec.N, T=T)
        return model, panel


# Instancia del servicio
simulation_service = SimulationService()
