"""
Servicio del modelo SPVAR(∞).

Contiene la parametrización A_h = Σ_k ℓ_{h,k}(ω) G_k, los coeficientes de la
representación VMA(∞), los diagnósticos de estacionariedad y la forma
canónica del modelo.

Pesos ℓ_{h,k}(ω) para k = 1..d:
    k ≤ p:               1{h = k}
    k = p + j:           1{h ≥ p+1} λ_j^{h−p}
    k = p + r + 2m − 1:  1{h ≥ p+1} γ_m^{h−p} cos{(h−p) θ_m}
    k = p + r + 2m:      1{h ≥ p+1} γ_m^{h−p} sin{(h−p) θ_m}
"""

import math
from typing import List, Optional, Tuple

import numpy as np
import structlog

from spvar.config import settings
from spvar.errors import ArgumentError, PreconditionError
from spvar.models import CoefSet, ModelOrders, Omega, SpvarModel
from spvar.schemas.model import (
    ModelDocument, OmegaDocument, OrdersDocument, StationarityReport, SufficientCondition
)
from spvar.services.base_service import BaseService

logger = structlog.get_logger(__name__)

_NORMS = {"fro": "fro", "spectral": 2, "l1": 1, "linf": np.inf}
_OVERFLOW = 1e300


class ModelService(BaseService):
    """
    Servicio para operaciones sobre la parametrización del modelo.
    """

    def __init__(self):
        super().__init__("model")

    def weight(self, h: int, k: int, orders: ModelOrders, omega: Omega) -> float:
        """
        Peso escalar ℓ_{h,k}(ω).

        Args:
            h: Rezago (≥ 1)
            k: Índice de la matriz G_k (1..d)
            orders: Órdenes (p, r, s)
            omega: Parámetros de decaimiento

        Returns:
            Valor del peso
        """
        if h < 1 or not 1 <= k <= orders.d:
            raise ArgumentError(f"índice fuera de rango: h={h}, k={k}, d={orders.d}")
        p, r = orders.p, orders.r
        if k <= p:
            return 1.0 if h == k else 0.0
        if h < p + 1:
            return 0.0
        e = h - p
        if k <= p + r:
            return omega.lambdas[k - p - 1] ** e
        m, sine = divmod(k - p - r - 1, 2)
        gamma, theta = omega.etas[m]
        trig = math.sin(e * theta) if sine else math.cos(e * theta)
        return gamma ** e * trig

    def weight_rows(self, lags: np.ndarray, orders: ModelOrders, omega: Omega) -> np.ndarray:
        """Filas de L(ω) para los rezagos dados (len(lags) × d)."""
        lags = np.atleast_1d(np.asarray(lags, dtype=int))
        p, r = orders.p, orders.r
        W = np.zeros((lags.size, orders.d))
        for k in range(p):
            W[:, k] = lags == k + 1
        tail = lags >= p + 1
        e = np.where(tail, lags - p, 0)
        for j, lam in enumerate(omega.lambdas):
            W[:, p + j] = np.where(tail, np.power(lam, e), 0.0)
        for m, (gamma, theta) in enumerate(omega.etas):
            decay = np.where(tail, np.power(gamma, e), 0.0)
            W[:, p + r + 2 * m] = decay * np.cos(e * theta)
            W[:, p + r + 2 * m + 1] = decay * np.sin(e * theta)
        return W

    def weight_matrix(self, H: int, orders: ModelOrders, omega: Omega) -> np.ndarray:
        """Truncamiento H×d de L(ω) (filas h = 1..H)."""
        return self.weight_rows(np.arange(1, H + 1), orders, omega)

    @staticmethod
    def canonical_order(orders: ModelOrders, omega: Omega) -> List[int]:
        """Columnas 0-based de G en orden canónico (λ descendente, θ ascendente)."""
        p, r = orders.p, orders.r
        order = list(range(p))
        order += [p + j for j in sorted(range(r), key=lambda j: -omega.lambdas[j])]
        for m in sorted(range(orders.s), key=lambda m: omega.etas[m][1]):
            order += [p + r + 2 * m, p + r + 2 * m + 1]
        return order

    def _combine(self, W: np.ndarray, model: SpvarModel) -> np.ndarray:
        # Suma en orden canónico: modelos equivalentes por permutación dan
        # exactamente el mismo resultado.
        order = self.canonical_order(model.orders, model.omega)
        N = model.N
        if not order:
            return np.zeros((W.shape[0], N, N))
        return np.tensordot(W[:, order], model.coefs.mats[order], axes=(1, 0))

    def lag_matrices(self, model: SpvarModel, H: int) -> np.ndarray:
        """A_1..A_H como arreglo H×N×N."""
        return self._combine(self.weight_matrix(H, model.orders, model.omega), model)

    def coef_matrix(self, h: int, model: SpvarModel) -> np.ndarray:
        """
        Matriz de rezago A_h = Σ_k ℓ_{h,k}(ω) G_k.

        Args:
            h: Rezago (≥ 1)
            model: Modelo SPVAR(∞)

        Returns:
            Matriz N×N
        """
        if h < 1:
            raise ArgumentError(f"el rezago debe ser ≥ 1, se recibió {h}")
        return self._combine(self.weight_rows(np.array([h]), model.orders, model.omega), model)[0]

    def vma_coeffs(self, model: SpvarModel, J: int) -> np.ndarray:
        """
        Coeficientes Ψ_1..Ψ_J de la forma VMA(∞).

        Usa la recursión Ψ_j = Σ_{h=1}^{j} A_h Ψ_{j−h} con Ψ_0 = I.

        Returns:
            Arreglo J×N×N
        """
        if J < 1:
            raise ArgumentError(f"J debe ser ≥ 1, se recibió {J}")
        A = self.lag_matrices(model, J)
        Psi = np.zeros((J + 1, model.N, model.N))
        Psi[0] = np.eye(model.N)
        for j in range(1, J + 1):
            Psi[j] = np.matmul(A[:j], Psi[j - 1::-1]).sum(axis=0)
        return Psi[1:]

    @staticmethod
    def companion_matrix(ar_mats: np.ndarray) -> np.ndarray:
        """Matriz compañera Np×Np de G_1..G_p."""
        p = ar_mats.shape[0]
        if p == 0:
            return np.zeros((0, 0))
        N = ar_mats.shape[1]
        C = np.zeros((N * p, N * p))
        C[:N, :] = np.concatenate(list(ar_mats), axis=1)
        if p > 1:
            C[N:, :-N] = np.eye(N * (p - 1))
        return C

    @staticmethod
    def spectral_radius(M: np.ndarray) -> float:
        """Máximo módulo de los autovalores (0 para matrices vacías)."""
        if M.size == 0:
            return 0.0
        return float(np.max(np.abs(np.linalg.eigvals(M))))

    def stationarity_sufficient(
        self, model: SpvarModel, rho_bar: Optional[float] = None
    ) -> Tuple[bool, SufficientCondition]:
        """
        Condición suficiente ρ(Ḡ₁) + ρ̄/(1−ρ̄) Σ_k ρ(G_{p+k}) < 1.

        Args:
            model: Modelo a verificar
            rho_bar: Cota ρ̄ ∈ (0,1); por defecto max{|λ_j|, γ_m}

        Returns:
            Tupla (cumple, detalle de la evaluación)
        """
        decay = model.omega.rho_bar
        if rho_bar is None:
            rho_bar = decay
            if rho_bar >= 1:
                raise PreconditionError(f"max{{|λ_j|, γ_m}} = {rho_bar} no es menor que 1")
        else:
            if not 0 < rho_bar < 1:
                raise ArgumentError(f"rho_bar debe estar en (0,1), se recibió {rho_bar}")
            for j, lam in enumerate(model.omega.lambdas, start=1):
                if abs(lam) > rho_bar:
                    raise PreconditionError(f"|λ_{j}| = {abs(lam)} excede rho_bar = {rho_bar}")
            for m, (gamma, _) in enumerate(model.omega.etas, start=1):
                if gamma > rho_bar:
                    raise PreconditionError(f"γ_{m} = {gamma} excede rho_bar = {rho_bar}")
        p = model.orders.p
        mats = model.coefs.mats
        rho_companion = self.spectral_radius(self.companion_matrix(mats[:p]))
        ma_sum = float(sum(self.spectral_radius(G) for G in mats[p:]))
        lhs = rho_companion
        if model.orders.r + model.orders.s > 0:
            lhs += rho_bar / (1 - rho_bar) * ma_sum
        condition = SufficientCondition(
            ok=lhs < 1, lhs=lhs, rho_companion=rho_companion, rho_bar=rho_bar, ma_radius_sum=ma_sum
        )
        return condition.ok, condition

    def stationarity_numerical(
        self,
        model: SpvarModel,
        J_max: Optional[int] = None,
        tail_window: Optional[int] = None,
        tol: Optional[float] = None,
        norm: str = "fro",
    ) -> StationarityReport:
        """
        Verificación numérica: convergencia de S_J = Σ_{j≤J} ‖Ψ_j‖.

        Se declara convergente cuando los últimos ``tail_window`` incrementos
        son menores que ``tol``. Un desbordamiento devuelve numerical_ok = False
        con el J en que se detectó.
        """
        J_max = settings.VMA_J_MAX if J_max is None else J_max
        tail_window = settings.VMA_TAIL_WINDOW if tail_window is None else tail_window
        tol = settings.VMA_TOL if tol is None else tol
        if not J_max >= tail_window >= 1:
            raise ArgumentError("se requiere J_max ≥ tail_window ≥ 1")
        if tol <= 0:
            raise ArgumentError("tol debe ser positivo")
        if norm not in _NORMS:
            raise ArgumentError(f"norma desconocida: {norm}")

        A = self.lag_matrices(model, J_max)
        N = model.N
        Psi = np.zeros((J_max + 1, N, N))
        Psi[0] = np.eye(N)
        partial_sums: List[float] = []
        increments: List[float] = []
        total = 0.0
        report = StationarityReport(rho_companion=self.spectral_radius(
            self.companion_matrix(model.coefs.mats[:model.orders.p])
        ))
        with np.errstate(over="ignore", invalid="ignore"):
            for j in range(1, J_max + 1):
                Psi[j] = np.matmul(A[:j], Psi[j - 1::-1]).sum(axis=0)
                size = float(np.linalg.norm(Psi[j], ord=_NORMS[norm]))
                if not math.isfinite(size) or size > _OVERFLOW:
                    logger.warning("vma_divergente", J=j)
                    return report.model_copy(update={
                        "partial_sums": partial_sums, "numerical_ok": False, "J_used": j, "diverged": True,
                    })
                total += size
                partial_sums.append(total)
                increments.append(size)
                if j >= tail_window and all(x < tol for x in increments[-tail_window:]):
                    return report.model_copy(update={
                        "partial_sums": partial_sums, "numerical_ok": True, "J_used": j,
                    })
        return report.model_copy(update={"partial_sums": partial_sums, "J_used": J_max})

    def stationarity_report(self, model: SpvarModel, rho_bar: Optional[float] = None, **kwargs) -> StationarityReport:
        """Combina la condición suficiente y la verificación numérica."""
        report = self.stationarity_numerical(model, **kwargs)
        try:
            ok, condition = self.stationarity_sufficient(model, rho_bar)
        except PreconditionError as exc:
            logger.warning("condicion_suficiente_no_evaluable", detail=exc.detail)
            return report
        return report.model_copy(update={"sufficient_ok": ok, "lhs": condition.lhs})

    def canonicalize(self, model: SpvarModel) -> SpvarModel:
        """
        Forma canónica: λ_j descendente, η_m por θ ascendente, G permutadas
        de forma consistente.
        """
        order = self.canonical_order(model.orders, model.omega)
        coefs = CoefSet(N=model.N, mats=model.coefs.mats[order])
        return model.model_copy(update={"omega": self.canonical_omega(model.omega), "coefs": coefs})

    @staticmethod
    def canonical_omega(omega: Omega) -> Omega:
        """ω con λ_j descendente y η_m por θ ascendente."""
        lambdas = tuple(sorted(omega.lambdas, key=lambda lam: -lam))
        etas = tuple(sorted(omega.etas, key=lambda eta: eta[1]))
        return Omega(lambdas=lambdas, etas=etas)

    def to_document(self, model: SpvarModel, names: Optional[List[str]] = None) -> ModelDocument:
        """Serializar el modelo al esquema JSON."""
        if names is None:
            names = list(model.names) if model.names else [f"y{i + 1}" for i in range(model.N)]
        return ModelDocument(
            orders=OrdersDocument(p=model.orders.p, r=model.orders.r, s=model.orders.s),
            omega=OmegaDocument(lambdas=list(model.omega.lambdas), etas=[list(e) for e in model.omega.etas]),
            G=model.coefs.mats.tolist(),
            N=model.N,
            names=list(names),
        )

    def from_document(self, document: ModelDocument) -> SpvarModel:
        """Reconstruir el modelo desde el esquema JSON."""
        orders = ModelOrders(p=document.orders.p, r=document.orders.r, s=document.orders.s)
        omega = Omega(
            lambdas=tuple(document.omega.lambdas),
            etas=tuple(tuple(e) for e in document.omega.etas),
        )
        mats = np.array(document.G, dtype=float).reshape(len(document.G), document.N, document.N)
        names = tuple(document.names) if document.names else None
        try:
            return SpvarModel(orders=orders, omega=omega, coefs=CoefSet(N=document.N, mats=mats), names=names)
        except ValueError as exc:
            raise ArgumentError(f"documento de modelo inválido: {exc}") from exc


# Instancia del servicio
model_service = ModelService()
