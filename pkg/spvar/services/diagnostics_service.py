"""
Servicio de diagnósticos: red de causalidad de Granger, respuestas al impulso
y covarianza umbralizada de los residuos.
"""

import math
from typing import Optional, Sequence

import numpy as np
import structlog

from spvar.config import settings
from spvar.errors import ArgumentError
from spvar.models import EdgeKind, SpvarModel
from spvar.schemas.diagnostics import GrangerEdge, GrangerNetwork
from spvar.services.base_service import BaseService
from spvar.services.loss_service import loss_service
from spvar.services.model_service import model_service

logger = structlog.get_logger(__name__)

_DOT_STYLES = {
    EdgeKind.SHORT_ONLY: "dashed",
    EdgeKind.LONG_ONLY: "dotted",
    EdgeKind.BOTH: "solid",
}


class DiagnosticsService(BaseService):
    """
    Servicio para interpretar un modelo ajustado.
    """

    def __init__(self):
        super().__init__("diagnostics")

    def granger_network(self, model: SpvarModel, zero_tol: Optional[float] = None) -> GrangerNetwork:
        """
        Red de Granger: arista j → i si |g_{i,j,k}| > zero_tol para algún k.

        La clase de la arista es ``short`` si solo hay soporte en k ≤ p,
        ``long`` si solo en k > p y ``both`` en otro caso.

        Args:
            model: Modelo ajustado
            zero_tol: Tolerancia para considerar una entrada nula

        Returns:
            GrangerNetwork sin autoaristas
        """
        zero_tol = settings.ZERO_TOL if zero_tol is None else zero_tol
        if zero_tol < 0:
            raise ArgumentError("zero_tol debe ser ≥ 0")
        mats = model.coefs.mats
        p, N = model.orders.p, model.N
        support = np.abs(mats) > zero_tol
        edges = []
        for i in range(N):
            for j in range(N):
                if i == j:
                    continue
                ks = np.flatnonzero(support[:, i, j])
                if ks.size == 0:
                    continue
                short, long_ = bool(np.any(ks < p)), bool(np.any(ks >= p))
                kind = EdgeKind.BOTH if short and long_ else (EdgeKind.SHORT_ONLY if short else EdgeKind.LONG_ONLY)
                edges.append(GrangerEdge(
                    source=j, target=i, kind=kind,
                    magnitude=float(np.max(np.abs(mats[:, i, j]))),
                    support=[int(k) + 1 for k in ks],
                ))
        return GrangerNetwork(N=N, p=p, threshold=zero_tol, edges=edges)

    def impulse_responses(self, model: SpvarModel, J: int) -> np.ndarray:
        """Ψ_1..Ψ_J de la forma VMA(∞) (J×N×N)."""
        return model_service.vma_coeffs(model, J)

    @staticmethod
    def threshold_covariance(cov: np.ndarray, lambda_eps: float) -> np.ndarray:
        """Umbralización dura de las entradas fuera de la diagonal."""
        if lambda_eps < 0:
            raise ArgumentError("lambda_eps debe ser ≥ 0")
        out = np.where(np.abs(cov) > lambda_eps, cov, 0.0)
        np.fill_diagonal(out, np.diag(cov))
        return out

    def sigma_eps_estimate(self, model: SpvarModel, Y, lambda_eps: Optional[float] = None) -> np.ndarray:
        """
        Σ̂_ε = THR_{λ_ε}(T⁻¹ Σ_t ε̂_t ε̂_tᵀ).

        Args:
            model: Modelo ajustado
            Y: Panel usado para los residuos
            lambda_eps: Umbral; por defecto la regla práctica

        Returns:
            Matriz N×N simétrica
        """
        resid = loss_service.residuals(model, Y)
        T, N = resid.shape
        cov = resid.T @ resid / T
        cov = (cov + cov.T) / 2
        if lambda_eps is None:
            lambda_eps = self.lambda_eps_rule_of_thumb(cov, N, T)
            logger.debug("lambda_eps_regla", lambda_eps=lambda_eps)
        return self.threshold_covariance(cov, lambda_eps)

    @staticmethod
    def lambda_eps_rule_of_thumb(residual_cov: np.ndarray, N: int, T: int) -> float:
        """2·√(log N / T)·max diag(Σ)."""
        if N < 2:
            return 0.0
        return 2.0 * math.sqrt(math.log(N) / T) * float(np.max(np.diag(residual_cov)))

    def to_dot(self, network: GrangerNetwork, names: Optional[Sequence[str]] = None) -> str:
        """Grafo dirigido en formato DOT con el atributo kind por arista."""
        names = list(names) if names is not None else [f"y{i + 1}" for i in range(network.N)]
        lines = ["digraph granger {"]
        for name in names:
            lines.append(f'  "{name}";')
        for edge in network.edges:
            lines.append(
                f'  "{names[edge.source]}" -> "{names[edge.target]}" '
                f'[kind={edge.kind.value}, style={_DOT_STYLES[edge.kind]}, weight="{edge.magnitude:.6g}"];'
            )
        lines.append("}")
        return "\n".join(lines) + "\n"


# Instancia del servicio
diagnostics_service = DiagnosticsService()
