"""
Servicio de pérdida: predictores apilados, pérdida con inicialización en cero
y gradientes analíticos.

Con índices 0-based (fila i = y_{i+1}) y w_i = y_{i+1−p} (cero si i < p):

    bloque real j:   u_0 = 0,  u_{i+1} = λ_j (u_i + w_i)
    par complejo m:  c_0 = 0,  c_{i+1} = z_m (c_i + w_i),  z_m = γ_m e^{iθ_m}
                     Re(c) es el bloque coseno, Im(c) el bloque seno

Ambas recursiones son filtros IIR de primer orden y se evalúan con
``scipy.signal.lfilter``. Las derivadas siguen de derivar la recursión:

    ∂u_{i+1}/∂λ = (u_i + w_i) + λ ∂u_i/∂λ
    ∂c_{i+1}/∂z = (c_i + w_i) + z ∂c_i/∂z
    ∂c/∂γ = e^{iθ} ∂c/∂z,   ∂c/∂θ = i z ∂c/∂z

El gradiente en ω es −(2/T) Σ_t ⟨r_t, Σ_k G_k ∂x_t^{[k]}⟩ con r_t el residuo.
"""

import math
from typing import Optional, Union

import numpy as np
import structlog
from scipy.signal import lfilter

from spvar.config import settings
from spvar.errors import ArgumentError, ContractError
from spvar.models import CoefSet, ModelOrders, Omega, SeriesPanel, SpvarModel
from spvar.schemas.loss import PredictorPanel
from spvar.services.base_service import BaseService
from spvar.services.model_service import model_service

logger = structlog.get_logger(__name__)

ArrayLike = Union[SeriesPanel, np.ndarray]
Coefs = Union[CoefSet, np.ndarray]


def as_array(Y: ArrayLike) -> np.ndarray:
    """Datos T×N como arreglo float."""
    data = Y.data if isinstance(Y, SeriesPanel) else np.asarray(Y, dtype=float)
    return data.reshape(-1, 1) if data.ndim == 1 else data


def as_concat(G: Coefs) -> np.ndarray:
    """Matriz concatenada (G_1, ..., G_d) de forma M×(N·d)."""
    return G.concat() if isinstance(G, CoefSet) else np.asarray(G, dtype=float)


def _shift(x: np.ndarray) -> np.ndarray:
    # x_{i} -> x_{i-1}, con cero en la primera fila
    out = np.zeros_like(x)
    out[1:] = x[:-1]
    return out


class LossService(BaseService):
    """
    Servicio para la pérdida L̃_T(ω, g) y sus gradientes.
    """

    def __init__(self):
        super().__init__("loss")

    def build_predictors(
        self,
        Y: ArrayLike,
        orders: ModelOrders,
        omega: Omega,
        with_derivatives: bool = False,
        presample: int = 0,
    ) -> PredictorPanel:
        """
        Construir los predictores x_t^{[k]} = Σ_{h<t} ℓ_{h,k}(ω) y_{t−h}.

        Args:
            Y: Panel T×N
            orders: Órdenes (p, r, s)
            omega: Parámetros de decaimiento
            with_derivatives: Calcular también ∂x/∂ω
            presample: Filas iniciales que solo actúan como valores previos;
                el panel devuelto empieza en la fila ``presample``

        Returns:
            PredictorPanel con Z de forma (T − presample)×(N·d)
        """
        data = as_array(Y)
        T, N = data.shape
        p = orders.p
        if (omega.r, omega.s) != (orders.r, orders.s):
            raise ArgumentError(f"ω no coincide con los órdenes {orders}")
        if presample < 0 or presample > max(T - 1, 0):
            raise ArgumentError(f"presample debe estar en [0, T), se recibió {presample}")

        blocks = []
        for k in range(1, p + 1):
            block = np.zeros((T, N))
            if k < T:
                block[k:] = data[:T - k]
            blocks.append(block)

        w = np.zeros((T, N))
        if p < T:
            w[p:] = data[:T - p]

        d_lambda, d_gamma, d_theta = [], [], []
        for lam in omega.lambdas:
            u = _shift(lfilter([lam], [1.0, -lam], w, axis=0))
            blocks.append(u)
            if with_derivatives:
                d_lambda.append(_shift(lfilter([1.0], [1.0, -lam], u + w, axis=0)))
        for gamma, theta in omega.etas:
            rotation = np.exp(1j * theta)
            z = gamma * rotation
            c = _shift(lfilter([z], [1.0, -z], w.astype(complex), axis=0))
            blocks.extend([c.real.copy(), c.imag.copy()])
            if with_derivatives:
                dc = _shift(lfilter([1.0], [1.0, -z], c + w, axis=0))
                d_gamma.append(dc * rotation)
                d_theta.append(dc * 1j * z)

        Z = np.concatenate(blocks, axis=1) if blocks else np.zeros((T, 0))
        panel = PredictorPanel(Z=Z[presample:], orders=orders, omega=omega, N=N)
        if with_derivatives:
            panel = panel.model_copy(update={
                "d_lambda": [D[presample:] for D in d_lambda],
                "d_gamma": [D[presample:] for D in d_gamma],
                "d_theta": [D[presample:] for D in d_theta],
            })
        return panel

    def build_predictors_bruteforce(self, Y: ArrayLike, orders: ModelOrders, omega: Omega) -> PredictorPanel:
        """Evaluación directa O(T²·d) con ``weight``; sin derivadas."""
        data = as_array(Y)
        T, N = data.shape
        Z = np.zeros((T, N * orders.d))
        for i in range(T):
            for k in range(1, orders.d + 1):
                acc = np.zeros(N)
                for h in range(1, i + 1):
                    acc += model_service.weight(h, k, orders, omega) * data[i - h]
                Z[i, (k - 1) * N:k * N] = acc
        return PredictorPanel(Z=Z, orders=orders, omega=omega, N=N)

    def residual_matrix(self, Y: ArrayLike, panel: PredictorPanel, G: Coefs) -> np.ndarray:
        """r_t = y_t − G z_t para todas las filas (T×M)."""
        target = as_array(Y)
        Gcat = as_concat(G)
        if Gcat.shape != (target.shape[1], panel.Z.shape[1]):
            raise ArgumentError(
                f"G tiene forma {Gcat.shape}, se esperaba {(target.shape[1], panel.Z.shape[1])}"
            )
        return target - panel.Z @ Gcat.T

    def row_losses(self, Y: ArrayLike, panel: PredictorPanel, G: Coefs) -> np.ndarray:
        """
        Pérdidas por fila L_{i,T}; su suma es la pérdida conjunta.

        Con T > ``settings.COMPENSATED_SUM_MIN_T`` cada columna se acumula con
        ``math.fsum``.
        """
        R = self.residual_matrix(Y, panel, G)
        T = R.shape[0]
        squares = R ** 2
        if T > settings.COMPENSATED_SUM_MIN_T:
            return np.array([math.fsum(column) for column in squares.T]) / T
        return squares.sum(axis=0) / T

    def loss_value(self, Y: ArrayLike, panel: PredictorPanel, G: Coefs) -> float:
        """
        Pérdida (1/T) Σ_t ‖y_t − G z_t‖².

        Args:
            Y: Objetivo T×M (M = N para JE, 1 para una fila de RE)
            panel: Predictores construidos sobre el panel completo
            G: CoefSet o matriz concatenada M×(N·d)

        Returns:
            Valor de la pérdida
        """
        return float(self.row_losses(Y, panel, G).sum())

    def grad_g(self, Y: ArrayLike, panel: PredictorPanel, G: Coefs) -> np.ndarray:
        """Gradiente −(2/T) Σ_t r_t z_tᵀ en la matriz concatenada."""
        R = self.residual_matrix(Y, panel, G)
        return -(2.0 / R.shape[0]) * R.T @ panel.Z

    def grad_omega(self, Y: ArrayLike, panel: PredictorPanel, G: Coefs) -> np.ndarray:
        """
        Gradiente en ω con el orden (λ_1..λ_r, γ_1, θ_1, ..., γ_s, θ_s).

        Raises:
            ContractError: Si el panel no tiene derivadas
        """
        if not panel.has_derivatives:
            raise ContractError("grad_omega requiere predictores construidos con with_derivatives=True")
        R = self.residual_matrix(Y, panel, G)
        Gcat = as_concat(G)
        N, T = panel.N, R.shape[0]
        p, r = panel.orders.p, panel.orders.r
        scale = -2.0 / T

        def block(k: int) -> np.ndarray:
            return Gcat[:, k * N:(k + 1) * N]

        grad = []
        for j, V in enumerate(panel.d_lambda):
            grad.append(scale * float(np.sum(R * (V @ block(p + j).T))))
        for m in range(panel.orders.s):
            Gc, Gs = block(p + r + 2 * m), block(p + r + 2 * m + 1)
            for D in (panel.d_gamma[m], panel.d_theta[m]):
                grad.append(scale * float(np.sum(R * (D.real @ Gc.T + D.imag @ Gs.T))))
        return np.asarray(grad, dtype=float)

    def residuals(self, model: SpvarModel, Y: ArrayLike) -> np.ndarray:
        """Residuos ε̂_t = y_t − Σ_{h<t} Â_h y_{t−h} (T×N)."""
        panel = self.build_predictors(Y, model.orders, model.omega)
        return self.residual_matrix(Y, panel, model.coefs)

    def lipschitz_estimate(self, Z: np.ndarray, iterations: Optional[int] = None) -> float:
        """
        Constante L̂ = 2σ_max(Z)²/T por iteración de potencia.

        Returns:
            L̂ (0 cuando Z es nulo o vacío)
        """
        iterations = settings.POWER_ITERATIONS if iterations is None else iterations
        T, n = Z.shape
        if n == 0 or T == 0:
            return 0.0
        v = np.full(n, 1.0 / np.sqrt(n))
        sigma2 = 0.0
        for _ in range(iterations):
            w = Z.T @ (Z @ v)
            size = np.linalg.norm(w)
            if size == 0:
                return 0.0
            v = w / size
            sigma2 = float(np.linalg.norm(Z @ v) ** 2)
        return 2.0 * sigma2 / T


# Instancia del servicio
loss_service = LossService()
