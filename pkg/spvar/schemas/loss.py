import numpy as np
from typing import List, Optional

from spvar.models import ModelOrders, Omega
from spvar.schemas.common import ArrayModel


class PredictorPanel(ArrayModel):
    """
    Predictores apilados Z (T×N·d) y, opcionalmente, sus derivadas en ω.

    ``d_lambda[j]`` es ∂x^{[p+j]}/∂λ_j (T×N). Para cada par m, ``d_gamma[m]`` y
    ``d_theta[m]`` son complejos T×N: la parte real corresponde al bloque
    coseno y la imaginaria al bloque seno.
    """
    Z: np.ndarray
    orders: ModelOrders
    omega: Omega
    N: int
    d_lambda: Optional[List[np.ndarray]] = None
    d_gamma: Optional[List[np.ndarray]] = None
    d_theta: Optional[List[np.ndarray]] = None

    @property
    def has_derivatives(self) -> bool:
        return self.d_lambda is not None
