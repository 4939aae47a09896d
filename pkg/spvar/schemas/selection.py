from pydantic import BaseModel
from typing import List, Optional

from spvar.models import ModelOrders


class BicRow(BaseModel):
    """Una celda de la rejilla de órdenes."""
    orders: ModelOrders
    lambda_g_used: Optional[float] = None
    loss: Optional[float] = None
    bic: Optional[float] = None
    converged: bool = False
    nnz: Optional[int] = None
    error: Optional[str] = None


class BicTable(BaseModel):
    """Tabla BIC completa con el índice de la celda elegida."""
    rows: List[BicRow]
    chosen: int
    tau: float
    q: float

    @property
    def chosen_orders(self) -> ModelOrders:
        return self.rows[self.chosen].orders


class LambdaPathPoint(BaseModel):
    """Un punto de la trayectoria de λ_g."""
    lambda_g: float
    loss: float
    nnz: int
    score: float
    converged: bool
