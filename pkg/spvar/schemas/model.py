from pydantic import BaseModel, Field, field_validator
from typing import List, Optional, Tuple


class OrdersDocument(BaseModel):
    """Órdenes en el documento JSON del modelo."""
    p: int = Field(..., ge=0)
    r: int = Field(..., ge=0)
    s: int = Field(..., ge=0)


class OmegaDocument(BaseModel):
    """ω en el documento JSON del modelo."""
    lambdas: List[float] = []
    etas: List[Tuple[float, float]] = []


class ModelDocument(BaseModel):
    """
    Esquema de serialización del modelo.

    ``G`` contiene d matrices N×N en orden de filas.
    """
    orders: OrdersDocument
    omega: OmegaDocument
    G: List[List[List[float]]]
    N: int = Field(..., gt=0)
    names: List[str] = []

    @field_validator("G")
    @classmethod
    def matrices_cuadradas(cls, v):
        for k, mat in enumerate(v):
            if any(len(row) != len(mat) for row in mat):
                raise ValueError(f"G[{k}] no es cuadrada")
        return v


class SufficientCondition(BaseModel):
    """Evaluación de la condición suficiente de estacionariedad."""
    ok: bool
    lhs: float
    rho_companion: float
    rho_bar: float
    ma_radius_sum: float


class StationarityReport(BaseModel):
    """Diagnóstico de estacionariedad suficiente y numérico."""
    sufficient_ok: Optional[bool] = None
    lhs: Optional[float] = None
    rho_companion: float = 0.0
    partial_sums: List[float] = []
    numerical_ok: bool = False
    J_used: int = 0
    diverged: bool = False
