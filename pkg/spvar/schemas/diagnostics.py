from pydantic import BaseModel, Field
from typing import List

from spvar.models import EdgeKind


class GrangerEdge(BaseModel):
    """Arista j → i de la red de causalidad de Granger."""
    source: int = Field(..., ge=0)
    target: int = Field(..., ge=0)
    kind: EdgeKind
    magnitude: float
    support: List[int] = []


class GrangerNetwork(BaseModel):
    """Red de Granger con clasificación temporal de cada arista."""
    N: int
    p: int
    threshold: float
    edges: List[GrangerEdge] = []
