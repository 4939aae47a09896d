from pydantic import BaseModel, ConfigDict
from typing import Generic, TypeVar, Optional

T = TypeVar('T')


class ArrayModel(BaseModel):
    """Base para esquemas que transportan arreglos numpy."""

    model_config = ConfigDict(arbitrary_types_allowed=True)


class Outcome(BaseModel, Generic[T]):
    """Resultado indexado de una unidad de trabajo (arranque, fila, celda o paso)."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    index: int
    value: Optional[T] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None and self.value is not None
