"""
Servicio base con la infraestructura común.

Este módulo proporciona una clase base con el contrato de mapeo paralelo y
la derivación determinista de generadores aleatorios que reutilizan los
demás servicios.
"""

from functools import partial
from typing import Any, Callable, Iterable, List, Optional, Tuple, TypeVar

import numpy as np
import structlog
from joblib import Parallel, delayed

from spvar.config import settings
from spvar.errors import SpvarError
from spvar.schemas.common import Outcome

ItemType = TypeVar("ItemType")
ResultType = TypeVar("ResultType")

logger = structlog.get_logger(__name__)

# Fallos de una unidad que se reportan por índice; el resto se propaga
RECOVERABLE = (SpvarError, FloatingPointError, np.linalg.LinAlgError)


def _guarded(func: Callable[..., Any], pair: Tuple[int, Any]) -> Outcome:
    index, item = pair
    try:
        return Outcome(index=index, value=func(item))
    except RECOVERABLE as exc:
        return Outcome(index=index, error=f"{type(exc).__name__}: {exc}")


class BaseService:
    """
    Clase base para servicios de cómputo.

    Proporciona el mapeo paralelo con recolección ordenada por índice y la
    semilla por unidad de trabajo.
    """

    def __init__(self, name: str):
        """
        Inicializar el servicio base.

        Args:
            name: Nombre del servicio para los eventos de log
        """
        self.name = name

    def resolve_jobs(self, n_jobs: Optional[int]) -> int:
        """Número de trabajadores; por defecto ``settings.THREADS``."""
        return max(1, int(n_jobs if n_jobs is not None else settings.THREADS))

    def parallel_map(
        self,
        func: Callable[[ItemType], ResultType],
        items: Iterable[ItemType],
        *,
        n_jobs: Optional[int] = None,
    ) -> List[ResultType]:
        """
        Aplicar ``func`` a cada elemento y devolver los resultados en orden.

        Args:
            func: Función pura de un elemento
            items: Elementos independientes
            n_jobs: Trabajadores (1 ejecuta en el proceso actual)

        Returns:
            Lista de resultados en el orden de ``items``
        """
        items = list(items)
        jobs = self.resolve_jobs(n_jobs)
        if jobs == 1 or len(items) <= 1:
            return [func(item) for item in items]
        return list(Parallel(n_jobs=min(jobs, len(items)))(delayed(func)(item) for item in items))

    def guarded_map(
        self,
        func: Callable[[ItemType], ResultType],
        items: Iterable[ItemType],
        *,
        n_jobs: Optional[int] = None,
    ) -> List[Outcome]:
        """
        Como ``parallel_map`` pero captura los fallos numéricos o de dominio
        (``RECOVERABLE``) de cada unidad; cualquier otra excepción se propaga.

        Returns:
            Lista de ``Outcome`` con el valor o el mensaje de error, por índice
        """
        outcomes = self.parallel_map(partial(_guarded, func), enumerate(items), n_jobs=n_jobs)
        for outcome in outcomes:
            if not outcome.ok:
                logger.warning("unidad_fallida", service=self.name, index=outcome.index, error=outcome.error)
        return sorted(outcomes, key=lambda o: o.index)

    @staticmethod
    def spawn_rng(seed: int, index: int = 0) -> np.random.Generator:
        """Generador propio de la unidad ``index`` (semilla = base + índice)."""
        return np.random.default_rng(int(seed) + int(index))
