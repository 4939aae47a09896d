"""
Excepciones de la librería.

Cada error lleva un ``detail`` legible y el ``exit_code`` que la CLI devuelve
cuando el error llega al manejador global de ``spvar.main``.
"""

from typing import Optional


class SpvarError(Exception):
    """Error base con detalle y código de salida."""

    exit_code: int = 1

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class ArgumentError(SpvarError, ValueError):
    """Argumento fuera de rango o inconsistente."""

    exit_code = 64


class PreconditionError(SpvarError):
    """Precondición verificada que no se cumple."""

    exit_code = 65


class NonStationaryError(PreconditionError):
    """El modelo no satisface la condición suficiente de estacionariedad."""


class ParseError(SpvarError):
    """Archivo de entrada mal formado (CSV o configuración)."""

    exit_code = 65


class ContractError(SpvarError):
    """Uso incorrecto de una operación interna (p. ej. faltan derivadas)."""

    exit_code = 70


class FitError(SpvarError):
    """Todos los arranques (o alguna fila completa) fallaron."""

    exit_code = 70


class SelectionError(SpvarError):
    """Ninguna celda de la rejilla de órdenes pudo ajustarse."""

    exit_code = 70
