from . import experiment, fit, forecast, granger, irf, selection, simulate

# Orden de los subcomandos en la ayuda
COMMANDS = [simulate, fit, selection, forecast, granger, irf, experiment]

__all__ = [
    "COMMANDS",
    "simulate",
    "fit",
    "selection",
    "forecast",
    "granger",
    "irf",
    "experiment",
]
