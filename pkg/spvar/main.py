import argparse
import logging
import sys
from typing import List, Optional

import structlog
from pydantic import ValidationError

from spvar import __version__
from spvar.config import settings
from spvar.errors import ArgumentError, SpvarError
from spvar.routers import COMMANDS

logger = structlog.get_logger(__name__)

EXIT_VALIDATION = 64
EXIT_UNEXPECTED = 1


def configure_logging(level: Optional[str] = None, fmt: Optional[str] = None) -> None:
    """
    Configurar structlog sobre el logger raíz de la librería estándar.

    Args:
        level: Nivel de log (por defecto settings.LOG_LEVEL)
        fmt: ``console`` o ``json`` (por defecto settings.LOG_FORMAT)
    """
    level = (level or settings.LOG_LEVEL).upper()
    fmt = fmt or settings.LOG_FORMAT
    shared = [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.add_log_level,
        structlog.stdlib.add_logger_name,
        structlog.processors.TimeStamper(fmt="iso"),
    ]
    if fmt == "json":
        final = [structlog.processors.format_exc_info, structlog.processors.JSONRenderer()]
    else:
        final = [structlog.dev.ConsoleRenderer(colors=False)]
    structlog.configure(
        processors=shared + [structlog.stdlib.ProcessorFormatter.wrap_for_formatter],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )
    formatter = structlog.stdlib.ProcessorFormatter(
        foreign_pre_chain=shared,
        processors=[structlog.stdlib.ProcessorFormatter.remove_processors_meta, *final],
    )
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(formatter)
    root = logging.getLogger()
    root.handlers = [handler]
    root.setLevel(level)


class CliParser(argparse.ArgumentParser):
    """Los errores de uso se convierten en ArgumentError (código 64)."""

    def error(self, message: str):
        raise ArgumentError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(
        prog="spvar",
        description="Modelos VAR(∞) paramétricos dispersos: simulación, ajuste, selección y pronóstico",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", dest="log_level", default=None)
    parser.add_argument("--log-format", dest="log_format", choices=["console", "json"], default=None)
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Punto de entrada y manejador global de errores.

    Returns:
        Código de salida: 0 éxito, 2 ajuste sin convergencia, 64/65/70 según
        el error de la librería, 1 para errores no controlados
    """
    configure_logging()
    try:
        args = build_parser().parse_args(argv)
        if args.log_level or args.log_format:
            configure_logging(args.log_level, args.log_format)
        return int(args.handler(args))
    except SpvarError as exc:
        logger.error("error", kind=type(exc).__name__, detail=exc.detail, exit_code=exc.exit_code)
        return exc.exit_code
    except ValidationError as exc:
        logger.error("validacion_fallida", detail=str(exc))
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - manejador global
        logger.exception("error_no_controlado", error=str(exc))
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
