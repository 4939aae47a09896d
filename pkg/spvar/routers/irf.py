import argparse

import structlog

from spvar.config import settings
from spvar.routers.common import CommandContext, add_shared_flags
from spvar.services.diagnostics_service import diagnostics_service
from spvar.services.io_service import io_service
from spvar.services.model_service import model_service

logger = structlog.get_logger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("irf", help="Respuestas al impulso Ψ_j de un modelo ajustado")
    parser.add_argument("model", help="Modelo JSON")
    parser.add_argument("--horizon", type=int, default=None, help="Número de matrices Ψ_j")
    parser.add_argument(
        "--check-stationarity", dest="check_stationarity", action="store_true",
        help="Imprimir el diagnóstico de estacionariedad",
    )
    add_shared_flags(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    """Escribir ``irf.csv`` en formato largo (j, row, col, value)."""
    ctx = CommandContext(args)
    model = io_service.load_model(args.model)
    J = int(ctx.pick("horizon", 20))
    psi = diagnostics_service.impulse_responses(model, J)
    path = io_service.save_frame(io_service.irf_frame(psi), ctx.output("irf.csv"))
    logger.info("irf_escrita", path=str(path), J=J)
    if args.check_stationarity:
        report = model_service.stationarity_report(model, J_max=max(J, settings.VMA_J_MAX))
        print(
            f"sufficient_ok={report.sufficient_ok} lhs={report.lhs} numerical_ok={report.numerical_ok} "
            f"J_used={report.J_used} diverged={report.diverged}"
        )
    return 0
