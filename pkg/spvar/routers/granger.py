import argparse

import pandas as pd
import structlog

from spvar.routers.common import CommandContext, add_shared_flags
from spvar.services.diagnostics_service import diagnostics_service
from spvar.services.io_service import io_service

logger = structlog.get_logger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("granger", help="Red de causalidad de Granger de un modelo ajustado")
    parser.add_argument("model", help="Modelo JSON")
    parser.add_argument("--zero-tol", dest="zero_tol", type=float, default=None)
    parser.add_argument("--data", default=None, help="CSV para la covarianza umbralizada de los residuos")
    parser.add_argument(
        "--standardize", action="store_const", const=True, default=None,
        help="Estandarizar el CSV de --data",
    )
    parser.add_argument("--lambda-eps", dest="lambda_eps", type=float, default=None)
    add_shared_flags(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    """Escribir ``granger_adjacency.csv``, ``granger.dot`` y opcionalmente ``sigma_eps.csv``."""
    ctx = CommandContext(args)
    model = io_service.load_model(args.model)
    names = list(model.names) if model.names else None
    network = diagnostics_service.granger_network(model, ctx.pick("zero_tol"))
    adjacency = io_service.save_frame(
        io_service.adjacency_frame(network, names), ctx.output("granger_adjacency.csv")
    )
    dot = io_service.save_text(diagnostics_service.to_dot(network, names), ctx.output("granger.dot"))

    if args.data is not None:
        panel = ctx.load_panel()
        sigma = diagnostics_service.sigma_eps_estimate(model, panel, ctx.pick("lambda_eps"))
        io_service.save_frame(pd.DataFrame(sigma, columns=list(panel.names)), ctx.output("sigma_eps.csv"))

    logger.info("red_escrita", adjacency=str(adjacency), dot=str(dot), edges=len(network.edges))
    print(f"edges={len(network.edges)} threshold={network.threshold:.6g}")
    return 0
