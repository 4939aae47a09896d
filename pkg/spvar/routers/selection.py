import argparse

import structlog

from spvar.config import settings
from spvar.models import Estimator
from spvar.routers.common import CommandContext, add_data_flags, add_fit_flags, add_shared_flags, orders_arg
from spvar.services.io_service import io_service
from spvar.services.selection_service import selection_service

logger = structlog.get_logger(__name__)

BIC_COLUMNS = ["p", "r", "s", "d", "lambda_g", "loss", "bic", "nnz", "converged", "chosen", "error"]


def register(subparsers) -> None:
    parser = subparsers.add_parser("select", help="Seleccionar (p, r, s) por BIC")
    add_data_flags(parser)
    parser.add_argument("--max-orders", dest="max_orders", type=orders_arg, default=None, help="p̄,r̄,s̄")
    parser.add_argument("--tau", type=float, default=None)
    parser.add_argument("--q", type=float, default=None)
    parser.add_argument("--estimator", choices=[e.value for e in Estimator], default=None)
    add_fit_flags(parser)
    add_shared_flags(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    """Escribir ``bic_table.csv`` e imprimir los órdenes elegidos."""
    ctx = CommandContext(args)
    panel = ctx.load_panel()
    default_max = ",".join([str(settings.MAX_ORDER)] * 3)
    max_orders = ctx.triple("max_orders", default_max)
    config = ctx.fit_config(max_order=max(max_orders))
    table = selection_service.select_orders(
        panel, max_orders, config, ctx.estimator(),
        lambda_g=ctx.pick("lambda_g"), tau=ctx.pick("tau"), q=ctx.pick("q"),
    )
    rows = [
        {
            "p": row.orders.p, "r": row.orders.r, "s": row.orders.s, "d": row.orders.d,
            "lambda_g": row.lambda_g_used, "loss": row.loss, "bic": row.bic, "nnz": row.nnz,
            "converged": int(row.converged), "chosen": int(i == table.chosen), "error": row.error or "",
        }
        for i, row in enumerate(table.rows)
    ]
    path = io_service.save_rows(rows, ctx.output("bic_table.csv"), columns=BIC_COLUMNS)
    chosen = table.chosen_orders
    logger.info("tabla_bic_escrita", path=str(path), cells=len(rows))
    print(f"{chosen.p},{chosen.r},{chosen.s}")
    return 0
