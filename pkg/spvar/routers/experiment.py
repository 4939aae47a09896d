import argparse

import pandas as pd
import structlog

from spvar.models import Estimator, ExperimentName
from spvar.routers.common import CommandContext, add_fit_flags, add_shared_flags, orders_arg
from spvar.schemas.experiment import ExperimentConfig
from spvar.services.experiment_service import experiment_service

logger = structlog.get_logger(__name__)


def sizes_arg(value: str) -> str:
    try:
        [int(part) for part in value.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"se esperaba una lista T1,T2,..., se recibió '{value}'") from exc
    return value


def register(subparsers) -> None:
    parser = subparsers.add_parser("experiment", help="Réplicas Monte Carlo reducidas")
    parser.add_argument("name", choices=[e.value for e in ExperimentName])
    parser.add_argument("--replicates", type=int, default=None)
    parser.add_argument("--sizes", type=sizes_arg, default=None, help="Valores de T separados por comas")
    parser.add_argument("--N", dest="N", type=int, default=None)
    parser.add_argument("--dgp", choices=["dgp1", "dgp2"], default=None, help="DGP de error-scaling")
    parser.add_argument("--orders", type=orders_arg, default=None, help="Órdenes verdaderos")
    parser.add_argument("--rho-bar", dest="rho_bar", type=float, default=None)
    parser.add_argument("--max-orders", dest="max_orders", type=orders_arg, default=None)
    parser.add_argument("--tau", type=float, default=None)
    parser.add_argument("--q", type=float, default=None)
    parser.add_argument("--var-lag", dest="var_lag", type=int, default=None, help="P del VAR por MCO")
    parser.add_argument(
        "--estimator", choices=[e.value for e in Estimator], default=None, help="Estimador de error-scaling"
    )
    parser.add_argument("--nonzeros-per-row", dest="nonzeros_per_row", type=int, default=None)
    parser.add_argument("--comparison-lambda", dest="comparison_lambda", type=float, default=None)
    parser.add_argument("--presample", type=int, default=None, help="Filas previas de init-sensitivity")
    add_fit_flags(parser)
    add_shared_flags(parser)
    parser.set_defaults(handler=handle)


def build_config(ctx: CommandContext) -> ExperimentConfig:
    """ExperimentConfig con los valores dados por flag o archivo."""
    values = {
        "name": ExperimentName(ctx.args.name),
        "seed": ctx.seed,
        "threads": ctx.threads,
        "fit": ctx.fit_config(max_order=max(ctx.triple("max_orders", "3,3,3"))),
    }
    for key in (
        "replicates", "N", "dgp", "rho_bar", "tau", "q", "lambda_g", "nonzeros_per_row", "comparison_lambda",
        "presample",
    ):
        value = ctx.pick(key)
        if value is not None:
            values[key] = value
    sizes = ctx.pick("sizes")
    if sizes is not None:
        values["sizes"] = [int(part) for part in str(sizes).split(",")]
    if ctx.pick("orders") is not None:
        values["true_orders"] = ctx.orders()
    if ctx.pick("max_orders") is not None:
        values["max_orders"] = ctx.triple("max_orders", "3,3,3")
    if ctx.pick("var_lag") is not None:
        values["ols_lag"] = ctx.pick("var_lag")
    if ctx.pick("estimator") is not None:
        values["estimator"] = ctx.estimator()
    return ExperimentConfig(**values)


def handle(args: argparse.Namespace) -> int:
    """Escribir ``<nombre>.csv`` e imprimir el resumen por tamaño."""
    ctx = CommandContext(args)
    config = build_config(ctx)
    path = experiment_service.run_experiment(config, ctx.out_dir)
    summary = experiment_service.summarize(pd.read_csv(path), config)
    logger.info("experimento_escrito", path=str(path))
    print(summary.to_string(index=False))
    return 0
