import argparse

import structlog

from spvar.errors import ArgumentError
from spvar.models import Estimator, ForecastEstimator, RefitSchedule
from spvar.routers.common import CommandContext, add_data_flags, add_fit_flags, add_shared_flags, orders_arg
from spvar.schemas.forecast import FitSpec
from spvar.services.forecast_service import forecast_service
from spvar.services.io_service import io_service
from spvar.services.selection_service import selection_service

logger = structlog.get_logger(__name__)

ESTIMATOR_ALIASES = {
    "je": ForecastEstimator.SPVAR_JE,
    "re": ForecastEstimator.SPVAR_RE,
    **{e.value: e for e in ForecastEstimator},
}


def register(subparsers) -> None:
    parser = subparsers.add_parser("forecast", help="Evaluación rodante a un paso")
    add_data_flags(parser)
    parser.add_argument("--origin", type=int, default=None, help="Filas del primer entrenamiento")
    parser.add_argument("--steps", type=int, default=None, help="Número de pronósticos")
    parser.add_argument("--refit", choices=[r.value for r in RefitSchedule], default=None)
    parser.add_argument("--estimator", choices=list(ESTIMATOR_ALIASES), default=None)
    parser.add_argument("--orders", type=orders_arg, default=None)
    parser.add_argument("--var-lag", dest="var_lag", type=int, default=None, help="P de los VAR de referencia")
    add_fit_flags(parser)
    add_shared_flags(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    """Escribir ``forecast_report.csv`` e imprimir el error medio."""
    ctx = CommandContext(args)
    panel = ctx.load_panel()
    name = ctx.pick("estimator", "je")
    if name not in ESTIMATOR_ALIASES:
        raise ArgumentError(f"estimador desconocido '{name}'")
    estimator = ESTIMATOR_ALIASES[name]
    origin = int(ctx.pick("origin", max(2, panel.T // 2)))
    steps = int(ctx.pick("steps", panel.T - origin))
    refit = RefitSchedule(ctx.pick("refit", RefitSchedule.EVERY_STEP.value))
    orders = ctx.orders()
    config = ctx.fit_config(max_order=max(orders.as_tuple())).model_copy(update={"threads": 1})

    if ctx.pick("lambda_g") is None and estimator != ForecastEstimator.VAR_OLS and orders.d:
        train = panel.data[:origin]
        inner = Estimator.RE if estimator == ForecastEstimator.SPVAR_RE else Estimator.JE
        config = config.model_copy(
            update={"lambda_g": selection_service.select_lambda_g(train, orders, None, config, inner)}
        )
    spec = FitSpec(estimator=estimator, orders=orders, config=config, var_lag=ctx.pick("var_lag"))
    report = forecast_service.rolling_eval(panel, spec, origin, steps, refit, n_jobs=ctx.threads)

    rows = []
    for step in report.per_step:
        row = {"origin": step.origin, "l2_error": step.l2_error, "failed": int(step.failed),
               "message": step.message or ""}
        for i, column in enumerate(panel.names):
            row[f"forecast_{column}"] = step.forecast[i] if step.forecast else None
            row[f"realized_{column}"] = step.realized[i] if step.realized else None
        rows.append(row)
    columns = ["origin", "l2_error", "failed", "message"]
    for column in panel.names:
        columns.extend([f"forecast_{column}", f"realized_{column}"])
    path = io_service.save_rows(rows, ctx.output("forecast_report.csv"), columns=columns)
    logger.info("pronostico_escrito", path=str(path), steps=len(rows))
    mean = "nan" if report.mean_error is None else f"{report.mean_error:.6g}"
    print(
        f"estimator={estimator.value} refit={refit.value} steps={len(rows)} "
        f"mean_l2_error={mean} failed_steps={report.failed_steps}"
    )
    return 0
