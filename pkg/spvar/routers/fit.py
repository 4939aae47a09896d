import argparse

import structlog

from spvar.models import Estimator
from spvar.routers.common import CommandContext, add_data_flags, add_fit_flags, add_shared_flags, orders_arg
from spvar.services.io_service import io_service
from spvar.services.selection_service import selection_service
from spvar.services.solver_service import solver_service

logger = structlog.get_logger(__name__)

EXIT_MAX_ITER = 2


def register(subparsers) -> None:
    parser = subparsers.add_parser("fit", help="Ajustar un modelo SPVAR(∞)")
    add_data_flags(parser)
    parser.add_argument("--orders", type=orders_arg, default=None, help="Órdenes p,r,s")
    parser.add_argument("--estimator", choices=[e.value for e in Estimator], default=None)
    parser.add_argument("--out", default=None, help="Ruta del modelo JSON (por defecto <out-dir>/model.json)")
    add_fit_flags(parser)
    add_shared_flags(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    """
    Ajustar y escribir el modelo JSON y la traza del objetivo.

    Sin λ_g explícito se elige con el BIC modificado sobre la rejilla por
    defecto.

    Returns:
        0 si converge, 2 si se alcanzó max_iter (el modelo se escribe igual)
    """
    ctx = CommandContext(args)
    panel = ctx.load_panel()
    orders = ctx.orders()
    estimator = ctx.estimator()
    config = ctx.fit_config(max_order=max(orders.as_tuple()))
    if ctx.pick("lambda_g") is None and orders.d:
        lambda_g = selection_service.select_lambda_g(panel, orders, None, config, estimator)
        config = config.model_copy(update={"lambda_g": lambda_g})

    fit = solver_service.fit(panel, orders, config, estimator)
    model_path = io_service.save_model(fit.model, args.out or ctx.output("model.json"), panel.names)
    trace_path = io_service.save_rows(
        ({"iteration": i, "objective": value} for i, value in enumerate(fit.objective_trace)),
        ctx.output("fit_trace.csv"),
        columns=["iteration", "objective"],
    )
    if fit.per_row_omega is not None:
        io_service.save_rows(
            (
                {"row": i + 1, "name": panel.names[i], "omega": " ".join(f"{x:.17g}" for x in omega.as_vector()),
                 "loss": fit.per_row_loss[i]}
                for i, omega in enumerate(fit.per_row_omega)
            ),
            ctx.output("row_omegas.csv"),
            columns=["row", "name", "omega", "loss"],
        )
    print(
        f"orders={orders} estimator={estimator.value} lambda_g={config.lambda_g:.6g} "
        f"loss={fit.in_sample_loss:.6g} nnz={fit.nnz} iterations={fit.iterations} converged={fit.converged}"
    )
    logger.info("ajuste_escrito", model=str(model_path), trace=str(trace_path), converged=fit.converged)
    if fit.failed_rows:
        logger.warning("filas_con_arranques_fallidos", rows=fit.failed_rows)
    if not fit.converged:
        logger.warning("max_iter_alcanzado", max_iter=config.max_iter)
        return EXIT_MAX_ITER
    return 0
