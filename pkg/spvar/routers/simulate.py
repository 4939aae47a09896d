import argparse

import structlog

from spvar.errors import ArgumentError
from spvar.models import SpvarModel
from spvar.routers.common import CommandContext, add_shared_flags, orders_arg
from spvar.schemas.simulation import DgpSpec
from spvar.services.io_service import io_service
from spvar.services.simulation_service import simulation_service

logger = structlog.get_logger(__name__)

DGP_CHOICES = ("dgp1", "dgp2", "selection")


def register(subparsers) -> None:
    parser = subparsers.add_parser("simulate", help="Simular un panel SPVAR(∞)")
    parser.add_argument("--dgp", choices=DGP_CHOICES, default=None, help="Proceso predefinido")
    parser.add_argument("--model", default=None, help="Simular desde un modelo JSON en lugar de un DGP")
    parser.add_argument("--orders", type=orders_arg, default=None, help="Órdenes del DGP de selección")
    parser.add_argument("--rho-bar", dest="rho_bar", type=float, default=None)
    parser.add_argument("--N", dest="N", type=int, default=None)
    parser.add_argument("--T", dest="T", type=int, default=None)
    parser.add_argument("--burn-in", dest="burn_in", type=int, default=None)
    parser.add_argument("--noise-sd", dest="noise_sd", type=float, default=None)
    parser.add_argument("--stationarity-target", dest="stationarity_target", type=float, default=None)
    parser.add_argument("--nonzeros-per-row", dest="nonzeros_per_row", type=int, default=None)
    parser.add_argument("--force", action="store_true", help="Simular aunque no sea estacionario")
    parser.add_argument("--prefix", default="simulated", help="Prefijo de los archivos de salida")
    add_shared_flags(parser)
    parser.set_defaults(handler=handle)


def build_spec(ctx: CommandContext) -> DgpSpec:
    """DgpSpec del preset elegido con las sustituciones dadas."""
    dgp = ctx.pick("dgp", "dgp1")
    if dgp not in DGP_CHOICES:
        raise ArgumentError(f"dgp desconocido '{dgp}' ({' | '.join(DGP_CHOICES)})")
    N = int(ctx.pick("N", 10))
    if dgp == "dgp1":
        spec = simulation_service.dgp1(N=N, seed=ctx.seed)
    elif dgp == "dgp2":
        spec = simulation_service.dgp2(N=N, seed=ctx.seed)
    else:
        spec = simulation_service.selection_dgp(
            ctx.orders(default="1,1,0"), float(ctx.pick("rho_bar", 0.55)), N=N, seed=ctx.seed
        )
    overrides = {
        key: ctx.pick(key)
        for key in ("burn_in", "noise_sd", "stationarity_target", "nonzeros_per_row")
        if ctx.pick(key) is not None
    }
    return DgpSpec(**{**dict(spec), **overrides})


def handle(args: argparse.Namespace) -> int:
    """
    Simular y escribir ``<prefix>.csv`` y ``<prefix>_model.json``.

    Returns:
        Código de salida
    """
    ctx = CommandContext(args)
    T = int(ctx.pick("T", 200))
    rng = simulation_service.spawn_rng(ctx.seed)
    if args.model is not None:
        model = io_service.load_model(args.model)
        panel = simulation_service.simulate_spvar(
            model, T, burn_in=ctx.pick("burn_in"), noise_sd=ctx.pick("noise_sd"), rng=rng, force=args.force,
        )
    else:
        spec = build_spec(ctx)
        coefs = simulation_service.gen_sparse_coefs(spec, rng)
        model = SpvarModel(orders=spec.orders, omega=spec.omega, coefs=coefs)
        panel = simulation_service.simulate_spvar(
            model, T, burn_in=spec.burn_in, noise_sd=spec.noise_sd, rng=rng, force=args.force,
        )
    data_path = io_service.save_csv(panel, ctx.output(f"{args.prefix}.csv"))
    model_path = io_service.save_model(model, ctx.output(f"{args.prefix}_model.json"), panel.names)
    logger.info("simulacion_escrita", data=str(data_path), model=str(model_path), T=panel.T, N=panel.N)
    print(f"{data_path} {model_path}")
    return 0
