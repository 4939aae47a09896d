"""
Utilidades compartidas por los subcomandos: opciones comunes y resolución
de parámetros con prioridad flag > archivo de configuración > settings.
"""

import argparse
from pathlib import Path
from typing import Any, Optional

from spvar.config import settings
from spvar.errors import ArgumentError
from spvar.models import Estimator, GInit, ModelOrders, OmegaUpdate, SeriesPanel
from spvar.schemas.fit import FitConfig
from spvar.schemas.run_config import RunConfig, parse_triple
from spvar.services.io_service import io_service


def orders_arg(value: str) -> str:
    """Validar "p,r,s" al parsear los argumentos."""
    try:
        parse_triple(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    return value


def add_shared_flags(parser: argparse.ArgumentParser) -> None:
    """--seed, --threads, --config y --out-dir."""
    group = parser.add_argument_group("opciones comunes")
    group.add_argument("--seed", type=int, default=None, help="Semilla base")
    group.add_argument("--threads", type=int, default=None, help="Máximo de trabajadores en paralelo")
    group.add_argument("--config", default=None, help="Archivo clave=valor con parámetros")
    group.add_argument("--out-dir", dest="out_dir", default=None, help="Directorio de salida")


def add_data_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("data", help="CSV T×N con encabezado")
    parser.add_argument(
        "--standardize", action="store_const", const=True, default=None,
        help="Media cero y varianza uno por columna",
    )


def add_fit_flags(parser: argparse.ArgumentParser) -> None:
    """Parámetros del solver compartidos por fit, select y forecast."""
    group = parser.add_argument_group("solver")
    group.add_argument("--lambda-g", dest="lambda_g", type=float, default=None, help="Penalización ℓ1")
    group.add_argument("--init-lambda-g", dest="init_lambda_g", type=float, default=None)
    group.add_argument("--step", type=float, default=None, help="Paso fijo (por defecto 1/L̂)")
    group.add_argument(
        "--no-backtracking", dest="backtracking", action="store_const", const=False, default=None,
    )
    group.add_argument("--epsilon-box", dest="epsilon_box", type=float, default=None)
    group.add_argument("--max-iter", dest="max_iter", type=int, default=None)
    group.add_argument("--tol", type=float, default=None)
    group.add_argument("--max-starts", dest="max_starts", type=int, default=None)
    group.add_argument("--g-init", dest="g_init", choices=[g.value for g in GInit], default=None)
    group.add_argument(
        "--omega-update", dest="omega_update", choices=[u.value for u in OmegaUpdate], default=None,
    )


class CommandContext:
    """Argumentos del subcomando más el archivo de configuración cargado."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.run_config: RunConfig = io_service.load_run_config(getattr(args, "config", None))

    def pick(self, key: str, default: Any = None) -> Any:
        value = getattr(self.args, key, None)
        if value is not None:
            return value
        value = getattr(self.run_config, key, None)
        return default if value is None else value

    @property
    def seed(self) -> int:
        return int(self.pick("seed", settings.SEED))

    @property
    def threads(self) -> int:
        threads = int(self.pick("threads", settings.THREADS))
        if threads < 1:
            raise ArgumentError("--threads debe ser ≥ 1")
        return threads

    @property
    def out_dir(self) -> Path:
        return Path(self.pick("out_dir", settings.OUT_DIR))

    def output(self, name: str) -> Path:
        return self.out_dir / name

    def orders(self, key: str = "orders", default: str = "1,1,0") -> ModelOrders:
        p, r, s = parse_triple(self.pick(key, default))
        return ModelOrders(p=p, r=r, s=s)

    def triple(self, key: str, default: str) -> tuple:
        return parse_triple(self.pick(key, default))

    def estimator(self) -> Estimator:
        value = self.pick("estimator", Estimator.JE.value)
        try:
            return Estimator(value)
        except ValueError as exc:
            raise ArgumentError(f"estimador desconocido '{value}' (je | re)") from exc

    def fit_config(self, max_order: Optional[int] = None) -> FitConfig:
        """FitConfig con los valores dados; el resto toma los defaults de settings."""
        values = {
            key: self.pick(key)
            for key in (
                "lambda_g", "init_lambda_g", "step", "backtracking", "epsilon_box",
                "max_iter", "tol", "max_starts", "g_init", "omega_update",
            )
        }
        values = {key: value for key, value in values.items() if value is not None}
        values.update(threads=self.threads, seed=self.seed)
        if max_order is not None:
            values["max_order"] = max(settings.MAX_ORDER, max_order)
        return FitConfig(**values)

    def load_panel(self) -> SeriesPanel:
        return io_service.load_csv(self.args.data, standardize=bool(self.pick("standardize", False)))
