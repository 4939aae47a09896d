"""
Servicio de entrada/salida: CSV de series, documentos JSON del modelo,
tablas de resultados y archivo de configuración de la CLI.
"""

from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
import structlog
from dotenv import dotenv_values
from pydantic import ValidationError

from spvar.config import settings
from spvar.errors import ArgumentError, ParseError
from spvar.models import SeriesPanel, SpvarModel
from spvar.schemas.diagnostics import GrangerNetwork
from spvar.schemas.model import ModelDocument
from spvar.schemas.run_config import RunConfig
from spvar.services.base_service import BaseService
from spvar.services.model_service import model_service

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]


class IoService(BaseService):
    """
    Servicio para leer y escribir los artefactos de la CLI.
    """

    def __init__(self):
        super().__init__("io")

    # ------------------------------------------------------------------
    # Series
    # ------------------------------------------------------------------

    def load_csv(self, path: PathLike, standardize: bool = False) -> SeriesPanel:
        """
        Leer un panel T×N con una fila de encabezado.

        Args:
            path: Ruta del CSV
            standardize: Restar la media y dividir por la desviación típica

        Returns:
            SeriesPanel con nombres de columna del encabezado

        Raises:
            ParseError: Archivo vacío, filas irregulares o celdas no numéricas
        """
        path = Path(path)
        if not path.is_file():
            raise ParseError(f"no existe el archivo {path}")
        try:
            frame = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=True)
        except pd.errors.EmptyDataError as exc:
            raise ParseError(f"{path}: archivo vacío") from exc
        except pd.errors.ParserError as exc:
            raise ParseError(f"{path}: filas irregulares ({exc})") from exc
        if frame.shape[1] == 0 or frame.shape[0] == 0:
            raise ParseError(f"{path}: sin observaciones")

        names = [str(c).strip() for c in frame.columns]
        numeric = frame.apply(lambda col: pd.to_numeric(col.str.strip(), errors="coerce"))
        data = numeric.to_numpy(dtype=float)
        bad = np.argwhere(~np.isfinite(data))
        if bad.size:
            row, col = bad[0]
            raw = frame.iat[row, col]
            detail = "celda faltante" if pd.isna(raw) else f"valor no numérico '{raw}'"
            raise ParseError(f"{path}: {detail} en la fila {row + 2}, columna '{names[col]}'")

        panel = SeriesPanel.from_array(data, names=names)
        logger.info("csv_cargado", path=str(path), T=panel.T, N=panel.N)
        return self.standardize(panel) if standardize else panel

    def standardize(self, panel: SeriesPanel) -> SeriesPanel:
        """Media cero y desviación típica muestral uno por columna."""
        if panel.T < 2:
            raise ArgumentError("se requieren al menos 2 observaciones para estandarizar")
        means = panel.data.mean(axis=0)
        sds = panel.data.std(axis=0, ddof=1)
        constant = [panel.names[i] for i in np.flatnonzero(sds == 0)]
        if constant:
            raise ArgumentError(f"columna de varianza nula: {', '.join(constant)}")
        return SeriesPanel(
            data=(panel.data - means) / sds, names=panel.names, standardized=True, means=means, sds=sds
        )

    def save_frame(self, frame: pd.DataFrame, path: PathLike) -> Path:
        """Escribir un DataFrame como CSV UTF-8 con saltos LF y 17 cifras."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(
            path, index=False, float_format=settings.FLOAT_FORMAT, lineterminator="\n", encoding="utf-8"
        )
        return path

    def save_csv(self, panel: SeriesPanel, path: PathLike) -> Path:
        """Escribir el panel con encabezado de nombres."""
        return self.save_frame(pd.DataFrame(panel.data, columns=list(panel.names)), path)

    def save_rows(self, rows: Iterable[dict], path: PathLike, columns: Optional[Sequence[str]] = None) -> Path:
        """Escribir filas (diccionarios) en formato largo."""
        return self.save_frame(pd.DataFrame(list(rows), columns=columns), path)

    # ------------------------------------------------------------------
    # Modelo
    # ------------------------------------------------------------------

    def save_model(self, model: SpvarModel, path: PathLike, names: Optional[Sequence[str]] = None) -> Path:
        """Guardar el documento JSON del modelo."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        document = model_service.to_document(model, list(names) if names is not None else None)
        path.write_text(document.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return path

    def load_model(self, path: PathLike) -> SpvarModel:
        """Leer el documento JSON del modelo."""
        path = Path(path)
        if not path.is_file():
            raise ParseError(f"no existe el archivo {path}")
        try:
            document = ModelDocument.model_validate_json(path.read_text(encoding="utf-8"))
        except ValidationError as exc:
            raise ParseError(f"{path}: documento de modelo inválido: {exc}") from exc
        return model_service.from_document(document)

    # ------------------------------------------------------------------
    # Diagnósticos
    # ------------------------------------------------------------------

    def irf_frame(self, psi: np.ndarray) -> pd.DataFrame:
        """Ψ_j en formato largo (j, row, col, value) con índices 1-based."""
        J, N, _ = psi.shape
        j, row, col = np.meshgrid(np.arange(1, J + 1), np.arange(1, N + 1), np.arange(1, N + 1), indexing="ij")
        return pd.DataFrame({
            "j": j.ravel(), "row": row.ravel(), "col": col.ravel(), "value": psi.ravel(),
        })

    def adjacency_frame(self, network: GrangerNetwork, names: Optional[Sequence[str]] = None) -> pd.DataFrame:
        """Aristas (i, j, kind, magnitude) con el soporte por k como columna adicional."""
        names = list(names) if names is not None else [f"y{i + 1}" for i in range(network.N)]
        rows: List[dict] = [
            {
                "i": edge.target + 1,
                "j": edge.source + 1,
                "target": names[edge.target],
                "source": names[edge.source],
                "kind": edge.kind.value,
                "magnitude": edge.magnitude,
                "support": ";".join(str(k) for k in edge.support),
            }
            for edge in network.edges
        ]
        columns = ["i", "j", "target", "source", "kind", "magnitude", "support"]
        return pd.DataFrame(rows, columns=columns)

    def save_text(self, text: str, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        return path

    # ------------------------------------------------------------------
    # Configuración
    # ------------------------------------------------------------------

    def load_run_config(self, path: Optional[PathLike]) -> RunConfig:
        """
        Leer el archivo ``clave=valor`` de la CLI.

        Raises:
            ParseError: Líneas sin valor o archivo inexistente
            ArgumentError: Claves desconocidas o valores inválidos
        """
        if path is None:
            return RunConfig()
        path = Path(path)
        if not path.is_file():
            raise ParseError(f"no existe el archivo de configuración {path}")
        values = dotenv_values(path)
        missing = [key for key, value in values.items() if value is None]
        if missing:
            raise ParseError(f"{path}: claves sin valor: {', '.join(missing)}")
        try:
            return RunConfig(**values)
        except ValidationError as exc:
            problems = "; ".join(
                f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}" for error in exc.errors()
            )
            raise ArgumentError(f"{path}: configuración inválida ({problems})") from exc


# Instancia del servicio
io_service = IoService()
