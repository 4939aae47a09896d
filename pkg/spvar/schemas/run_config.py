from pydantic import BaseModel, ConfigDict, Field, field_validator
from typing import Optional, Tuple


def parse_triple(value: str) -> Tuple[int, int, int]:
    """Convertir "p,r,s" en una terna de enteros no negativos."""
    parts = [part.strip() for part in str(value).split(",")]
    if len(parts) != 3:
        raise ValueError(f"se esperaba 'p,r,s', se recibió '{value}'")
    triple = tuple(int(part) for part in parts)
    if any(x < 0 for x in triple):
        raise ValueError(f"los órdenes deben ser ≥ 0: '{value}'")
    return triple


class RunConfig(BaseModel):
    """
    Archivo de configuración plano ``clave=valor`` de la CLI.

    Todas las claves son opcionales; una clave desconocida es un error. Los
    flags dados explícitamente en la línea de comandos tienen prioridad.
    """

    model_config = ConfigDict(extra="forbid")

    # Ejecución
    seed: Optional[int] = None
    threads: Optional[int] = Field(default=None, ge=1)
    out_dir: Optional[str] = None

    # Datos
    standardize: Optional[bool] = None

    # Modelo y ajuste
    orders: Optional[str] = None
    estimator: Optional[str] = None
    lambda_g: Optional[float] = Field(default=None, ge=0)
    init_lambda_g: Optional[float] = Field(default=None, ge=0)
    step: Optional[float] = Field(default=None, gt=0)
    backtracking: Optional[bool] = None
    epsilon_box: Optional[float] = Field(default=None, gt=0, lt=0.5)
    max_iter: Optional[int] = Field(default=None, ge=1)
    tol: Optional[float] = Field(default=None, gt=0)
    max_starts: Optional[int] = Field(default=None, ge=1)
    g_init: Optional[str] = None
    omega_update: Optional[str] = None

    # Selección
    max_orders: Optional[str] = None
    tau: Optional[float] = Field(default=None, ge=0)
    q: Optional[float] = Field(default=None, ge=0, le=1)

    # Simulación
    T: Optional[int] = Field(default=None, ge=1)
    N: Optional[int] = Field(default=None, ge=1)
    dgp: Optional[str] = None
    burn_in: Optional[int] = Field(default=None, ge=0)
    noise_sd: Optional[float] = Field(default=None, gt=0)
    stationarity_target: Optional[float] = Field(default=None, gt=0, lt=1)
    nonzeros_per_row: Optional[int] = Field(default=None, ge=0)
    rho_bar: Optional[float] = Field(default=None, gt=0, lt=1)

    # Pronóstico
    origin: Optional[int] = Field(default=None, ge=2)
    steps: Optional[int] = Field(default=None, ge=0)
    refit: Optional[str] = None
    var_lag: Optional[int] = Field(default=None, ge=1)

    # Diagnósticos
    zero_tol: Optional[float] = Field(default=None, ge=0)
    lambda_eps: Optional[float] = Field(default=None, ge=0)
    horizon: Optional[int] = Field(default=None, ge=1)

    # Experimentos
    replicates: Optional[int] = Field(default=None, ge=1)
    sizes: Optional[str] = None
    comparison_lambda: Optional[float] = Field(default=None, gt=-1, lt=1)
    presample: Optional[int] = Field(default=None, ge=1)

    @field_validator("orders", "max_orders")
    @classmethod
    def terna_valida(cls, v):
        if v is not None:
            parse_triple(v)
        return v
