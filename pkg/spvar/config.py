from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import field_validator


class Settings(BaseSettings):
    """
    Configuración global de la librería usando Pydantic Settings.

    Lee variables de entorno con prefijo ``SPVAR_`` (o un archivo ``.env``) y
    proporciona los valores por defecto de todos los servicios.
    """

    # Logging Configuration
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "console"

    # Execution
    THREADS: int = 1
    SEED: int = 0
    OUT_DIR: str = "."
    FLOAT_FORMAT: str = "%.17g"

    # Model
    MAX_ORDER: int = 6
    EPSILON_BOX: float = 0.05
    VMA_J_MAX: int = 200
    VMA_TAIL_WINDOW: int = 10
    VMA_TOL: float = 1e-8

    # Solver
    MAX_ITER: int = 5000
    TOL: float = 1e-6
    POWER_ITERATIONS: int = 20
    COMPENSATED_SUM_MIN_T: int = 10000

    # Simulation
    BURN_IN: int = 500
    NOISE_SD: float = 0.2
    STATIONARITY_TARGET: float = 0.8

    # Selection
    TAU: float = 0.05
    BIC_Q: float = 0.0
    LAMBDA_GRID_SIZE: int = 20

    # Diagnostics
    ZERO_TOL: float = 1e-8

    @field_validator("LOG_FORMAT")
    @classmethod
    def formato_valido(cls, v: str) -> str:
        """Solo se admiten los renderizadores console y json."""
        if v not in ("console", "json"):
            raise ValueError("LOG_FORMAT debe ser 'console' o 'json'")
        return v

    @field_validator("EPSILON_BOX")
    @classmethod
    def margen_valido(cls, v: float) -> float:
        if not 0 < v < 0.5:
            raise ValueError("EPSILON_BOX debe estar en (0, 0.5)")
        return v

    model_config = SettingsConfigDict(
        env_prefix="SPVAR_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )


# Instancia global de configuración
settings = Settings()
