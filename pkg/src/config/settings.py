import os
from typing import Optional

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # Logging settings
    LOG_LEVEL: str = "INFO"
    LOG_DIR: str = "logs"
    LOG_FILE: str = "larr.log"

    # Job orchestration
    DEFAULT_WORKERS: int = os.cpu_count() or 1
    OUTPUT_DIR: str = "results"

    # Speed of light in atomic units; the classical scaling study overrides it per run
    C_AU: float = 137.035999084

    # ODE integration for the reference "adaptive" mode
    ODE_RTOL: float = 1e-8
    ODE_ATOL: float = 1e-12
    ODE_METHOD: str = "DOP853"

    # Frozen-grid "fast" mode
    FAST_POINTS_PER_CYCLE: int = 200
    FAST_MAX_PHASE_STEP: float = 0.2

    # Extra preset directory searched before the shipped presets
    PRESET_DIR: Optional[str] = None

    class Config:
        env_file = ".env"
        env_prefix = "LARR_"
        case_sensitive = True
        extra = "ignore"


settings = Settings()
