"""
Centralized configuration management for the sparse confidence set toolkit.
Loads environment variables and provides typed settings.
"""

import logging
from pathlib import Path
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

# Get project root directory
PROJECT_ROOT = Path(__file__).parent.parent


class Settings(BaseSettings):
    """Process-level settings loaded from environment variables."""

    model_config = SettingsConfigDict(env_file=".env", case_sensitive=False, extra="ignore")

    # ===== Application =====
    app_name: str = Field("sparseci", alias="APP_NAME")
    app_env: str = Field("development", alias="APP_ENV")
    log_level: str = Field("INFO", alias="LOG_LEVEL")

    # ===== Parallelism =====
    threads: Optional[int] = Field(None, alias="SPARSECI_THREADS", ge=1)

    # ===== Paths =====
    results_dir: Path = Field(PROJECT_ROOT / "results", alias="SPARSECI_RESULTS_DIR")


# Global settings instance
try:
    settings = Settings()
except Exception as e:
    logging.getLogger(__name__).warning("Could not load environment settings (%s); using defaults", e)
    settings = Settings.model_construct()


def configure_logging(level: Optional[str] = None) -> None:
    """Configure the root logger once, at the level from settings."""
    logging.basicConfig(
        level=(level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


# ===== Experiment Configuration =====
class ExperimentDefaults:
    """Reference simulation design: spike vector, levels and grids."""

    D = 1000
    S = 100
    SIGMA = 1.0
    ALPHA = 0.05
    ALPHA_PRIME = ALPHA / 2
    DELTA = 0.7

    REPS = 500
    SEED = 20240601

    SNR_MIN = 2.0
    SNR_MAX = 10.0
    SNR_POINTS = 21

    SENSITIVITY_SNRS = (3.8, 9.0)
    ALPHA_PRIME_GRID = (0.005, 0.01, 0.015, 0.02, 0.025, 0.03, 0.035, 0.04, 0.045)

    # Tolerance (in binomial standard errors) when MC meets an exact value
    SE_TOLERANCE = 3.0


# ===== Lower Bound Configuration =====
class BoundDefaults:
    """Constants for threshold reports and lower-bound grid searches."""

    C_PRIME = 10.0

    RHO_GRID_POINTS = 200
    RHO_MAX_SIGMAS = 50.0
    RHO_MIN_SIGMAS = 1e-3
    GOLDEN_TOL = 1e-10


# ===== Output Configuration =====
class OutputConfig:
    """CSV formatting shared by every writer."""

    SIGNIFICANT_DIGITS = 9
    FLOAT_FORMAT = "%.9g"
    INF_LITERAL = "inf"


# Export configurations
__all__ = [
    "settings",
    "Settings",
    "configure_logging",
    "ExperimentDefaults",
    "BoundDefaults",
    "OutputConfig",
    "PROJECT_ROOT",
]


if __name__ == "__main__":
    configure_logging()
    print("=== sparseci configuration ===")
    print(f"App Name: {settings.app_name}")
    print(f"Environment: {settings.app_env}")
    print(f"Threads: {settings.threads or 'all cores'}")
    print(f"Results dir: {settings.results_dir}")
