"""Config package initialization."""

from .settings import (
    settings,
    Settings,
    configure_logging,
    ExperimentDefaults,
    BoundDefaults,
    OutputConfig,
    PROJECT_ROOT,
)

__all__ = [
    "settings",
    "Settings",
    "configure_logging",
    "ExperimentDefaults",
    "BoundDefaults",
    "OutputConfig",
    "PROJECT_ROOT",
]
