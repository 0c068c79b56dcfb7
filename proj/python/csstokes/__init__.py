"""Kinetic Cucker-Smale particles coupled to Stokes flow on a periodic box."""

from ._core import (
    ConfigError,
    SimConfig,
    SimulationAbort,
    __version__,
    alignment_force,
    check,
    compute_fields,
    init_ensemble,
    leray_project,
    load_config,
    parse_config,
    read_checkpoint,
    run,
    timeseries_columns,
    weighted_norm,
)

__all__ = [
    "ConfigError",
    "SimConfig",
    "SimulationAbort",
    "alignment_force",
    "check",
    "compute_fields",
    "init_ensemble",
    "leray_project",
    "load_config",
    "parse_config",
    "read_checkpoint",
    "run",
    "timeseries_columns",
    "weighted_norm",
]
