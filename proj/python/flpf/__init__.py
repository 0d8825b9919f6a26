"""Fixed-lag particle filtering and SMC parameter estimation for a
regime-switching chain-binomial SEIRS model."""

from ._core import (
    ConfigError,
    DegeneracyError,
    FlpfError,
    InputError,
    IoError,
    Measurement,
    ParameterError,
    Theta,
    config_hash,
    config_ini,
    evaluate,
    preset_names,
    run_filter,
    run_smc2,
    simulate,
)

__all__ = [
    "ConfigError",
    "DegeneracyError",
    "FlpfError",
    "InputError",
    "IoError",
    "Measurement",
    "ParameterError",
    "Theta",
    "config_hash",
    "config_ini",
    "evaluate",
    "preset_names",
    "run_filter",
    "run_smc2",
    "simulate",
]
