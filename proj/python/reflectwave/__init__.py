"""Reflected-wave overvoltage simulator with an adaptive terminal branch."""

from ._core import (
    ConfigError,
    CsvError,
    SimError,
    columns,
    config,
    default_config,
    derived,
    lyapunov,
    metrics,
    read_trace,
    simulate,
    surge_impedance,
    write_trace,
    z_eq,
)

__all__ = [
    "ConfigError",
    "CsvError",
    "SimError",
    "columns",
    "config",
    "default_config",
    "derived",
    "lyapunov",
    "metrics",
    "read_trace",
    "simulate",
    "surge_impedance",
    "write_trace",
    "z_eq",
]
