"""Coupled Cahn-Hilliard / Allen-Cahn solver with non-diagonal mobility."""

from ._core import (
    ConfigError,
    ConvergenceRow,
    DiagnosticsRow,
    InvalidParameter,
    LineageMismatch,
    PotentialValue,
    RunConfig,
    SimulationResult,
    Space,
    StepFailure,
    check,
    config_keys,
    converge,
    eoc,
    load_config,
    mobility,
    parse_config,
    potential,
    simulate,
)

__all__ = [
    "ConfigError",
    "ConvergenceRow",
    "DiagnosticsRow",
    "InvalidParameter",
    "LineageMismatch",
    "PotentialValue",
    "RunConfig",
    "SimulationResult",
    "Space",
    "StepFailure",
    "check",
    "config_keys",
    "converge",
    "eoc",
    "load_config",
    "mobility",
    "parse_config",
    "potential",
    "simulate",
]
