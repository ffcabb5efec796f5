"""Tamed explicit Euler schemes for SDEs and delay SDEs driven by Levy noise."""

from .delay import History, resolve_delay, simulate_delay
from .errors import ConfigurationError, InvariantError
from .harness import ErrorReport, ExperimentConfig, compare_untamed, fit_rate, strong_error
from .model import (
    DelayProblem,
    FixedLag,
    LevyModel,
    PiecewiseFloor,
    PointMass,
    Problem,
    StandardNormal,
    Uniform,
    builtin,
    compensator,
)
from .noise import GridSpec, JumpEvent, Lane, NoisePath, StreamKey, coarsen, derive_stream, make_noise
from .scheme import SchemeConfig, Trajectory, kappa, simulate, step, tame

__all__ = [
    "ConfigurationError",
    "DelayProblem",
    "ErrorReport",
    "ExperimentConfig",
    "FixedLag",
    "GridSpec",
    "History",
    "InvariantError",
    "JumpEvent",
    "Lane",
    "LevyModel",
    "NoisePath",
    "PiecewiseFloor",
    "PointMass",
    "Problem",
    "SchemeConfig",
    "StandardNormal",
    "StreamKey",
    "Trajectory",
    "Uniform",
    "builtin",
    "coarsen",
    "compare_untamed",
    "compensator",
    "derive_stream",
    "fit_rate",
    "kappa",
    "make_noise",
    "resolve_delay",
    "simulate",
    "simulate_delay",
    "step",
    "strong_error",
    "tame",
]
