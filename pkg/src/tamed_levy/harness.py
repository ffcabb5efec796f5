"""Monte Carlo strong-error experiments with coupled coarse/reference paths.

Path ``i`` draws one noise realisation on the reference grid from streams
keyed by ``(base_seed, i)``.  The reference scheme and every coarse level are
run on that same realisation (coarse levels see it through exact
coarsening), so the deviation between them is pure discretisation error.

Paths are processed in fixed-size chunks, optionally in worker processes.
Every per-path quantity is independent of chunking and the reductions run in
path-index order, so reports are bit-identical for any worker count.
"""

from __future__ import annotations

import io
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np

from .delay import simulate_delay_many
from .errors import ConfigurationError
from .model import DelayProblem, builtin
from .noise import GridSpec, make_noise
from .scheme import SchemeConfig, simulate_many

log = logging.getLogger(__name__)

CHUNK_PATHS = 50
CSV_HEADER = "level,step_size,l2_error,l1_error,paths_diverged"
COMPARE_HEADER = "level,step_size,scheme,l2_error,l1_error,mean_sup_sq,paths_diverged"


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    levels: tuple[int, ...]
    ref_level: int
    paths: int = 1000
    base_seed: int = 42
    theta: float = 0.5
    error_time: Literal["terminal", "running_max"] = "terminal"
    compare_untamed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(int(v) for v in self.levels))

    def validate(self):
        builtin(self.problem)
        if not self.levels:
            raise ConfigurationError("need at least one level")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ConfigurationError(f"levels must be strictly increasing, got {list(self.levels)}")
        if min(self.levels) < 0:
            raise ConfigurationError("levels must be nonnegative")
        if self.ref_level <= max(self.levels):
            raise ConfigurationError(
                f"ref_level {self.ref_level} must exceed the finest level {max(self.levels)}"
            )
        if self.paths < 2:
            raise ConfigurationError("need at least 2 paths")
        if not 0 < self.theta <= 0.5:
            raise ConfigurationError(f"theta must lie in (0, 1/2], got {self.theta}")
        if self.error_time not in ("terminal", "running_max"):
            raise ConfigurationError(f"unknown error time {self.error_time!r}")


@dataclass(frozen=True)
class LevelError:
    level: int
    step_size: float
    l2_error: float
    l1_error: float
    paths_diverged: int


@dataclass
class ErrorReport:
    levels: list[LevelError]
    fitted_rate_l2: float
    fitted_rate_l1: float
    config: ExperimentConfig
    wall_time: float = 0.0
    metadata: dict = field(default_factory=dict)

    @property
    def l2_errors(self) -> list[float]:
        return [row.l2_error for row in self.levels]

    @property
    def l1_errors(self) -> list[float]:
        return [row.l1_error for row in self.levels]

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(CSV_HEADER + "\n")
        for row in self.levels:
            out.write(
                f"{row.level},{fmt(row.step_size)},{fmt(row.l2_error)},"
                f"{fmt(row.l1_error)},{row.paths_diverged}\n"
            )
        return out.getvalue()


def fmt(value: float) -> str:
    return format(value, ".17g")


def fit_rate(points) -> float:
    """Least-squares slope of log2(error) against log2(step_size)."""
    points = list(points)
    if len(points) < 2:
        raise ConfigurationError("rate fit needs at least two points")
    steps = np.array([p[0] for p in points], dtype=float)
    errs = np.array([p[1] for p in points], dtype=float)
    bad = ~(np.isfinite(errs) & (errs > 0)) | ~(np.isfinite(steps) & (steps > 0))
    if bad.any():
        raise ConfigurationError(
            f"rate fit needs finite positive values; offending points: {[points[i] for i in np.flatnonzero(bad)]}"
        )
    u, v = np.log2(steps), np.log2(errs)
    du = u - u.mean()
    denom = np.dot(du, du)
    if denom == 0:
        raise ConfigurationError("rate fit needs at least two distinct step sizes")
    return float(np.dot(du, v - v.mean()) / denom)


def _simulate(problem, config, noises):
    if isinstance(problem, DelayProblem):
        return simulate_delay_many(problem, config, noises)
    return simulate_many(problem, config, noises)


def _chunk(config: ExperimentConfig, start: int, stop: int, schemes: tuple[bool, ...]):
    """Per-path deviations and sup-moments for paths ``start..stop-1``.

    Returns ``{(level, tamed): (deviation, sup_sq)}``; both arrays are NaN
    where the coarse or reference path went non-finite.
    """
    problem = builtin(config.problem)
    grid = GridSpec(problem.t0, problem.t1, 2**config.ref_level)
    noises = [make_noise(config.base_seed, i, grid, problem.m, problem.levy) for i in range(start, stop)]
    ref = _simulate(problem, SchemeConfig(2**config.ref_level, config.theta, True), noises)
    ref_ok = np.all(np.isfinite(ref), axis=(1, 2))
    out = {}
    for level in config.levels:
        factor = 2 ** (config.ref_level - level)
        ref_on_grid = ref[:, ::factor]
        for tamed in schemes:
            coarse = _simulate(problem, SchemeConfig(2**level, config.theta, tamed), noises)
            with np.errstate(over="ignore", invalid="ignore"):
                gap = np.sqrt(np.sum((ref_on_grid - coarse) ** 2, axis=2))
                sup_sq = np.max(np.sum(coarse * coarse, axis=2), axis=1)
            dev = gap[:, -1] if config.error_time == "terminal" else np.max(gap, axis=1)
            ok = ref_ok & np.all(np.isfinite(coarse), axis=(1, 2))
            out[level, tamed] = (np.where(ok, dev, np.nan), np.where(ok, sup_sq, np.nan))
    return out


def _collect(config: ExperimentConfig, schemes, workers: int | None):
    bounds = [(a, min(a + CHUNK_PATHS, config.paths)) for a in range(0, config.paths, CHUNK_PATHS)]
    workers = available_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(bounds) == 1:
        parts = [_chunk(config, a, b, schemes) for a, b in bounds]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(bounds))) as pool:
            parts = list(
                pool.map(_chunk, [config] * len(bounds), *zip(*bounds), [schemes] * len(bounds))
            )
    return {
        key: tuple(np.concatenate([p[key][i] for p in parts]) for i in range(2))
        for key in parts[0]
    }


def _summarise(level: int, dev: np.ndarray) -> LevelError:
    ok = np.isfinite(dev)
    kept = dev[ok]
    if kept.size:
        l2 = math.sqrt(float(np.mean(kept * kept)))
        l1 = float(np.mean(kept))
    else:
        l2 = l1 = math.nan
    return LevelError(level, 2.0**-level, l2, l1, int(np.count_nonzero(~ok)))


def _rate(rows, attr) -> float:
    pts = [(r.step_size, getattr(r, attr)) for r in rows]
    pts = [p for p in pts if math.isfinite(p[1]) and p[1] > 0]
    try:
        return fit_rate(pts)
    except ConfigurationError:
        return math.nan


def _estimate(config: ExperimentConfig, workers: int | None = 1) -> ErrorReport:
    started = time.perf_counter()
    tamed = not config.compare_untamed
    data = _collect(config, (tamed,), workers)
    rows = [_summarise(level, data[level, tamed][0]) for level in config.levels]
    report = ErrorReport(rows, _rate(rows, "l2_error"), _rate(rows, "l1_error"), config)
    report.wall_time = time.perf_counter() - started
    report.metadata = {"config": asdict(config), "workers": workers}
    for row in rows:
        if row.paths_diverged:
            log.warning("level %d: %d paths diverged and were excluded", row.level, row.paths_diverged)
    return report


def strong_error(config: ExperimentConfig, workers: int | None = 1) -> ErrorReport:
    """L1/L2 strong errors per level against the fine reference, with fitted rates.

    ``workers`` only affects speed; ``None`` uses every available CPU.
    """
    config.validate()
    return _estimate(config, workers)


@dataclass(frozen=True)
class SchemeComparison:
    level: int
    step_size: float
    scheme: str
    l2_error: float
    l1_error: float
    mean_sup_sq: float
    paths_diverged: int


def compare_untamed(config: ExperimentConfig, workers: int | None = 1) -> list[SchemeComparison]:
    """Tamed and untamed coarse schemes on the same paths, against the tamed reference."""
    config.validate()
    data = _collect(config, (True, False), workers)
    rows = []
    for level in config.levels:
        for tamed in (True, False):
            dev, sup_sq = data[level, tamed]
            err = _summarise(level, dev)
            finite = sup_sq[np.isfinite(sup_sq)]
            rows.append(
                SchemeComparison(
                    level,
                    err.step_size,
                    "tamed" if tamed else "untamed",
                    err.l2_error,
                    err.l1_error,
                    float(np.mean(finite)) if finite.size else math.nan,
                    err.paths_diverged,
                )
            )
    return rows


def comparison_csv(rows: list[SchemeComparison]) -> str:
    lines = [COMPARE_HEADER]
    for r in rows:
        lines.append(
            f"{r.level},{fmt(r.step_size)},{r.scheme},{fmt(r.l2_error)},{fmt(r.l1_error)},"
            f"{fmt(r.mean_sup_sq)},{r.paths_diverged}"
        )
    return "\n".join(lines) + "\n"


def trajectory_csv(times: np.ndarray, states: np.ndarray) -> str:
    d = states.shape[1]
    lines = ["t," + ",".join(f"x{i}" for i in range(d))]
    for t, x in zip(times, states):
        lines.append(fmt(float(t)) + "," + ",".join(fmt(float(v)) for v in x))
    return "\n".join(lines) + "\n"


def available_workers() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def _noises(problem, n: int, paths: int, base_seed: int):
    grid = GridSpec(problem.t0, problem.t1, n)
    return [make_noise(base_seed, i, grid, problem.m, problem.levy) for i in range(paths)]


def one_step_displacement(problem, ns, paths: int, base_seed: int = 0, theta: float = 0.5) -> dict[int, float]:
    """``max_k E|x^n(t_k + dt/2) - x^n(t_k)|^2`` for each ``n``.

    The midpoint value is the continuous-time scheme between grid points,
    rebuilt from the same noise resolved at ``2 * max(ns)``.
    """
    noises = _noises(problem, 2 * max(ns), paths, base_seed)
    out = {}
    for n in ns:
        states, mids = simulate_many(problem, SchemeConfig(n, theta), noises, midpoints=True)
        sq = np.sum((mids - states[:, :-1]) ** 2, axis=2)
        out[n] = float(np.max(np.mean(sq, axis=0)))
    return out


def sup_moment(problem, ns, paths: int, base_seed: int = 0, theta: float = 0.5, tamed: bool = True) -> dict[int, float]:
    """Monte Carlo ``E sup_k |x^n(t_k)|^2`` for each ``n`` on shared noise."""
    noises = _noises(problem, max(ns), paths, base_seed)
    out = {}
    for n in ns:
        with np.errstate(over="ignore", invalid="ignore"):
            states = _simulate(problem, SchemeConfig(n, theta, tamed), noises)
            out[n] = float(np.mean(np.max(np.sum(states * states, axis=2), axis=1)))
    return out
