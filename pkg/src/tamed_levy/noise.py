"""Driving randomness: Brownian increments and Poisson jump events.

Every path draws from three independent Philox streams keyed by
``(base_seed, path_index, lane)``.  Gaussian variates are produced by
inverse-CDF transform (``scipy.special.ndtri``) of 53-bit uniforms on the
open interval (0, 1), one uniform per variate.

Brownian increments are rounded onto the lattice ``2**-QUANTUM_BITS``.  The
rounding error (~1e-12) is far below anything the schemes resolve, and it
makes every partial sum of increments exact in float64, so coarsening is
associative bit-for-bit: ``coarsen(coarsen(p, a), b) == coarsen(p, a * b)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .errors import ConfigurationError

QUANTUM_BITS = 40
_GRID_TOL = 1e-9


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid ``t_k = t0 + k/n`` for ``k = 0..K`` with ``K = n*(t1 - t0)``."""

    t0: float
    t1: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigurationError(f"steps per unit time must be a positive integer, got {self.n}")
        span = self.n * (self.t1 - self.t0)
        if abs(span - round(span)) > _GRID_TOL * max(1.0, abs(span)):
            raise ConfigurationError(
                f"n*(t1-t0) = {span} is not an integer (n={self.n}, t0={self.t0}, t1={self.t1})"
            )
        if round(span) < 1:
            raise ConfigurationError("grid needs at least one step")

    @property
    def steps(self) -> int:
        return int(round(self.n * (self.t1 - self.t0)))

    @property
    def dt(self) -> float:
        return 1.0 / self.n

    def time(self, k: int) -> float:
        if k == self.steps:
            return float(self.t1)
        return self.t0 + k / self.n

    def times(self) -> np.ndarray:
        t = self.t0 + np.arange(self.steps + 1) / self.n
        t[-1] = self.t1
        return t

    def coarsened(self, factor: int) -> GridSpec:
        if factor < 1 or self.n % factor or self.steps % factor:
            raise ConfigurationError(
                f"factor {factor} must divide both n={self.n} and K={self.steps}"
            )
        return GridSpec(self.t0, self.t1, self.n // factor)


@dataclass(frozen=True)
class JumpEvent:
    time: float
    mark: np.ndarray


class Lane(enum.IntEnum):
    BROWNIAN = 0
    JUMP_TIMES = 1
    JUMP_MARKS = 2


@dataclass(frozen=True)
class StreamKey:
    base_seed: int
    path_index: int
    lane: Lane


def derive_stream(key: StreamKey) -> np.random.Generator:
    """Independent, reproducible generator for one (seed, path, lane) triple."""
    if key.path_index < 0:
        raise ConfigurationError("path_index must be nonnegative")
    seq = np.random.SeedSequence(
        key.base_seed & 0xFFFF_FFFF_FFFF_FFFF, spawn_key=(int(key.path_index), int(key.lane))
    )
    return np.random.Generator(np.random.Philox(seq))


def standard_normal(stream: np.random.Generator, shape) -> np.ndarray:
    """Standard normal variates by inverse CDF."""
    u = (stream.integers(0, 2**53, size=shape, dtype=np.int64) + 0.5) * 2.0**-53
    return ndtri(u)


def quantize(a: np.ndarray) -> np.ndarray:
    return np.ldexp(np.rint(np.ldexp(a, QUANTUM_BITS)), -QUANTUM_BITS)


def sample_brownian(stream: np.random.Generator, grid: GridSpec, m: int) -> np.ndarray:
    """``K`` increments of an ``m``-dimensional Wiener process, shape ``(K, m)``."""
    if m < 1:
        raise ConfigurationError("Brownian dimension must be >= 1")
    z = standard_normal(stream, (grid.steps, m))
    return quantize(z * math.sqrt(1.0 / grid.n))


def sample_jumps(stream_times, stream_marks, intensity, mark_law, t0, t1):
    """Jump times (sorted, in ``(t0, t1]``) and their marks.

    Returns ``(times, marks)`` with shapes ``(E,)`` and ``(E, mark_dim)``.
    The count is Poisson(intensity * (t1 - t0)) and times are i.i.d. uniform,
    which is the same law as a homogeneous Poisson process on the interval.
    """
    if intensity < 0:
        raise ConfigurationError("jump intensity must be >= 0")
    count = int(stream_times.poisson(intensity * (t1 - t0))) if intensity > 0 else 0
    u = stream_times.random(count)
    # 1 - u lies in (0, 1], hence times in (t0, t1]
    times = t0 + (t1 - t0) * (1.0 - u)
    times = np.maximum(times, np.nextafter(t0, np.inf))
    times = np.sort(times, kind="stable")
    marks = mark_law.sample(stream_marks, count)
    return times, marks


@dataclass(frozen=True, eq=False)
class NoisePath:
    """Fine-grid Brownian increments plus an absolute-time jump list."""

    grid: GridSpec
    dW: np.ndarray
    jump_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    jump_marks: np.ndarray = field(default_factory=lambda: np.empty((0, 1)))

    def __post_init__(self):
        if self.dW.ndim != 2 or self.dW.shape[0] != self.grid.steps:
            raise ConfigurationError(
                f"expected {self.grid.steps} increments, got array of shape {self.dW.shape}"
            )
        if len(self.jump_times) != len(self.jump_marks):
            raise ConfigurationError("jump times and marks differ in length")

    @property
    def m(self) -> int:
        return self.dW.shape[1]

    @property
    def jumps(self) -> tuple[JumpEvent, ...]:
        return tuple(JumpEvent(float(t), z) for t, z in zip(self.jump_times, self.jump_marks))

    def same_as(self, other: NoisePath) -> bool:
        return (
            self.grid == other.grid
            and np.array_equal(self.dW, other.dW)
            and np.array_equal(self.jump_times, other.jump_times)
            and np.array_equal(self.jump_marks, other.jump_marks)
        )


def sum_blocks(dW: np.ndarray, factor: int) -> np.ndarray:
    """Sum consecutive blocks of ``factor`` increments along axis -2, left to right."""
    if factor == 1:
        return dW
    shape = dW.shape[:-2] + (dW.shape[-2] // factor, factor, dW.shape[-1])
    # cumsum accumulates sequentially, unlike np.sum's pairwise reduction
    return np.cumsum(dW.reshape(shape), axis=-2)[..., -1, :]


def coarsen(path: NoisePath, factor: int) -> NoisePath:
    grid = path.grid.coarsened(factor)
    if factor == 1:
        return path
    return NoisePath(grid, sum_blocks(path.dW, factor), path.jump_times, path.jump_marks)


def make_noise(base_seed: int, path_index: int, grid: GridSpec, m: int, levy) -> NoisePath:
    """The full noise realisation of one Monte Carlo path."""
    dW = sample_brownian(derive_stream(StreamKey(base_seed, path_index, Lane.BROWNIAN)), grid, m)
    times, marks = sample_jumps(
        derive_stream(StreamKey(base_seed, path_index, Lane.JUMP_TIMES)),
        derive_stream(StreamKey(base_seed, path_index, Lane.JUMP_MARKS)),
        levy.intensity,
        levy.mark_law,
        grid.t0,
        grid.t1,
    )
    return NoisePath(grid, dW, times, marks)


def interval_index(grid: GridSpec, times: np.ndarray) -> np.ndarray:
    """Index ``k`` of the grid interval ``(t_k, t_{k+1}]`` containing each time."""
    k = np.searchsorted(grid.times(), times, side="left") - 1
    return np.clip(k, 0, grid.steps - 1)
