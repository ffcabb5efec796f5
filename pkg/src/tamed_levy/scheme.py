"""Tamed explicit Euler scheme for jump-diffusion SDEs.

One step from grid time ``t_k`` with state ``x_k``::

    x_{k+1} = x_k + tame(b(t_k, x_k)) dt + sigma(t_k, x_k) dW_k
              + sum_{events in (t_k, t_k + dt]} gamma(t_e, x_k, z_e)
              - intensity * E[gamma(t_k, x_k, Z)] dt

Only the drift is tamed; diffusion and jump coefficients are used as given.
States are propagated for a batch of paths at once, but every operation is
elementwise per path, so a path's trajectory does not depend on the batch it
was simulated in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .model import DelayProblem, compensator
from .noise import GridSpec, NoisePath, interval_index, sum_blocks

_SNAP = 1e-9


@dataclass(frozen=True)
class SchemeConfig:
    n: int
    theta: float = 0.5
    tamed: bool = True

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigurationError(f"n must be a positive integer, got {self.n}")
        if self.tamed and not 0 < self.theta <= 0.5:
            raise ConfigurationError(f"taming exponent must lie in (0, 1/2], got {self.theta}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    grid: GridSpec
    states: np.ndarray  # (K+1, d)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times()

    @property
    def terminal(self) -> np.ndarray:
        return self.states[-1]

    @property
    def diverged(self) -> bool:
        return not np.all(np.isfinite(self.states))


def kappa(n: int, t: float, t0: float = 0.0) -> float:
    """Largest grid point ``t0 + k/n`` not exceeding ``t``.

    Values within a relative 1e-9 of a grid point are treated as on it, so the
    map is idempotent on floating-point grid times.
    """
    r = n * (t - t0)
    k = math.floor(r)
    nearest = round(r)
    if abs(r - nearest) <= _SNAP * max(1.0, abs(r)):
        k = nearest
    return t0 + k / n


def _norm(b: np.ndarray) -> np.ndarray:
    if b.shape[-1] == 1:
        return np.abs(b[..., 0])
    scale = np.max(np.abs(b), axis=-1)
    safe = np.where(scale > 0, scale, 1.0)
    r = b / safe[..., np.newaxis]
    return scale * np.sqrt(np.sum(r * r, axis=-1))


def tame(b, n: int, theta: float):
    """``b / (1 + n**-theta * |b|)`` with ``|.|`` the Euclidean norm over the last axis."""
    arr = np.asarray(b, dtype=float)
    if arr.ndim == 0:
        return float(arr / (1.0 + n ** (-theta) * abs(arr)))
    return arr / (1.0 + n ** (-theta) * _norm(arr))[..., np.newaxis]


def _euler_update(x, b, sig, dW, jump_sum, comp, dt, config):
    if config.tamed:
        b = tame(b, config.n, config.theta)
    noise = sig[:, :, 0] * dW[:, np.newaxis, 0]
    for j in range(1, sig.shape[2]):
        noise = noise + sig[:, :, j] * dW[:, np.newaxis, j]
    return x + b * dt + noise + jump_sum - comp * dt


@dataclass
class _Events:
    """Jump events of a batch, sorted by grid interval (stable in path, then time)."""

    k: np.ndarray
    path: np.ndarray
    time: np.ndarray
    mark: np.ndarray
    bounds: np.ndarray

    @classmethod
    def collect(cls, grid: GridSpec, noises, mark_dim: int) -> _Events:
        paths = [np.full(len(nz.jump_times), p) for p, nz in enumerate(noises)]
        times = np.concatenate([nz.jump_times for nz in noises]) if noises else np.empty(0)
        marks = [np.asarray(nz.jump_marks, dtype=float).reshape(-1, mark_dim) for nz in noises]
        path = np.concatenate(paths).astype(np.intp) if paths else np.empty(0, np.intp)
        mark = np.concatenate(marks) if marks else np.empty((0, mark_dim))
        k = interval_index(grid, times)
        order = np.argsort(k, kind="stable")
        k = k[order]
        bounds = np.searchsorted(k, np.arange(grid.steps + 1), side="left")
        return cls(k, path[order], times[order], mark[order], bounds)

    def at(self, k: int) -> slice:
        return slice(self.bounds[k], self.bounds[k + 1])


def _jump_sum(shape, events: _Events, sl: slice, jump_values):
    total = np.zeros(shape)
    if sl.stop > sl.start:
        pidx = events.path[sl]
        np.add.at(total, pidx, jump_values(events.time[sl], pidx, events.mark[sl]))
    return total


def _mark_dim(problem, noises) -> int:
    for nz in noises:
        if len(nz.jump_marks):
            return np.asarray(nz.jump_marks).reshape(len(nz.jump_marks), -1).shape[1]
    return getattr(problem.levy.mark_law, "dim", 1)


def prepare_noise(problem, config: SchemeConfig, noises) -> tuple[GridSpec, np.ndarray, _Events]:
    """Coarsen a batch of fine noise paths to the scheme grid and stack them."""
    if not noises:
        raise ConfigurationError("need at least one noise path")
    fine = noises[0].grid
    for nz in noises:
        if nz.grid != fine:
            raise ConfigurationError("all noise paths in a batch must share one grid")
    if abs(fine.t0 - problem.t0) > 0 or abs(fine.t1 - problem.t1) > 0:
        raise ConfigurationError(
            f"noise grid [{fine.t0}, {fine.t1}] does not cover problem horizon "
            f"[{problem.t0}, {problem.t1}]"
        )
    if fine.n % config.n:
        raise ConfigurationError(
            f"noise resolution n={fine.n} is not a multiple of scheme resolution n={config.n}"
        )
    if noises[0].m != problem.m:
        raise ConfigurationError(f"noise has {noises[0].m} Brownian coordinates, problem needs {problem.m}")
    factor = fine.n // config.n
    grid = fine.coarsened(factor)
    dW = sum_blocks(np.stack([nz.dW for nz in noises]), factor)
    return grid, dW, _Events.collect(grid, noises, _mark_dim(problem, noises))


def simulate_many(problem, config: SchemeConfig, noises, midpoints: bool = False):
    """Simulate one path per noise realisation; returns states of shape ``(P, K+1, d)``.

    With ``midpoints=True`` also returns the continuous-time scheme value at
    each interval midpoint ``t_k + dt/2``, shape ``(P, K, d)``.  This needs
    noise resolved at ``2n`` or finer.
    """
    if isinstance(problem, DelayProblem):
        raise ConfigurationError("delay problems are simulated with delay.simulate_delay")
    grid, dW, events = prepare_noise(problem, config, noises)
    P, K, d = len(noises), grid.steps, problem.d
    lam = problem.levy.intensity
    dt = grid.dt
    states = np.empty((P, K + 1, d))
    states[:, 0] = problem.x0
    if midpoints:
        if noises[0].grid.n % (2 * config.n):
            raise ConfigurationError("midpoint reconstruction needs noise at resolution 2n")
        half_grid, half_dW, half_events = prepare_noise(problem, SchemeConfig(2 * config.n, config.theta, config.tamed), noises)
        mids = np.empty((P, K, d))

    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(K):
            t = grid.time(k)
            x = states[:, k]
            b = problem.drift(t, x)
            sig = problem.diffusion(t, x)
            comp = lam * problem.compensator_mean(t, x)

            def jump_values(times, pidx, marks, x=x):
                return problem.jump_coeff(times, x[pidx], marks)

            J = _jump_sum((P, d), events, events.at(k), jump_values)
            states[:, k + 1] = _euler_update(x, b, sig, dW[:, k], J, comp, dt, config)
            if midpoints:
                Jh = _jump_sum((P, d), half_events, half_events.at(2 * k), jump_values)
                mids[:, k] = _euler_update(x, b, sig, half_dW[:, 2 * k], Jh, comp, 0.5 * dt, config)
    if midpoints:
        return states, mids
    return states


def simulate(problem, config: SchemeConfig, noise: NoisePath) -> Trajectory:
    states = simulate_many(problem, config, [noise])[0]
    return Trajectory(noise.grid.coarsened(noise.grid.n // config.n), states)


def step(x_k, t_k: float, dt: float, dW_k, jumps_k, problem, config: SchemeConfig) -> np.ndarray:
    """A single scheme step for one path.

    ``jumps_k`` is a sequence of :class:`~tamed_levy.noise.JumpEvent` lying in
    ``(t_k, t_k + dt]``.
    """
    if abs(dt - 1.0 / config.n) > 1e-12 * dt:
        raise ConfigurationError(f"dt={dt} does not match 1/n for n={config.n}")
    x = np.asarray(x_k, dtype=float).reshape(1, problem.d)
    dW = np.asarray(dW_k, dtype=float).reshape(1, problem.m)
    J = np.zeros_like(x)
    for ev in jumps_k:
        if not t_k < ev.time <= t_k + dt:
            raise ConfigurationError(f"jump at {ev.time} lies outside ({t_k}, {t_k + dt}]")
    if jumps_k:
        times = np.array([ev.time for ev in jumps_k])
        marks = np.stack([np.atleast_1d(np.asarray(ev.mark, dtype=float)) for ev in jumps_k])
        np.add.at(J, np.zeros(len(times), np.intp), problem.jump_coeff(times, np.repeat(x, len(times), 0), marks))
    with np.errstate(over="ignore", invalid="ignore"):
        out = _euler_update(
            x,
            problem.drift(t_k, x),
            problem.diffusion(t_k, x),
            dW,
            J,
            compensator(problem, t_k, x),
            dt,
            config,
        )
    return out[0]
