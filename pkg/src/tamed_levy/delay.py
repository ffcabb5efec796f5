"""Tamed Euler scheme for stochastic delay differential equations.

The delayed argument ``y_k = (x_{delta_1(t_k)}, ..., x_{delta_k(t_k)})`` is
read from a history buffer holding the initial segment ``xi`` sampled on
``[-H, 0]`` followed by the states computed so far.  Delay times are snapped
to the nearest grid point on the left using exact rational arithmetic.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import ConfigurationError, InvariantError
from .model import DelayProblem, FixedLag, PiecewiseFloor
from .noise import GridSpec, NoisePath
from .scheme import SchemeConfig, Trajectory, _euler_update, _jump_sum, prepare_noise


def _grid_multiple(value: float, n: int, what: str) -> int:
    steps = Fraction(value) * n
    if steps.denominator != 1:
        raise ConfigurationError(f"{what}*n must be an integer ({what}={value}, n={n})")
    return int(steps)


def _delay_index(lag, k: int, n: int) -> int:
    """Grid index (relative to t=0) of ``kappa(delta(t_k))`` for ``t_k = k/n``."""
    t = Fraction(k, n)
    if isinstance(lag, FixedLag):
        delayed = t - Fraction(lag.h)
    elif isinstance(lag, PiecewiseFloor):
        h = Fraction(lag.h)
        delayed = math.floor(t / h) * h
    else:
        raise ConfigurationError(f"unsupported delay lag {lag!r}")
    return math.floor(delayed * n)


class History:
    """Per-path state buffer on ``[-H, T]`` at scheme resolution.

    ``values`` has shape ``(P, H*n + K + 1, d)``; grid time ``t_k = k/n`` sits
    at row ``offset + k``.  Rows past :attr:`frontier` are unfilled.
    """

    def __init__(self, grid: GridSpec, H: float, xi, d: int, paths: int = 1):
        if grid.t0 != 0:
            raise ConfigurationError("delay histories start at t=0")
        self.grid = grid
        self.offset = _grid_multiple(H, grid.n, "H")
        self.H = H
        self.values = np.full((paths, self.offset + grid.steps + 1, d), np.nan)
        for i in range(self.offset + 1):
            self.values[:, i] = np.asarray(xi(-H + i / grid.n), dtype=float).reshape(d)
        self.frontier = 0

    def push(self, k: int, x: np.ndarray):
        if k != self.frontier + 1:
            raise InvariantError(f"history filled out of order: got step {k}, frontier {self.frontier}")
        self.values[:, self.offset + k] = x
        self.frontier = k

    def at_index(self, i: int) -> np.ndarray:
        if i < -self.offset:
            raise ConfigurationError(f"delayed time {i / self.grid.n} is before -H = {-self.H}")
        if i > self.frontier:
            raise InvariantError(
                f"delayed read at step {i} beyond computed frontier {self.frontier}"
            )
        return self.values[:, self.offset + i]

    @property
    def states(self) -> np.ndarray:
        return self.values[:, self.offset :]


def lag_table(lags, n: int, K: int) -> np.ndarray:
    """Delay grid indices, shape ``(len(lags), K)``, for steps ``k = 0..K-1``."""
    return np.array([[_delay_index(lag, k, n) for k in range(K)] for lag in lags], dtype=np.intp).reshape(len(lags), K)


def resolve_delay(history: History, delay_lags, t_k: float) -> np.ndarray:
    """Delayed states ``y`` of shape ``(P, d, len(delay_lags))`` at grid time ``t_k``."""
    n = history.grid.n
    k = round(t_k * n)
    if abs(t_k * n - k) > 1e-9 * max(1.0, abs(t_k * n)):
        raise ConfigurationError(f"t={t_k} is not a grid time for n={n}")
    cols = [history.at_index(_delay_index(lag, k, n)) for lag in delay_lags]
    return np.stack(cols, axis=-1)


def check_delay_constraint(problem: DelayProblem, table: np.ndarray, n: int):
    """Every lag must satisfy ``-H <= delta(t) <= floor(t/h) h`` on the grid."""
    segment = _grid_multiple(problem.h, n, "h")
    lowest = -_grid_multiple(problem.H, n, "H")
    k = np.arange(table.shape[1])
    upper = (k // segment) * segment
    if np.any(table < lowest):
        raise ConfigurationError("a delay reaches back further than -H")
    if np.any(table > upper):
        raise ConfigurationError("a delay exceeds floor(t/h)*h, violating segment causality")


def simulate_delay_many(problem: DelayProblem, config: SchemeConfig, noises) -> np.ndarray:
    """States on ``[0, T]`` for a batch of paths, shape ``(P, K+1, d)``."""
    if not isinstance(problem, DelayProblem):
        raise ConfigurationError("simulate_delay needs a DelayProblem")
    grid, dW, events = prepare_noise(problem, config, noises)
    n, K, d, P = grid.n, grid.steps, problem.d, len(noises)
    _grid_multiple(problem.h, n, "h")
    table = lag_table(problem.delay_lags, n, K)
    check_delay_constraint(problem, table, n)

    history = History(grid, problem.H, problem.xi, d, P)
    lam = problem.levy.intensity
    dt = grid.dt
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(K):
            t = grid.time(k)
            x = history.at_index(k)
            y = np.stack([history.at_index(i) for i in table[:, k]], axis=-1)
            b = problem.drift(t, y, x)
            sig = problem.diffusion(t, y, x)
            comp = lam * problem.compensator_mean(t, y, x)

            def jump_values(times, pidx, marks, x=x, y=y):
                return problem.jump_coeff(times, y[pidx], x[pidx], marks)

            J = _jump_sum((P, d), events, events.at(k), jump_values)
            history.push(k + 1, _euler_update(x, b, sig, dW[:, k], J, comp, dt, config))
    return history.states.copy()


def simulate_delay(problem: DelayProblem, config: SchemeConfig, noise: NoisePath) -> Trajectory:
    states = simulate_delay_many(problem, config, [noise])[0]
    return Trajectory(noise.grid.coarsened(noise.grid.n // config.n), states)
