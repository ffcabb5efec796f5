"""Problem definitions and the built-in problem registry.

Coefficient functions are vectorised over a leading batch axis of paths:

* ``drift(t, x)`` with ``x`` of shape ``(P, d)`` returns ``(P, d)``
* ``diffusion(t, x)`` returns ``(P, d, m)``
* ``jump_coeff(t, x, z)`` takes per-event times ``(E,)``, states ``(E, d)``
  and marks ``(E, r)`` and returns ``(E, d)``
* ``compensator_mean(t, x)`` returns ``E[jump_coeff(t, x, Z)]`` under the mark
  law, shape ``(P, d)``; the scheme multiplies it by the intensity.

Delay problems take an extra ``y`` argument of shape ``(P, d, k)`` right
after ``t`` (for the jump coefficient, ``(E, d, k)``).

Built-in coefficients use repeated multiplication instead of ``**`` so that a
path's result never depends on which numpy kernel handled its batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError
from .noise import standard_normal

Array = np.ndarray


@dataclass(frozen=True)
class StandardNormal:
    dim = 1

    @property
    def mean(self) -> Array:
        return np.zeros(1)

    def sample(self, rng: np.random.Generator, size: int) -> Array:
        return standard_normal(rng, (size, 1))


@dataclass(frozen=True)
class Uniform:
    a: float
    b: float
    dim = 1

    @property
    def mean(self) -> Array:
        return np.array([(self.a + self.b) / 2])

    def sample(self, rng, size):
        return rng.uniform(self.a, self.b, (size, 1))


@dataclass(frozen=True)
class PointMass:
    z: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(float(v) for v in np.atleast_1d(self.z)))

    @property
    def dim(self) -> int:
        return len(self.z)

    @property
    def mean(self) -> Array:
        return np.array(self.z)

    def sample(self, rng, size):
        return np.tile(np.array(self.z), (size, 1))


MarkLaw = StandardNormal | Uniform | PointMass


@dataclass(frozen=True)
class LevyModel:
    intensity: float = 0.0
    mark_law: MarkLaw = StandardNormal()

    def __post_init__(self):
        if not (0 <= self.intensity < math.inf):
            raise ConfigurationError(f"intensity must be finite and >= 0, got {self.intensity}")


def _zero_jump(t, x, z):
    return np.zeros_like(x)


def _zero_vec(t, x):
    return np.zeros_like(x)


@dataclass(frozen=True)
class Problem:
    d: int
    m: int
    drift: Callable
    diffusion: Callable
    jump_coeff: Callable
    compensator_mean: Callable
    levy: LevyModel
    x0: Array
    t0: float
    t1: float
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float).reshape(self.d))
        if not self.t0 < self.t1:
            raise ConfigurationError(f"need t0 < t1, got [{self.t0}, {self.t1}]")


@dataclass(frozen=True)
class FixedLag:
    """``delta(t) = t - h``."""

    h: float

    def __call__(self, t):
        return t - self.h


@dataclass(frozen=True)
class PiecewiseFloor:
    """``delta(t) = floor(t/h) * h``."""

    h: float

    def __call__(self, t):
        return math.floor(t / self.h + 1e-12) * self.h


DelayLag = FixedLag | PiecewiseFloor


@dataclass(frozen=True)
class DelayProblem:
    d: int
    m: int
    drift: Callable
    diffusion: Callable
    jump_coeff: Callable
    compensator_mean: Callable
    levy: LevyModel
    delay_lags: tuple
    h: float
    H: float
    xi: Callable[[float], Array]
    T: float
    name: str = "custom_delay"

    def __post_init__(self):
        if not self.T > 0:
            raise ConfigurationError("delay problems run on [0, T] with T > 0")
        if self.h <= 0 or self.H < 0:
            raise ConfigurationError("need h > 0 and H >= 0")
        object.__setattr__(self, "delay_lags", tuple(self.delay_lags))

    @property
    def t0(self) -> float:
        return 0.0

    @property
    def t1(self) -> float:
        return self.T

    @property
    def x0(self) -> Array:
        return np.asarray(self.xi(0.0), dtype=float).reshape(self.d)


def compensator(problem, t, x, y=None):
    """``intensity * E[jump_coeff(t, x, Z)]``, the drift removed by compensation."""
    is_delay = isinstance(problem, DelayProblem)
    if (y is not None) != is_delay:
        raise ConfigurationError("pass y exactly when the problem has delays")
    lam = problem.levy.intensity
    if is_delay:
        return lam * problem.compensator_mean(t, y, x)
    return lam * problem.compensator_mean(t, x)


# Example 1: dx = -x^5 dt + x dw + int x z N~(dt, dz), x0 = 1 on [0, 1]


def _quintic_drift(t, x):
    x2 = x * x
    return -(x2 * x2 * x)


def _identity_diffusion(t, x):
    return x[..., np.newaxis]


def _zero_diffusion(t, x):
    return np.zeros(x.shape + (1,))


def _linear_jump(t, x, z):
    return x * z


def _example1(jumps=True, noise=True) -> Problem:
    return Problem(
        d=1,
        m=1,
        drift=_quintic_drift,
        diffusion=_identity_diffusion if noise else _zero_diffusion,
        jump_coeff=_linear_jump if jumps else _zero_jump,
        # E[x Z] = x E[Z] = 0 for standard normal marks
        compensator_mean=_zero_vec,
        levy=LevyModel(3.0 if jumps else 0.0, StandardNormal()),
        x0=np.array([1.0]),
        t0=0.0,
        t1=1.0,
    )


# Example 2: dx = (x - x^3 + y^2) dt + (x + y^3) dw + int (x + y) z N~(dt, dz),
# y_t = x_{t-1} on [0, 2], xi_t = t + 1 on [-1, 0]


def _ex2_drift(t, y, x):
    y0 = y[..., 0]
    return x - x * x * x + y0 * y0


def _ex2_diffusion(t, y, x):
    y0 = y[..., 0]
    return (x + y0 * y0 * y0)[..., np.newaxis]


def _ex2_jump(t, y, x, z):
    return (x + y[..., 0]) * z


def _ex2_compensator_mean(t, y, x):
    return np.zeros_like(x)


def _ex2_xi(t):
    return np.array([t + 1.0])


def _example2() -> DelayProblem:
    return DelayProblem(
        d=1,
        m=1,
        drift=_ex2_drift,
        diffusion=_ex2_diffusion,
        jump_coeff=_ex2_jump,
        compensator_mean=_ex2_compensator_mean,
        levy=LevyModel(3.0, StandardNormal()),
        delay_lags=(FixedLag(1.0),),
        h=1.0,
        H=1.0,
        xi=_ex2_xi,
        T=2.0,
    )


_REGISTRY = {
    "example1": lambda: _example1(),
    "example1_nojumps": lambda: _example1(jumps=False),
    "quintic_ode": lambda: _example1(jumps=False, noise=False),
    "example2": _example2,
}

DESCRIPTIONS = {
    "example1": "dx = -x^5 dt + x dw + int x z N~(dt,dz); x0=1, t in [0,1], N(0,1) marks, intensity 3",
    "example1_nojumps": "example1 without the jump term",
    "quintic_ode": "dx = -x^5 dt; x0=1, t in [0,1]",
    "example2": "delay SDE (x - x^3 + y^2)dt + (x + y^3)dw + int (x+y) z N~; y_t = x_{t-1}, t in [0,2]",
}


def problem_names() -> list[str]:
    return list(_REGISTRY)


def builtin(name: str):
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown problem {name!r}; valid names: {', '.join(_REGISTRY)}"
        ) from None
    problem = factory()
    object.__setattr__(problem, "name", name)
    return problem
