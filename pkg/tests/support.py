"""Shared helpers for the test suite."""

import numpy as np

from tamed_levy import GridSpec, Problem, builtin

# (criterion, passed, detail) rows printed in the pytest terminal summary
ACCEPTANCE = []


def example2_first_segment(n: int) -> Problem:
    """Example 2 on [0, 1] with y_t = xi_{t-1} = t frozen at the step's left endpoint."""
    ex2 = builtin("example2")

    def as_y(t, x):
        return np.full(x.shape + (1,), t)

    def jump(t, x, z):
        left = np.floor(np.asarray(t) * n - 1e-9) / n
        return ex2.jump_coeff(t, left.reshape(-1, 1, 1) + 0 * x[..., np.newaxis], x, z)

    return Problem(
        d=1, m=1,
        drift=lambda t, x: ex2.drift(t, as_y(t, x), x),
        diffusion=lambda t, x: ex2.diffusion(t, as_y(t, x), x),
        jump_coeff=jump,
        compensator_mean=lambda t, x: ex2.compensator_mean(t, as_y(t, x), x),
        levy=ex2.levy,
        x0=[1.0], t0=0.0, t1=1.0,
    )


def first_segment_noise(full):
    keep = full.jump_times <= 1.0
    n = full.grid.n
    return type(full)(GridSpec(0.0, 1.0, n), full.dW[:n], full.jump_times[keep], full.jump_marks[keep])
