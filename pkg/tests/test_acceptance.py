"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line that is printed in the pytest terminal
summary.  Run standalone with ``python tests/test_acceptance.py``.
Every Monte Carlo criterion uses ``SEED``, fixed before any run.
"""

import functools
import time
from dataclasses import replace

import numpy as np

from support import ACCEPTANCE, example2_first_segment, first_segment_noise
from tamed_levy import (
    ExperimentConfig,
    GridSpec,
    LevyModel,
    Problem,
    SchemeConfig,
    StandardNormal,
    builtin,
    coarsen,
    make_noise,
    simulate,
    simulate_delay,
    strong_error,
    tame,
)
from tamed_levy.harness import _estimate, one_step_displacement, sup_moment
from tamed_levy.model import DelayProblem, problem_names
from tamed_levy.scheme import simulate_many

SEED = 42


def _check(number, passed, detail, elapsed, budget):
    within = elapsed < budget
    ACCEPTANCE.append((number, passed and within, f"{detail}; {elapsed:.2f}s (budget {budget}s)"))
    assert passed, detail
    assert within, f"runtime {elapsed:.1f}s exceeds {budget}s"


def _inversions(values):
    return sum(b >= a for a, b in zip(values, values[1:]))


def test_criterion_1_taming_invariants():
    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    count = 10_000
    b = rng.standard_normal((count, 3)) * 10.0 ** rng.uniform(-8, 8, (count, 1))
    n = rng.integers(1, 2**20, count).astype(float)
    theta = rng.uniform(0, 0.5, count)
    theta[theta == 0] = 0.5
    tb = tame(b, n, theta)
    norm_b = np.linalg.norm(b, axis=1)
    norm_tb = np.linalg.norm(tb, axis=1)
    bound_ok = np.all(norm_tb <= np.minimum(n**theta, norm_b) + 1e-12)
    c = norm_tb / norm_b
    direction_ok = np.all((c > 0) & (c <= 1)) and np.allclose(tb, c[:, None] * b, rtol=1e-12, atol=0)
    zero_ok = tame(0.0, 8, 0.5) == 0.0 and np.all(tame(np.zeros((4, 3)), 8, 0.5) == 0.0)
    passed = bool(bound_ok and direction_ok and zero_ok)
    _check(1, passed, f"bound={bound_ok} direction={direction_ok} zero={zero_ok}", time.perf_counter() - start, 1)


def test_criterion_2_untamed_blowup_tamed_stable():
    start = time.perf_counter()
    x0 = 5.0
    p = replace(builtin("quintic_ode"), x0=np.array([x0]))
    noise = make_noise(SEED, 0, GridSpec(0.0, 1.0, 64), 1, p.levy)
    untamed = simulate(p, SchemeConfig(64, tamed=False), noise)
    first_bad = int(np.argmax(~np.isfinite(untamed.states[:, 0])))
    blew_up = untamed.diverged and untamed.times[first_bad] < 1.0
    tamed = simulate(p, SchemeConfig(64), noise)
    exact = (x0**-4 + 4) ** -0.25
    end = tamed.terminal[0]
    passed = blew_up and not tamed.diverged and 0 <= end <= 1 and abs(end - exact) <= 0.25
    _check(
        2, passed,
        f"untamed non-finite at t={untamed.times[first_bad]:.4f}; tamed x(1)={end:.6f}, exact {exact:.6f}",
        time.perf_counter() - start, 1,
    )


@functools.lru_cache(maxsize=None)
def _criterion3_report(workers):
    cfg = ExperimentConfig("example1", tuple(range(5, 11)), 15, paths=1000, base_seed=SEED, theta=0.5)
    start = time.perf_counter()
    report = strong_error(cfg, workers=workers)
    return report, time.perf_counter() - start


def test_criterion_3_strong_rate_example1():
    report, elapsed = _criterion3_report(1)
    inv = _inversions(report.l2_errors)
    r2, r1 = report.fitted_rate_l2, report.fitted_rate_l1
    passed = inv <= 1 and 0.4 <= r2 <= 0.8 and 0.4 <= r1 <= 0.8
    errs = ", ".join(f"{e:.4g}" for e in report.l2_errors)
    _check(3, passed, f"L2 errors [{errs}], inversions {inv}, rate L2 {r2:.3f}, L1 {r1:.3f}", elapsed, 300)


def test_criterion_4_one_step_error_order():
    start = time.perf_counter()
    est = one_step_displacement(builtin("example1"), [64, 128, 256], 1000, base_seed=SEED)
    ratios = [est[64] / est[128], est[128] / est[256]]
    passed = all(1.5 <= r <= 3 for r in ratios)
    _check(4, passed, f"max_k E|mid - left|^2 {est}, ratios {[round(r, 3) for r in ratios]}", time.perf_counter() - start, 120)


def test_criterion_5_moment_stability():
    start = time.perf_counter()
    est = sup_moment(builtin("example1"), [2**k for k in range(4, 11)], 1000, base_seed=SEED)
    values = np.array(list(est.values()))
    ratio = values.max() / values.min()
    passed = bool(np.all(np.isfinite(values)) and ratio < 2)
    shown = {n: round(v, 3) for n, v in est.items()}
    _check(5, passed, f"E sup|x|^2 {shown}, max/min {ratio:.3f}", time.perf_counter() - start, 120)


def test_criterion_6_martingale_compensation():
    start = time.perf_counter()
    p = Problem(
        d=1, m=1,
        drift=lambda t, x: np.zeros_like(x),
        diffusion=lambda t, x: np.zeros(x.shape + (1,)),
        jump_coeff=lambda t, x, z: x * z,
        compensator_mean=lambda t, x: np.zeros_like(x),
        levy=LevyModel(3.0, StandardNormal()),
        x0=[1.0], t0=0.0, t1=1.0,
    )
    grid = GridSpec(0.0, 1.0, 16)
    noises = [make_noise(SEED, i, grid, 1, p.levy) for i in range(10_000)]
    xT = simulate_many(p, SchemeConfig(16), noises)[:, -1, 0]
    se = xT.std(ddof=1) / np.sqrt(xT.size)
    passed = abs(xT.mean() - 1.0) <= 4 * se
    _check(6, passed, f"terminal mean {xT.mean():.5f} +/- {se:.5f}", time.perf_counter() - start, 30)


def test_criterion_7_coupling_exactness():
    start = time.perf_counter()
    identical = True
    for name in problem_names():
        p = builtin(name)
        fine = make_noise(SEED, 0, GridSpec(p.t0, p.t1, 256), p.m, p.levy)
        run = simulate_delay if isinstance(p, DelayProblem) else simulate
        for n in (16, 64):
            a = run(p, SchemeConfig(n), fine)
            b = run(p, SchemeConfig(n), coarsen(fine, 256 // n))
            identical &= np.array_equal(a.states, b.states)
    zero = all(
        _estimate(ExperimentConfig(name, (6,), 6, paths=2, base_seed=SEED)).levels[0].l2_error == 0.0
        for name in problem_names()
    )
    _check(7, bool(identical and zero), f"bit-identical={identical}, equal-level error zero={zero}", time.perf_counter() - start, 1)


def test_criterion_8_delay_reduction_and_rate():
    start = time.perf_counter()
    ex2 = builtin("example2")
    full = make_noise(SEED, 0, GridSpec(0.0, 2.0, 4096), 1, ex2.levy)
    half = first_segment_noise(full)
    frozen_ok = all(
        np.array_equal(
            simulate(example2_first_segment(n), SchemeConfig(n), half).states,
            simulate_delay(ex2, SchemeConfig(n), full).states[: n + 1],
        )
        for n in (32, 256, 4096)
    )
    report = strong_error(ExperimentConfig("example2", (5, 6, 7, 8), 12, paths=300, base_seed=SEED), workers=1)
    decreasing = _inversions(report.l2_errors) == 0
    rate = report.fitted_rate_l2
    passed = frozen_ok and decreasing and 0.3 <= rate <= 0.8
    errs = ", ".join(f"{e:.4g}" for e in report.l2_errors)
    _check(8, passed, f"first segment identical={frozen_ok}; L2 errors [{errs}], rate {rate:.3f}", time.perf_counter() - start, 300)


def test_criterion_9_worker_determinism():
    serial, elapsed_serial = _criterion3_report(1)
    parallel, elapsed_parallel = _criterion3_report(8)
    same = serial.to_csv().encode() == parallel.to_csv().encode()
    _check(9, same, f"1 vs 8 workers byte-identical={same}", max(elapsed_serial, elapsed_parallel), 300)


if __name__ == "__main__":
    import sys

    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failures += 1
    for number, passed, detail in sorted(ACCEPTANCE):
        print(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}")
    sys.exit(1 if failures else 0)
