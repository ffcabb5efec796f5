import numpy as np
import pytest

from tamed_levy import ConfigurationError, LevyModel, PointMass, Problem, StandardNormal, Uniform, builtin, compensator
from tamed_levy.model import problem_names

PROBES = np.array([[-2.0], [-0.5], [0.0], [0.7], [3.0]])


def test_mark_law_means():
    assert StandardNormal().mean.tolist() == [0.0]
    assert Uniform(1.0, 4.0).mean.tolist() == [2.5]
    assert PointMass((2.0, -1.0)).mean.tolist() == [2.0, -1.0]


def test_negative_intensity_rejected():
    with pytest.raises(ConfigurationError):
        LevyModel(-1.0)


def test_unknown_builtin_lists_names():
    with pytest.raises(ConfigurationError) as err:
        builtin("nope")
    for name in problem_names():
        assert name in str(err.value)


def test_example1_values():
    p = builtin("example1")
    assert p.drift(0.0, np.array([[1.0]]))[0, 0] == -1.0
    assert p.levy.intensity == 3.0 and isinstance(p.levy.mark_law, StandardNormal)
    assert p.x0.tolist() == [1.0] and (p.t0, p.t1) == (0.0, 1.0)
    assert np.all(compensator(p, 0.3, PROBES) == 0)


def test_example2_initial_segment():
    p = builtin("example2")
    assert p.xi(-1.0)[0] == 0.0
    assert p.xi(0.0)[0] == 1.0
    assert p.T == 2.0


def test_quintic_ode_has_no_noise():
    p = builtin("quintic_ode")
    assert np.all(p.diffusion(0.5, PROBES) == 0)
    assert p.levy.intensity == 0
    q = builtin("example1_nojumps")
    assert np.array_equal(q.diffusion(0.5, PROBES)[..., 0], PROBES)
    assert np.all(q.jump_coeff(np.zeros(5), PROBES, np.ones((5, 1))) == 0)


def test_point_mass_compensator():
    p = Problem(
        d=1, m=1,
        drift=lambda t, x: 0 * x,
        diffusion=lambda t, x: np.zeros(x.shape + (1,)),
        jump_coeff=lambda t, x, z: x * z,
        compensator_mean=lambda t, x: x * 1.0,
        levy=LevyModel(2.0, PointMass((1.0,))),
        x0=[1.0], t0=0.0, t1=1.0,
    )
    assert compensator(p, 0.0, PROBES).tolist() == (2 * PROBES).tolist()
    with pytest.raises(ConfigurationError):
        compensator(p, 0.0, PROBES, y=PROBES)


@pytest.mark.parametrize("name", problem_names())
def test_compensator_matches_monte_carlo(name):
    p = builtin(name)
    rng = np.random.default_rng(11)
    size = 100_000
    marks = p.levy.mark_law.sample(rng, size)
    for x in PROBES[:, 0]:
        xs = np.full((size, 1), x)
        t = np.full(size, 0.5)
        if name == "example2":
            ys = np.full((size, 1, 1), 0.5 * x + 0.3)
            g = p.jump_coeff(t, ys, xs, marks)
            expected = compensator(p, 0.5, xs[:1], ys[:1])[0]
        else:
            g = p.jump_coeff(t, xs, marks)
            expected = compensator(p, 0.5, xs[:1])[0]
        sample = p.levy.intensity * g
        se = sample.std(axis=0) / np.sqrt(size)
        assert np.all(np.abs(sample.mean(axis=0) - expected) <= 4 * se + 1e-15)


def test_example1_one_sided_growth():
    b = builtin("example1").drift(0.0, PROBES)
    np.testing.assert_allclose(PROBES * b, -(PROBES**6), rtol=1e-14)
    assert np.all(PROBES * b <= 1 + PROBES**2)


def test_example2_lag_within_bounds():
    p = builtin("example2")
    (lag,) = p.delay_lags
    for t in np.arange(0, 2 + 1e-12, 1 / 64):
        assert -p.H <= lag(t) <= np.floor(t / p.h) * p.h
