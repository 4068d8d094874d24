import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from qsumlab.baselines import (
    ClassicalAlgorithm,
    PiecewiseLinear,
    TentBump,
    adversarial_pair,
    certify_adversarial_error,
    entropy_cells,
    entropy_interval,
    info_complexity_boolean,
    lipschitz_points_for,
    lipschitz_quadrature,
    midpoint_error_bound,
    midpoints,
    monte_carlo,
    random_lipschitz_function,
    randomized_info_complexity,
    randomized_info_error_bound,
    rescale_lipschitz,
)


def test_algorithm_validation():
    with pytest.raises(ValueError):
        ClassicalAlgorithm("worst-case", 3)
    with pytest.raises(ValueError):
        ClassicalAlgorithm("randomized", 3)
    with pytest.raises(ValueError):
        ClassicalAlgorithm("adaptive", 3, points=np.zeros(3))


def test_midpoints():
    np.testing.assert_allclose(midpoints(4), [0.125, 0.375, 0.625, 0.875])


def test_abs_example_exact():
    # |x - 1/3| on 25 midpoints against an exact rational sum
    n = 25
    exact = sum(abs(Fraction(2 * j - 1, 2 * n) - Fraction(1, 3)) for j in range(1, n + 1)) / n
    q = lipschitz_quadrature(lambda x: np.abs(x - 1 / 3), n)
    assert q == pytest.approx(float(exact), abs=1e-15)
    assert abs(q - 5 / 18) <= midpoint_error_bound(n)


def test_midpoint_bound_attained_by_tent():
    n = 8
    # distance to the nearest midpoint: the extremal 1-Lipschitz function
    f = lambda x: np.min(np.abs(np.asarray(x)[:, None] - midpoints(n)[None, :]), axis=1)
    exact, _ = integrate.quad(lambda t: f(np.array([t]))[0], 0, 1, points=list(midpoints(n)), limit=200)
    assert exact - lipschitz_quadrature(f, n) == pytest.approx(midpoint_error_bound(n), abs=1e-12)


def test_random_lipschitz_within_bound():
    rng = np.random.default_rng(0)
    for _ in range(50):
        g = random_lipschitz_function(rng)
        assert g.lipschitz() <= 1 + 1e-12
        n = lipschitz_points_for(0.01)
        assert abs(lipschitz_quadrature(g, n) - float(g.exact_integral())) <= 0.01


def test_points_for():
    assert lipschitz_points_for(0.01) == 25
    assert lipschitz_points_for(0.5) == 2


def test_rescale():
    g, f0 = rescale_lipschitz(lambda x: 0.3 + np.sin(x))
    assert f0 == pytest.approx(0.3)
    x = np.linspace(0, 1, 11)
    assert np.all(np.abs(g(x)) <= x + 1e-15)


def test_piecewise_linear_integral():
    p = PiecewiseLinear(np.array([0.0, 0.5, 1.0]), np.array([0.0, 1.0, 0.0]))
    assert p.exact_integral() == Fraction(1, 2)
    assert p.integral() == 0.5


def test_monte_carlo_rate():
    f = lambda x: np.cos(np.sum(x, axis=1))
    truth = float(np.real(((np.exp(1j) - 1) / 1j) ** 2))
    errs = [monte_carlo(f, 400, 2, s) - truth for s in range(400)]
    rms = math.sqrt(np.mean(np.square(errs)))
    assert rms <= 1 / math.sqrt(400)
    assert rms > 0.2 / math.sqrt(400)


@pytest.mark.parametrize("d,n", [(1, 10), (1, 64), (2, 30), (3, 20)])
def test_adversarial_certificate(d, n):
    pts = np.random.default_rng(n).random((n, d))
    f1, f2 = adversarial_pair(pts, 0.2)
    assert np.all(f1(pts) == 0) and np.all(f2(pts) == 0)
    assert certify_adversarial_error(pts, 0.2) >= 0.8


def test_tent_integral_against_quadrature():
    b = TentBump(np.array([[0.2], [0.6]]), 0.05)
    ref, _ = integrate.quad(lambda t: b(np.array([[t]]))[0], 0, 1, points=[0.15, 0.2, 0.25, 0.55, 0.6, 0.65])
    assert b.integral_bound() == pytest.approx(ref, abs=1e-12)


def test_adversarial_gap_validation():
    with pytest.raises(ValueError):
        adversarial_pair(np.array([0.5]), 1.5)


def test_info_complexity():
    assert info_complexity_boolean(0.1, 100) == 80
    assert info_complexity_boolean(0.5, 100) == 0
    assert info_complexity_boolean(0.0, 7) == 7


def test_entropy():
    assert entropy_cells(0.01, 0.5) == 50
    assert entropy_interval(0.01, 0.5) == pytest.approx(5.64, abs=0.005)
    with pytest.raises(ValueError):
        entropy_cells(0.0, 1.0)


def test_randomized_info_bound():
    assert randomized_info_error_bound(0) == pytest.approx(0.2495)
    b = [randomized_info_error_bound(n) for n in (1, 10, 100, 1000)]
    assert all(x > y for x, y in zip(b, b[1:]))
    # decays like n**-1/2
    assert 0.1 < b[3] * math.sqrt(1000) < 0.5
    assert randomized_info_error_bound(10, N=10) == 0.0
    assert [randomized_info_complexity(e) for e in (0.2, 0.1, 0.05, 0.01)] == [1, 1, 5, 115]
