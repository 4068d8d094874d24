import numpy as np
import pytest
from scipy import integrate

from qsumlab.catalog import PROBLEMS, R0_FUNCTIONS, _r_functions, boolean_suite, list_catalog, real_suite


@pytest.mark.parametrize("name", sorted(R0_FUNCTIONS))
def test_r0_truths_against_quadrature(name):
    t = R0_FUNCTIONS[name]
    ref, _ = integrate.nquad(lambda x, y: t.f(np.array([[x, y]]))[0], [[0, 1], [0, 1]])
    assert t.truth(2) == pytest.approx(ref, abs=1e-10)
    assert np.all(np.abs(t.f(np.random.default_rng(0).random((500, 3)))) <= 1)


@pytest.mark.parametrize("r", [1, 2])
@pytest.mark.parametrize("name", ["sin-over-pi", "half-square", "cos-shift"])
def test_smooth_truths_against_quadrature(name, r):
    t = _r_functions(r)[name]
    ref, _ = integrate.quad(lambda x: t.f(np.array([[x]]))[0], 0, 1)
    assert t.truth(1) == pytest.approx(ref, abs=1e-12)
    assert t.truth(3) == pytest.approx(ref ** 3, abs=1e-12)


def test_boolean_suite_counts():
    suite = boolean_suite(64, 1)
    for m in suite:
        assert m.instance.values.sum() / 64 == m.truth
    assert [m.truth for m in suite] == sorted(m.truth for m in suite)


def test_real_suite_truths():
    for m in real_suite(32, 0):
        assert m.truth == pytest.approx(m.instance.values.mean())


def test_problem_variants_build():
    for name, prob in PROBLEMS.items():
        params = {"N": 16, "seed": 0, "d": 1, "r": 1}
        suite = prob.suite(params)
        assert suite
        for v in prob.variants:
            run = prob.algorithm(v, 0.2, params)(suite[0].instance, np.random.default_rng(0))
            assert run.queries >= 0


def test_list_catalog_filter():
    lines = list_catalog("integrate-r1")
    assert lines and all("integrate-r1" in l for l in lines)
