import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from qsumlab.amplitude import (
    QUERY_CONSTANT,
    PreparedRun,
    QAEConfig,
    boolean_summation,
    boost_repetitions,
    boost_success,
    calibrate_query_constant,
    constant_run,
    deterministic_boolean_summation,
    estimate_values,
    median_l2_error,
    median_law,
    median_pmf,
    phase_qubits_for_budget,
    plan_deterministic,
    plan_randomized,
    qae_exact_distribution,
    qae_statevector_distribution,
    queries_per_run,
    randomized_boolean_summation,
    recover_exact_mean,
    single_run_law,
    worst_case_error,
)
from qsumlab.errors import BudgetError
from qsumlab.oracles import BooleanTable, boolean_oracle


@pytest.mark.parametrize("bits", [[0, 1, 1, 0], [1, 1, 1, 0, 0, 0, 0, 0], [0] * 8, [1] * 4])
@pytest.mark.parametrize("t", [1, 3, 4])
def test_statevector_matches_closed_form(bits, t):
    o = boolean_oracle(BooleanTable(bits))
    sim = qae_statevector_distribution(o, t)
    ref = qae_exact_distribution(np.mean(bits), t)
    assert 0.5 * np.abs(sim - ref).sum() < 1e-12


def test_statevector_query_count():
    o = boolean_oracle(BooleanTable([0, 1, 0, 0]))
    qae_statevector_distribution(o, 3)
    # controlled G^(2^p) for p < 3, one phase query per Grover iterate
    assert o.counter == queries_per_run(3)


def test_estimate_values_pinned_and_symmetric():
    v = estimate_values(3)
    assert v[0] == 0.0 and v[2] == 0.5 and v[4] == 1.0 and v[6] == 0.5
    np.testing.assert_allclose(v[1:], v[:0:-1], atol=1e-15)


def test_dyadic_amplitude_is_recovered_exactly():
    # a = sin^2(pi y / M) for y = M/4: one phase outcome carries all mass
    law = qae_exact_distribution(0.5, 4)
    assert law[4] + law[12] == pytest.approx(1.0, abs=1e-12)


# Frozen from an independent computation of sup_a E|median - a|^2 with scipy minimize_scalar.
@pytest.mark.parametrize("t,err", [(1, 0.5), (2, 0.3035), (3, 0.1801), (4, 0.0971),
                                   (5, 0.0497), (6, 0.0250), (7, 0.0125)])
def test_worst_case_error_frozen(t, err):
    assert worst_case_error(t) == pytest.approx(err, abs=5e-4)


def test_worst_case_error_halves_per_qubit():
    ratios = [worst_case_error(t + 1) / worst_case_error(t) for t in range(3, 9)]
    assert all(0.45 < r < 0.56 for r in ratios)


def test_query_constant_covers_calibration():
    assert QUERY_CONSTANT >= calibrate_query_constant()
    assert QUERY_CONSTANT - calibrate_query_constant() < 0.01


def _brute_median_law(a, t, reps):
    values, single = single_run_law(a, t)
    probs = {}
    for combo in itertools.product(range(values.size), repeat=reps):
        k = sorted(combo)[reps // 2]
        probs[k] = probs.get(k, 0.0) + np.prod(single[list(combo)])
    out = np.zeros(values.size)
    for k, p in probs.items():
        out[k] = p
    return out


@pytest.mark.parametrize("reps", [1, 3, 5])
@pytest.mark.parametrize("a", [0.0, 0.17, 0.5, 0.93])
def test_median_law_against_enumeration(a, reps):
    t = 3
    _, pm = median_law(a, t, reps)
    np.testing.assert_allclose(pm, _brute_median_law(a, t, reps), atol=1e-13)


def test_median_pmf_is_a_distribution():
    p = np.random.default_rng(3).dirichlet(np.ones(9))
    assert median_pmf(p, 7).sum() == pytest.approx(1.0)


def test_l2_error_matches_law_moments():
    a = 0.3
    v, p = median_law(a, 5)
    direct = math.sqrt(float(p @ (v - a) ** 2))
    assert median_l2_error(a, 5)[0] == pytest.approx(direct, rel=1e-12)


def test_planners():
    assert plan_deterministic(0.1) == 4
    assert plan_deterministic(0.05) == 5
    assert plan_randomized(0.2) == (8, 3)
    assert plan_randomized(0.1) == (64, 4)
    assert plan_randomized(0.05) == (256, 5)
    m, t = plan_randomized(0.1, plan="asymptotic")
    assert m == 512 and t == phase_qubits_for_budget(math.ceil(2 * QUERY_CONSTANT / 0.1))


def test_budget_error():
    with pytest.raises(BudgetError):
        phase_qubits_for_budget(13)
    assert phase_qubits_for_budget(14) == 1
    assert phase_qubits_for_budget(7 * 16) == 4


def test_qae_config_validation():
    with pytest.raises(ValueError):
        QAEConfig(0)
    with pytest.raises(ValueError):
        QAEConfig(3, repetitions=4)
    with pytest.raises(ValueError):
        QAEConfig(3, backend="gpu")


def test_boolean_summation_resources():
    o = boolean_oracle(BooleanTable([1, 0, 0, 1, 0, 0, 0, 0]))
    est = boolean_summation(o, 7 * 16, np.random.default_rng(0))
    assert est.queries_used == 7 * 15 <= 7 * 16
    assert est.qubits_used == 3 + 1 + 4
    assert o.counter == 7 * 15


def test_randomized_qubits_independent_of_n():
    q = {randomized_boolean_summation(BooleanTable(np.arange(n) % 3 == 0), 0.1, 5, backend="analytic").qubits_used
         for n in (16, 1024, 1 << 16)}
    assert q == {6 + 1 + 4}


def test_deterministic_qubits_grow_with_n():
    a = deterministic_boolean_summation(BooleanTable([0, 1] * 8), 0.1, 0, backend="analytic")
    b = deterministic_boolean_summation(BooleanTable([0, 1] * 512), 0.1, 0, backend="analytic")
    assert b.qubits_used - a.qubits_used == 6


def test_recover_exact_mean():
    assert recover_exact_mean(0.26, 4) == Fraction(1, 4)
    assert recover_exact_mean(Fraction(3, 8) - Fraction(1, 17), 8) == Fraction(3, 8)
    assert recover_exact_mean(0.0, 10) == 0


def test_exact_recovery_small_tables():
    # with eps < 1/(2N) the rounding returns the exact count for every f
    n = 8
    run_eps = 1 / (4 * n)
    t = plan_deterministic(run_eps)
    for k in range(n + 1):
        v, p = PreparedRun(boolean_oracle(BooleanTable([1] * k + [0] * (n - k))), t).law()
        rec = {recover_exact_mean(x, n) for x, q in zip(v, p) if q > 1e-9 and abs(x - k / n) < 1 / (2 * n)}
        assert rec <= {Fraction(k, n)}


def test_boost():
    assert boost_repetitions(0.25) == 12
    assert boost_repetitions(0.01) == 37
    with pytest.raises(ValueError):
        boost_repetitions(0.5)
    est = boost_success(lambda g: g.random(), 0.1, 1)
    assert est.info["repetitions"] == 19 and 0 < est.value < 1


def test_constant_run():
    run = constant_run(0.3, classical_queries=5)
    assert run.qubits == 0 and run.queries == 5
    v, p = run.law()
    assert v.tolist() == [0.3] and p.tolist() == [1.0]
    assert run.run(4).value == 0.3
