import math
from fractions import Fraction

import numpy as np
import pytest

from qsumlab.amplitude import worst_case_error
from qsumlab.oracles import RealTable
from qsumlab.summation import (
    BinaryExpansion,
    bits_for,
    prepare_real_summation,
    prepare_table_summation,
    real_summation,
    truncation_split,
)


def _brute_s_k(values, K):
    # independent: sum over the unpadded index set D written out element by element
    q = [min(math.floor(Fraction(v) * 2 ** K), 2 ** K - 1) for v in values]
    total = 0
    count = 0
    for i in range(1, K + 1):
        for qj in q:
            for _ in range(2 ** (K - i)):
                total += (qj >> (K - i)) & 1
                count += 1
    assert count == len(values) * (2 ** K - 1)
    return Fraction(total, len(values) * 2 ** K), Fraction(total, count)


@pytest.mark.parametrize("K", [1, 2, 3, 5])
def test_reduction_identity(K):
    rng = np.random.default_rng(K)
    vals = np.r_[rng.random(6), 0.0, 1.0]
    exp = BinaryExpansion(RealTable(vals), K)
    s_k, mean_d = _brute_s_k(vals, K)
    assert exp.s_k() == s_k
    # B_{|D|}(b) = S_K 2**K / (2**K - 1)
    assert mean_d == s_k * 2 ** K / (2 ** K - 1)
    assert Fraction(int(exp.flat_table().sum()), exp.flat_table().size) == s_k
    bvals = [exp.b(i, j, p) for i, j, p in exp.domain()]
    assert Fraction(sum(bvals), exp.size) == mean_d


def test_truncation_gap():
    vals = np.random.default_rng(0).random(32)
    for K in range(1, 9):
        gap = float(np.mean(vals)) - float(BinaryExpansion(RealTable(vals), K).s_k())
        assert 0 <= gap < 2.0 ** -K


def test_domain_membership():
    exp = BinaryExpansion(RealTable([0.5]), 3)
    with pytest.raises(IndexError):
        exp.b(1, 0, 5)
    assert exp.b(1, 0, 4) == 1


def test_bits_for():
    assert bits_for(0.1) == 7
    assert bits_for(0.05) == 9
    assert bits_for(0.5) == 2


@pytest.mark.parametrize("target", [0.1, 0.05, 0.025])
def test_truncation_split_is_optimal(target):
    K, t = truncation_split(target)
    assert 2.0 ** -K + worst_case_error(t) <= target
    # no split with fewer total qubits works
    for tt in range(1, K + t):
        kk = K + t - 1 - tt
        if kk >= 1:
            assert 2.0 ** -kk + worst_case_error(tt) > target


def test_truncation_split_values():
    assert truncation_split(0.1) == (5, 5)
    assert truncation_split(0.025) == (7, 7)


def test_table_summation_error_within_target():
    vals = np.random.default_rng(2).random(8)
    run = prepare_table_summation(RealTable(vals), 0.05)
    v, p = run.law()
    assert math.sqrt(float(p @ (v - vals.mean()) ** 2)) <= 0.05
    with pytest.raises(ValueError):
        prepare_table_summation(RealTable(vals[:6]), 0.05)


def test_table_summation_affine_readout():
    run = prepare_table_summation(RealTable([0.5] * 4), 0.1, offset=-1.0, scale=2.0)
    assert run.run(0).value == pytest.approx(0.0, abs=1e-15)


def test_randomized_qubits_independent_of_n():
    qs = set()
    for n in (4, 64, 4096):
        run = prepare_real_summation(RealTable(np.linspace(0, 1, n)), 0.1, 0)
        qs.add(run.qubits)
    assert len(qs) == 1


def test_randomized_error_within_eps():
    vals = np.random.default_rng(5).random(16)
    f = RealTable(vals)
    errs = [real_summation(f, 0.1, s, backend="analytic").value - vals.mean() for s in range(300)]
    assert math.sqrt(np.mean(np.square(errs))) <= 0.1


def test_real_summation_rejects_bad_eps():
    with pytest.raises(ValueError):
        prepare_real_summation(RealTable([0.1]), 0.7, 0)
