import numpy as np
import pytest

from qsumlab.oracles import (
    BitQueryOracle,
    BooleanTable,
    CodingMaps,
    RandomizedOracleFactory,
    RealTable,
    apply_bit_query,
    boolean_oracle,
    load_table,
    make_randomized_subsample_oracle,
    next_pow2,
    phase_flip_query,
    query_count,
    real_oracle,
    save_table,
    truncate_beta,
    uniform_indices,
)
from qsumlab.statevector import Gate, apply_hadamard_all, apply_unitary, new_basis_state

X = np.array([[0.0, 1.0], [1.0, 0.0]])
H = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)


def test_boolean_table_validation():
    with pytest.raises(ValueError):
        BooleanTable([0, 1, 1])
    with pytest.raises(ValueError):
        BooleanTable([0, 2])
    assert BooleanTable([0, 1, 1, 1]).mean() == 0.75


def test_real_table_range():
    with pytest.raises(ValueError):
        RealTable([0.2, 1.2])
    assert RealTable([0.25, 0.75, 0.5]).size == 3


def test_next_pow2():
    assert [next_pow2(n) for n in (1, 2, 3, 400, 1024)] == [1, 2, 4, 512, 1024]


def test_bit_query_xors_value_and_counts():
    f = BooleanTable([0, 1, 1, 0])
    o = boolean_oracle(f)
    lay = o.layout()
    for j in range(4):
        s = new_basis_state(lay.total, j)
        apply_bit_query(s, o, lay)
        assert np.argmax(np.abs(s.amplitudes)) == j + (f.values[j] << 2)
    assert query_count(o) == 4


def test_bit_query_is_self_inverse_for_one_bit():
    o = boolean_oracle(BooleanTable([1, 0, 1, 1]))
    lay = o.layout()
    s = new_basis_state(lay.total, 0)
    apply_hadamard_all(s, lay.everything)
    ref = s.copy()
    apply_bit_query(s, o, lay)
    apply_bit_query(s, o, lay)
    np.testing.assert_allclose(s.amplitudes, ref.amplitudes, atol=1e-15)
    assert o.counter == 2


def test_multi_bit_query_adds_mod_2m():
    o = BitQueryOracle(np.array([3, 1]), value_width=2)
    lay = o.layout()
    s = new_basis_state(lay.total, 0 + (2 << 1))  # j = 0, value 2
    apply_bit_query(s, o, lay)
    assert np.argmax(np.abs(s.amplitudes)) == 0 + (((2 + 3) % 4) << 1)
    apply_bit_query(s, o, lay, inverse=True)
    assert np.argmax(np.abs(s.amplitudes)) == 0 + (2 << 1)


def test_phase_kickback_marks_ones():
    f = BooleanTable([0, 1, 0, 1])
    o = boolean_oracle(f)
    lay = o.layout()
    s = new_basis_state(lay.total, 0)
    apply_unitary(s, [Gate(X, lay.value), Gate(H, lay.value)])
    apply_hadamard_all(s, lay.index)
    phase_flip_query(s, o, lay)
    signs = np.sign(s.amplitudes[:4].real)
    np.testing.assert_array_equal(signs, [1, -1, 1, -1])


def test_controlled_query_inactive_when_control_zero():
    o = boolean_oracle(BooleanTable([1, 1]))
    lay = o.layout(phase_width=1)
    s = new_basis_state(lay.total, 0)
    apply_bit_query(s, o, lay, control=lay.phase.offset)
    assert abs(s.amplitudes[0]) == pytest.approx(1.0)
    assert o.counter == 1  # a controlled query still costs one


def test_truncate_beta():
    assert truncate_beta(0.0, 3) == 0
    assert truncate_beta(0.5, 3) == 4
    assert truncate_beta(1.0, 3) == 7  # clamped
    with pytest.raises(ValueError):
        truncate_beta(1.5, 3)


def test_exact_coding_rejects_non_dyadic():
    coding = CodingMaps(lambda j: j, 2, exact=True)
    np.testing.assert_array_equal(coding.beta([0.25, 0.5]), [1, 2])
    with pytest.raises(ValueError):
        coding.beta([0.3])


def test_real_oracle_records_sample_points():
    t = RealTable([0.0, 0.25, 0.5, 0.75])
    o = real_oracle(t, CodingMaps(lambda j: j / 4, 2))
    np.testing.assert_array_equal(o.codes, [0, 1, 2, 3])
    np.testing.assert_allclose(o.sample_points, [0, 0.25, 0.5, 0.75])
    assert o.mean() == pytest.approx(0.375)


def test_table_file_roundtrip(tmp_path):
    b = BooleanTable([0, 1, 1, 0])
    save_table(b, tmp_path / "b.txt")
    assert isinstance(load_table(tmp_path / "b.txt"), BooleanTable)
    r = RealTable([0.1, 0.9, 0.3])
    save_table(r, tmp_path / "r.txt")
    back = load_table(tmp_path / "r.txt")
    np.testing.assert_array_equal(back.values, r.values)


def test_table_file_header_mismatch(tmp_path):
    (tmp_path / "t.txt").write_text("3\n0\n1\n")
    with pytest.raises(ValueError):
        load_table(tmp_path / "t.txt")


def test_forced_points_give_known_subsample():
    f = BooleanTable([0, 1, 0, 1, 1, 1, 0, 0])
    o = make_randomized_subsample_oracle(f, 4, np.random.default_rng(0), points=np.array([1, 3, 4, 0]))
    np.testing.assert_array_equal(o.codes, [1, 1, 1, 0])
    assert o.mean() == 0.75


def test_padding_keeps_subsample_unbiased():
    f = BooleanTable(np.r_[np.ones(3, int), np.zeros(5, int)])
    fac = RandomizedOracleFactory(lambda p: f.values[p], uniform_indices(8), 5)
    assert fac.size == 8
    means = [fac.oracle(np.random.default_rng(s)).mean() for s in range(4000)]
    # E mean = 3/8; standard error ~ 0.21/sqrt(4000)
    assert abs(np.mean(means) - 3 / 8) < 4 * np.std(means) / np.sqrt(4000)


def test_randomized_oracle_metadata():
    f = BooleanTable([0, 1] * 8)
    o = make_randomized_subsample_oracle(f, 4, np.random.default_rng(1))
    assert o.meta["distribution"] == "uniform{0..15}"
    assert o.index_width == 2
