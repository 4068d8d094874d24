"""Bit queries ``Q_f |j>|i> = |j>|i (+) code(j)>`` and their randomized factory.

``(+)`` is addition modulo ``2**value_width``; for one value qubit this is
XOR.  Every application of a query, its inverse or a controlled variant adds
one to the oracle's counter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .statevector import RegisterLayout, StateVector, _blend, _control_mask


def _is_pow2(n: int) -> bool:
    return n >= 1 and not n & (n - 1)


def next_pow2(n: int) -> int:
    if n < 1:
        raise ValueError("n must be positive")
    return 1 << (int(n) - 1).bit_length()


class BooleanTable:
    """f: {0..N-1} -> {0,1} with N a power of two (N >= 2)."""

    def __init__(self, values):
        v = np.asarray(values)
        if v.ndim != 1 or not _is_pow2(v.size) or v.size < 2:
            raise ValueError(f"table size must be a power of two >= 2, got {v.size}")
        if not np.all((v == 0) | (v == 1)):
            raise ValueError("Boolean table entries must be 0 or 1")
        self.values = v.astype(np.int64)

    @property
    def size(self) -> int:
        return self.values.size

    def mean(self) -> float:
        return float(self.values.mean())

    def count(self) -> int:
        return int(self.values.sum())


class RealTable:
    """f: {0..N-1} -> [0,1].  N need not be a power of two."""

    def __init__(self, values):
        v = np.asarray(values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("real table must be a nonempty vector")
        if np.any(v < 0) or np.any(v > 1) or not np.all(np.isfinite(v)):
            raise ValueError("real table entries must lie in [0, 1]")
        self.values = v

    @property
    def size(self) -> int:
        return self.values.size

    def mean(self) -> float:
        return float(self.values.mean())


def load_table(path: str | Path) -> BooleanTable | RealTable:
    """Read a table file: first line N, then N values, one per line.

    All-integer 0/1 contents give a :class:`BooleanTable`, anything else a
    :class:`RealTable`.
    """
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError(f"{path}: empty table file")
    n = int(lines[0])
    body = lines[1:]
    if len(body) != n:
        raise ValueError(f"{path}: header says {n} values, found {len(body)}")
    if all(tok in ("0", "1") for tok in body):
        return BooleanTable([int(tok) for tok in body])
    return RealTable([float(tok) for tok in body])


def save_table(table: BooleanTable | RealTable, path: str | Path) -> None:
    vals = table.values
    if isinstance(table, BooleanTable):
        body = "\n".join(str(int(x)) for x in vals)
    else:
        body = "\n".join(repr(float(x)) for x in vals)
    Path(path).write_text(f"{vals.size}\n{body}\n")


def truncate_beta(value: float, m2: int) -> int:
    """The ``m2`` most significant bits of ``value`` in [0,1], clamped at ``2**m2 - 1``."""
    if m2 < 1:
        raise ValueError("need at least one value bit")
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"value {value} outside [0, 1]")
    return min(int(math.floor(value * (1 << m2))), (1 << m2) - 1)


@dataclass
class CodingMaps:
    """``tau`` maps an index to its sample point, ``beta`` maps a value to ``m2`` bits.

    ``exact=True`` asserts that ``value * 2**m2`` is already an integer, so
    coding error is zero and can be separated from estimation error in tests.
    """

    tau: Callable[[np.ndarray], np.ndarray]
    m2: int
    exact: bool = False

    def beta(self, values: np.ndarray) -> np.ndarray:
        v = np.asarray(values, dtype=float)
        if np.any(v < 0) or np.any(v > 1):
            raise ValueError("beta: value outside [0, 1]")
        scaled = v * (1 << self.m2)
        if self.exact:
            codes = np.rint(scaled)
            if np.any(np.abs(codes - scaled) > 1e-9) or np.any(codes > (1 << self.m2) - 1):
                raise ValueError("exact coding requested but values are not m2-bit dyadics")
            return codes.astype(np.int64)
        return np.minimum(np.floor(scaled), (1 << self.m2) - 1).astype(np.int64)


@dataclass
class BitQueryOracle:
    """Query unitary for fixed, a-priori sample points.

    ``codes[j]`` is the integer added to the value register for index ``j``;
    ``sample_points[j]`` records where the underlying function was read.
    """

    codes: np.ndarray
    value_width: int = 1
    sample_points: np.ndarray | None = None
    counter: int = 0
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        codes = np.asarray(self.codes, dtype=np.int64)
        if codes.ndim != 1 or not _is_pow2(codes.size) or codes.size < 2:
            raise ValueError("oracle needs a power-of-two number (>= 2) of entries")
        if np.any(codes < 0) or np.any(codes >= (1 << self.value_width)):
            raise ValueError("coded value does not fit the value register")
        codes.setflags(write=False)
        self.codes = codes
        if self.sample_points is None:
            pts = np.arange(codes.size)
        else:
            pts = np.array(self.sample_points, copy=True)
        pts.setflags(write=False)
        self.sample_points = pts

    @property
    def index_width(self) -> int:
        return self.codes.size.bit_length() - 1

    @property
    def is_boolean(self) -> bool:
        return self.value_width == 1

    def mean(self) -> float:
        """Mean of the coded values scaled to [0, 1) (the Boolean mean for 1 bit)."""
        if self.is_boolean:
            return float(self.codes.mean())
        return float(self.codes.mean() / (1 << self.value_width))

    def layout(self, phase_width: int = 0) -> RegisterLayout:
        return RegisterLayout(self.index_width, self.value_width, phase_width)

    def count(self, k: int = 1) -> None:
        self.counter += k


def boolean_oracle(table: BooleanTable) -> BitQueryOracle:
    return BitQueryOracle(table.values, 1, label="boolean")


def real_oracle(table: RealTable, coding: CodingMaps) -> BitQueryOracle:
    n = table.size
    if not _is_pow2(n) or n < 2:
        raise ValueError("real oracle needs a power-of-two table")
    idx = np.arange(n)
    points = coding.tau(idx)
    values = table.values[np.asarray(idx)]
    return BitQueryOracle(coding.beta(values), coding.m2, sample_points=points, label="real")


def query_count(oracle: BitQueryOracle) -> int:
    return oracle.counter


def _check_layout(state: StateVector, oracle: BitQueryOracle, layout: RegisterLayout) -> None:
    if layout.index_width != oracle.index_width or layout.value_width != oracle.value_width:
        raise ValueError(
            f"layout ({layout.index_width}, {layout.value_width}) does not match oracle "
            f"({oracle.index_width}, {oracle.value_width})"
        )
    if layout.total != state.num_qubits:
        raise ValueError("layout does not describe this state")


def _shift_value_register(state, oracle, layout, sign, control) -> StateVector:
    _check_layout(state, oracle, layout)
    vsize = 1 << layout.value_width
    view = state.amplitudes.reshape(-1, vsize, 1 << layout.index_width)
    i = np.arange(vsize)[:, None]
    j = np.arange(1 << layout.index_width)[None, :]
    dest = (i + sign * oracle.codes[None, :]) % vsize
    new = np.empty_like(view)
    new[:, dest, np.broadcast_to(j, dest.shape)] = view
    _blend(state, new.reshape(-1), _control_mask(state.num_qubits, control))
    oracle.count()
    state.check_norm()
    return state


def apply_bit_query(state: StateVector, oracle: BitQueryOracle, layout: RegisterLayout,
                    control=None, inverse: bool = False) -> StateVector:
    """``|j>|i> -> |j>|i + code(j) mod 2**m2>``; ``inverse`` subtracts instead."""
    return _shift_value_register(state, oracle, layout, -1 if inverse else 1, control)


def apply_real_bit_query(state: StateVector, oracle: BitQueryOracle, layout: RegisterLayout,
                         control=None, inverse: bool = False) -> StateVector:
    if oracle.value_width < 1:
        raise ValueError("real query needs m2 >= 1")
    return _shift_value_register(state, oracle, layout, -1 if inverse else 1, control)


def phase_flip_query(state: StateVector, oracle: BitQueryOracle, layout: RegisterLayout,
                     control=None) -> StateVector:
    """Sign flip on marked indices via one bit query.

    The caller keeps the value qubit in ``|->``; the XOR then kicks back
    ``(-1)**f(j)`` onto the index register.
    """
    if not oracle.is_boolean:
        raise ValueError("phase flip needs a Boolean oracle")
    return apply_bit_query(state, oracle, layout, control=control)


# --- randomized queries -------------------------------------------------------

def uniform_indices(n: int) -> Callable[[np.random.Generator, int], np.ndarray]:
    """Sampler for iid uniform indices in {0..n-1}."""
    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.integers(0, n, size=size)
    draw.descriptor = f"uniform{{0..{n - 1}}}"
    return draw


@dataclass
class RandomizedOracleFactory:
    """Produces ``Q_{f,omega}``: a query over ``m`` points drawn from ``sampler``.

    ``evaluate`` maps an array of drawn points to table values in [0,1]
    (bits for a Boolean source).  ``m`` is rounded up to a power of two; the
    padding slots repeat real draws chosen uniformly, which keeps the mean of
    the produced table unbiased.
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    m: int
    value_width: int = 1

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("subsample size must be >= 1")

    @property
    def size(self) -> int:
        return max(2, next_pow2(self.m))

    def draw_points(self, rng: np.random.Generator) -> np.ndarray:
        real = self.sampler(rng, self.m)
        pad = self.size - self.m
        if pad:
            extra = real[rng.integers(0, self.m, size=pad)]
            return np.concatenate([real, extra])
        return real

    def oracle(self, rng: np.random.Generator, points: np.ndarray | None = None) -> BitQueryOracle:
        pts = self.draw_points(rng) if points is None else np.asarray(points)
        vals = np.asarray(self.evaluate(pts))
        if self.value_width == 1:
            codes = vals.astype(np.int64)
            if not np.all((codes == 0) | (codes == 1)):
                raise ValueError("Boolean source produced a non-bit value")
        else:
            codes = CodingMaps(lambda j: j, self.value_width).beta(vals)
        return BitQueryOracle(codes, self.value_width, sample_points=pts, label="randomized",
                              meta={"distribution": getattr(self.sampler, "descriptor", "custom")})


def make_randomized_subsample_oracle(f: BooleanTable | RealTable, m: int, rng: np.random.Generator,
                                     points: np.ndarray | None = None, value_width: int = 1) -> BitQueryOracle:
    """Oracle for ``g(l) = f(omega_l)`` with iid uniform ``omega_l`` over f's domain.

    ``points`` forces the draw (a test hook).  Real tables need
    ``value_width > 1`` and are coded by truncation.
    """
    if m < 1:
        raise ValueError("subsample size must be >= 1")
    vals = f.values
    if isinstance(f, RealTable) and value_width == 1:
        raise ValueError("real tables need value_width > 1")
    fac = RandomizedOracleFactory(lambda p: vals[p], uniform_indices(f.size), m, value_width)
    return fac.oracle(rng, points)
