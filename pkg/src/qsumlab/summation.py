"""Real summation reduced to Boolean summation through K-bit expansions.

Each value is truncated to ``q_j = floor(f(j) 2**K)`` (clamped to
``2**K - 1``).  Bit ``i`` of ``q_j`` (weight ``2**(K-i)``) is replicated over
``p = 1..2**(K-i)``, giving the index set D of size ``N (2**K - 1)``.  D is
laid out per ``j`` as a row of ``2**K`` slots: slots
``[2**K - 2**(K-i+1), 2**K - 2**(K-i))`` belong to bit ``i`` and the last
slot is a padding zero, so the mean over ``N 2**K`` slots is exactly
``S_K(f)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

import numpy as np

from .amplitude import (
    REPETITIONS,
    PreparedRun,
    plan_randomized,
    worst_case_error,
)
from .estimate import Estimate, as_generator
from .oracles import BitQueryOracle, RandomizedOracleFactory, RealTable


@dataclass
class BinaryExpansion:
    source: RealTable
    K: int

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("bit depth K must be >= 1")
        scale = 1 << self.K
        self.q = np.minimum(np.floor(self.source.values * scale), scale - 1).astype(np.int64)

    @property
    def size(self) -> int:
        """|D| = N (2**K - 1)."""
        return self.source.size * ((1 << self.K) - 1)

    def bit(self, i: int, j: int) -> int:
        """f(i, j): bit ``i`` (1-based, weight 2**-i) of the truncated f(j)."""
        return int((self.q[j] >> (self.K - i)) & 1)

    def b(self, i: int, j: int, p: int) -> int:
        if not (1 <= i <= self.K and 1 <= p <= 1 << (self.K - i)):
            raise IndexError(f"({i}, {j}, {p}) not in D")
        return self.bit(i, j)

    def domain(self) -> Iterator[tuple[int, int, int]]:
        for i in range(1, self.K + 1):
            for j in range(self.source.size):
                for p in range(1, (1 << (self.K - i)) + 1):
                    yield i, j, p

    def s_k(self) -> Fraction:
        """S_K(f) as an exact rational."""
        return Fraction(int(self.q.sum()), self.source.size << self.K)

    def slot_values(self, j: np.ndarray, r: np.ndarray) -> np.ndarray:
        """b on the padded slot layout; ``r == 2**K - 1`` is the padding zero."""
        j = np.asarray(j)
        r = np.asarray(r)
        # slot r < 2**K - 1 lies in block i = K - floor(log2(2**K - 1 - r))
        rest = (1 << self.K) - 1 - r
        safe = np.maximum(rest, 1)
        i = self.K - np.floor(np.log2(safe)).astype(np.int64)
        bits = (self.q[j] >> (self.K - i)) & 1
        return np.where(rest > 0, bits, 0).astype(np.int64)

    def flat_table(self) -> np.ndarray:
        """All ``N 2**K`` slot bits, index ``j * 2**K + r``."""
        n, w = self.source.size, 1 << self.K
        jj, rr = np.divmod(np.arange(n * w), w)
        return self.slot_values(jj, rr)


def binary_expand(f: RealTable, K: int) -> BinaryExpansion:
    return BinaryExpansion(f, K)


def bits_for(eps: float) -> int:
    """K = ceil(log2 eps**-2)."""
    return math.ceil(math.log2(eps ** -2) - 1e-12)


MAX_PHASE_QUBITS = 14  # the analytic sup-search is O(2**t) per grid point


@lru_cache(maxsize=None)
def truncation_split(target: float, repetitions: int = REPETITIONS) -> tuple[int, int]:
    """(K, t) with ``2**-K + worst_case_error(t) <= target``, fewest ``K + t`` then fewest queries."""
    best = None
    for t in range(1, MAX_PHASE_QUBITS + 1):
        err = worst_case_error(t, repetitions)
        if err >= target:
            continue
        K = max(1, math.ceil(-math.log2(target - err) - 1e-12))
        key = (K + t, t)
        if best is None or key < best[0]:
            best = (key, K, t)
        if best is not None and t + 1 >= best[0][0]:
            break  # K >= 1, so larger t cannot lower K + t
    if best is None:
        raise ValueError(f"cannot reach target {target}")
    return best[1], best[2]


def prepare_table_summation(table: RealTable, target: float, repetitions: int = REPETITIONS,
                            offset: float = 0.0, scale: float = 1.0) -> PreparedRun:
    """Deterministic-query summation of a whole real table to worst-case error ``target``.

    The table size must be a power of two; the register spans ``log2 N + K``
    index qubits.
    """
    n = table.size
    if n < 1 or n & (n - 1):
        raise ValueError("table size must be a power of two")
    K, t = truncation_split(target, repetitions)
    expansion = BinaryExpansion(table, K)
    oracle = BitQueryOracle(expansion.flat_table(), 1, label="binary-expansion")
    return PreparedRun(oracle, t, repetitions, offset=offset, scale=scale,
                       info={"K": K, "phase_qubits": t, "S_K": float(expansion.s_k())})


def prepare_real_summation(f: RealTable, eps: float, rng, repetitions: int = REPETITIONS,
                           plan: str = "exact") -> PreparedRun:
    if not 0 < eps < 0.5:
        raise ValueError("epsilon must lie in (0, 0.5)")
    gen, _ = as_generator(rng)
    K = bits_for(eps)
    expansion = BinaryExpansion(f, K)
    m, t = plan_randomized(eps - eps * eps, repetitions, plan)
    width = 1 << K
    n = f.size

    def sampler(g: np.random.Generator, size: int) -> np.ndarray:
        return g.integers(0, n * width, size=size)
    sampler.descriptor = f"uniform over D plus {n} padding slots"

    def evaluate(points: np.ndarray) -> np.ndarray:
        j, r = np.divmod(points, width)
        return expansion.slot_values(j, r)

    oracle = RandomizedOracleFactory(evaluate, sampler, m).oracle(gen)
    return PreparedRun(oracle, t, repetitions,
                       info={"K": K, "subsample": m, "plan": plan, "S_K": float(expansion.s_k())})


def real_summation(f: RealTable, eps: float, rng, repetitions: int = REPETITIONS,
                   plan: str = "exact", backend: str = "auto") -> Estimate:
    """Randomized-query estimate of mean(f) with randomized error <= eps.

    Truncation costs at most ``2**-K <= eps**2``; the Boolean stage runs at
    ``eps - eps**2``.
    """
    gen, seed = as_generator(rng)
    est = prepare_real_summation(f, eps, gen, repetitions, plan).run(gen, backend)
    est.seed = seed
    return est
