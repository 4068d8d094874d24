"""Boolean summation by amplitude estimation, median of repetitions.

One repetition prepares the uniform superposition over the index register
(no query needed), keeps the value qubit in ``|->`` and runs phase
estimation on the Grover iterate ``G = -H S_0 H S_f`` with ``t`` phase
qubits.  ``S_f`` is one bit query, so a repetition costs ``2**t - 1``
queries (controlled powers ``G**(2**p)`` for ``p < t``) and uses
``m1 + 1 + t`` qubits.  The measured phase index ``y`` is turned into the
estimate ``sin(pi y / 2**t)**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import optimize, special, stats

from .errors import BudgetError, ResourceCapError
from .estimate import Estimate, as_generator
from .oracles import (
    BitQueryOracle,
    BooleanTable,
    boolean_oracle,
    make_randomized_subsample_oracle,
    next_pow2,
    phase_flip_query,
)
from .statevector import (
    DEFAULT_QUBIT_CAP,
    RegisterLayout,
    apply_hadamard_all,
    apply_inverse_qft,
    apply_unitary,
    Gate,
    global_phase,
    measurement_distribution,
    new_basis_state,
    reflect_zero,
)

REPETITIONS = 7
# Largest register the "auto" backend hands to the statevector simulator.
AUTO_STATEVECTOR_QUBITS = 16

# sup over budgets n >= 2R of n * (worst-case L2 error of the 7-repetition
# median at t = floor(log2(n / 7))).  Produced by scripts/calibrate_constant.py;
# tests recompute it and check the shipped value is not below the computation.
QUERY_CONSTANT = 22.49


@dataclass(frozen=True)
class QAEConfig:
    phase_qubits: int
    repetitions: int = REPETITIONS
    backend: str = "auto"

    def __post_init__(self):
        if self.phase_qubits < 1:
            raise ValueError("need at least one phase qubit")
        if self.repetitions < 1 or self.repetitions % 2 == 0:
            raise ValueError("repetitions must be a positive odd number")
        if self.backend not in ("statevector", "analytic", "auto"):
            raise ValueError(f"unknown backend {self.backend!r}")


def queries_per_run(t: int) -> int:
    return (1 << t) - 1


def estimate_values(t: int) -> np.ndarray:
    """Estimate ``sin(pi y / 2**t)**2`` for every phase outcome ``y``.

    The outcomes with exact values 0, 1/2, 1 are pinned so that affine
    readouts of a half-filled table return exact results.
    """
    m = 1 << t
    y = np.arange(m)
    out = (1.0 - np.cos(2 * np.pi * y / m)) / 2
    out[(4 * y) % m == 0] = np.rint(out[(4 * y) % m == 0] * 2) / 2
    return out


def _fejer(delta: np.ndarray, m: int) -> np.ndarray:
    """``|sum_{x<m} exp(2 pi i x delta)|**2 / m**2``."""
    s = np.sin(np.pi * delta)
    small = np.abs(s) < 1e-13
    safe = np.where(small, 1.0, s)
    return np.where(small, 1.0, np.sin(m * np.pi * delta) ** 2 / (m * m * safe * safe))


def qae_exact_distribution(a: float, t: int) -> np.ndarray:
    """Closed-form law of the measured phase index for marked fraction ``a``."""
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"amplitude {a} outside [0, 1]")
    if t < 1:
        raise ValueError("need at least one phase qubit")
    m = 1 << t
    omega = math.asin(math.sqrt(a)) / math.pi
    y = np.arange(m) / m
    p = 0.5 * (_fejer(y - omega, m) + _fejer(y + omega, m))
    return p / p.sum()


def _qae_laws(a: np.ndarray, t: int) -> np.ndarray:
    """Vectorized :func:`qae_exact_distribution`, rows indexed by ``a``."""
    m = 1 << t
    omega = np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))[:, None] / np.pi
    y = (np.arange(m) / m)[None, :]
    p = 0.5 * (_fejer(y - omega, m) + _fejer(y + omega, m))
    return p / p.sum(axis=1, keepdims=True)


def _fold(law: np.ndarray, t: int) -> tuple[np.ndarray, np.ndarray]:
    """Merge outcomes ``y`` and ``2**t - y`` (same estimate); values ascend."""
    m = 1 << t
    half = m // 2
    folded = law[..., : half + 1].copy()
    folded[..., 1:half] += law[..., m - 1: half: -1]
    return estimate_values(t)[: half + 1], folded


def median_pmf(single: np.ndarray, repetitions: int) -> np.ndarray:
    """Law of the median of ``repetitions`` iid draws from ordered pmf ``single``."""
    cdf = np.clip(np.cumsum(single, axis=-1), 0.0, 1.0)
    need = (repetitions + 1) // 2
    at_most = stats.binom.sf(need - 1, repetitions, cdf)
    out = np.diff(at_most, axis=-1, prepend=0.0)
    return np.clip(out, 0.0, None)


def single_run_law(a: float, t: int) -> tuple[np.ndarray, np.ndarray]:
    return _fold(qae_exact_distribution(a, t), t)


def median_law(a: float, t: int, repetitions: int = REPETITIONS) -> tuple[np.ndarray, np.ndarray]:
    """Exact law (values, probabilities) of the median-of-R estimate."""
    values, single = single_run_law(a, t)
    return values, median_pmf(single, repetitions)


def _median_moments(a: np.ndarray, t: int, repetitions: int) -> tuple[np.ndarray, np.ndarray]:
    values, folded = _fold(_qae_laws(a, t), t)
    pm = median_pmf(folded, repetitions)
    return pm @ values, pm @ values ** 2


def median_l2_error(a, t: int, repetitions: int = REPETITIONS) -> np.ndarray:
    """Exact root-mean-square error of the median estimate, vectorized over ``a``."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    s1, s2 = _median_moments(a, t, repetitions)
    return np.sqrt(np.clip(s2 - 2 * a * s1 + a * a, 0.0, None))


def _sup_on_interval(fun: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                     grid: int = 1001, refine: int = 3) -> float:
    xs = np.linspace(lo, hi, grid)
    vals = fun(xs)
    best = float(vals.max())
    step = xs[1] - xs[0]
    for i in np.argsort(vals)[-refine:]:
        a, b = max(lo, xs[i] - step), min(hi, xs[i] + step)
        res = optimize.minimize_scalar(lambda x: -float(fun(np.array([x]))[0]),
                                       bounds=(a, b), method="bounded",
                                       options={"xatol": 1e-10})
        best = max(best, -float(res.fun))
    return best


@lru_cache(maxsize=None)
def worst_case_error(t: int, repetitions: int = REPETITIONS) -> float:
    """sup over amplitudes of the median estimator's L2 error (symmetric in a <-> 1-a)."""
    return _sup_on_interval(lambda a: median_l2_error(a, t, repetitions), 0.0, 0.5)


@lru_cache(maxsize=None)
def randomized_worst_case_error(m_bits: int, t: int, repetitions: int = REPETITIONS) -> float:
    """sup over Boolean f of the exact L2 error of subsample-then-estimate.

    The realized subsample count is Binomial(m, p) with p = B_N(f), so the
    error depends on f only through p; the outer supremum runs over p.
    """
    m = 1 << m_bits
    x = np.arange(m + 1)
    s1, s2 = _median_moments(x / m, t, repetitions)

    log_choose = special.gammaln(m + 1) - special.gammaln(x + 1) - special.gammaln(m - x + 1)

    def err(p: np.ndarray) -> np.ndarray:
        pp = p[:, None]
        w = np.exp(log_choose + special.xlogy(x, pp) + special.xlog1py(m - x, -pp))
        e2 = w @ s2 - 2 * p * (w @ s1) + p * p
        return np.sqrt(np.clip(e2, 0.0, None))

    return _sup_on_interval(err, 0.0, 0.5)


def calibrate_query_constant(repetitions: int = REPETITIONS, t_max: int = 10) -> float:
    """sup_n n * err(n) with budget n mapped to ``t = floor(log2(n / R))``.

    Within one ``t`` the largest budget is ``R * 2**(t+1) - 1``.
    """
    return max((repetitions * (1 << (t + 1)) - 1) * worst_case_error(t, repetitions)
               for t in range(1, t_max + 1))


def phase_qubits_for_budget(n: int, repetitions: int = REPETITIONS) -> int:
    if n < 2 * repetitions:
        raise BudgetError(f"budget {n} < {2 * repetitions}: each repetition needs t >= 1")
    return int(math.floor(math.log2(n / repetitions)))


@lru_cache(maxsize=None)
def plan_deterministic(eps: float, repetitions: int = REPETITIONS, plan: str = "exact") -> int:
    """Phase qubits for worst-case L2 error <= eps with deterministic queries."""
    if plan == "asymptotic":
        return phase_qubits_for_budget(max(math.ceil(QUERY_CONSTANT / eps), 2 * repetitions), repetitions)
    if plan != "exact":
        raise ValueError(f"unknown plan {plan!r}")
    for t in range(1, 17):
        if worst_case_error(t, repetitions) <= eps:
            return t
    raise BudgetError(f"eps={eps} needs more than 16 phase qubits")


@lru_cache(maxsize=None)
def plan_randomized(eps: float, repetitions: int = REPETITIONS, plan: str = "exact") -> tuple[int, int]:
    """(subsample size m, phase qubits t) for randomized error <= eps.

    ``exact``: fewest qubits ``log2 m + 1 + t`` (ties: fewest queries) whose
    exact worst-case randomized error is <= eps.  ``asymptotic``: m = next power
    of two >= ceil(4 eps**-2) and budget ceil(2 C / eps).
    """
    if not 0 < eps < 0.5:
        raise ValueError("epsilon must lie in (0, 0.5)")
    if plan == "asymptotic":
        m = next_pow2(math.ceil(4 / eps ** 2))
        t = phase_qubits_for_budget(max(math.ceil(2 * QUERY_CONSTANT / eps), 2 * repetitions), repetitions)
        return max(m, 2), t
    if plan != "exact":
        raise ValueError(f"unknown plan {plan!r}")
    # Required t is nonincreasing in m, so one sweep over m with a falling t suffices.
    t = plan_deterministic(eps / 2, repetitions) + 1
    m_bits_max = int(math.ceil(2 * math.log2(1 / eps))) + 4
    best = None
    for m_bits in range(1, m_bits_max + 1):
        if best is not None and m_bits + 2 > best[0][0]:
            break
        if randomized_worst_case_error(m_bits, t, repetitions) > eps:
            continue
        while t > 1 and randomized_worst_case_error(m_bits, t - 1, repetitions) <= eps:
            t -= 1
        key = (m_bits + 1 + t, t)
        if best is None or key < best[0]:
            best = (key, m_bits, t)
    if best is None:
        raise BudgetError(f"no randomized plan found for eps={eps}")
    return 1 << best[1], best[2]


# --- simulation ---------------------------------------------------------------

def grover_iterate(state, oracle: BitQueryOracle, layout: RegisterLayout, control=None):
    """``-H S_0 H S_f`` on the index register; one (controlled) query."""
    phase_flip_query(state, oracle, layout, control=control)
    apply_hadamard_all(state, layout.index, control=control)
    reflect_zero(state, layout.index, control=control)
    apply_hadamard_all(state, layout.index, control=control)
    global_phase(state, -1.0, control=control)
    return state


_MINUS = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0) @ np.array([[0.0, 1.0], [1.0, 0.0]])


def qae_statevector_distribution(oracle: BitQueryOracle, t: int,
                                 cap: int = DEFAULT_QUBIT_CAP) -> np.ndarray:
    """Simulate one repetition and return the exact law of the phase index."""
    if not oracle.is_boolean:
        raise ValueError("amplitude estimation runs on Boolean oracles")
    layout = RegisterLayout(oracle.index_width, 1, t, cap=cap)
    state = new_basis_state(layout.total, 0, cap=cap)
    apply_unitary(state, Gate(_MINUS, layout.value))
    apply_hadamard_all(state, layout.index)
    apply_hadamard_all(state, layout.phase)
    for p in range(t):
        control = layout.phase.offset + p
        for _ in range(1 << p):
            grover_iterate(state, oracle, layout, control=control)
    apply_inverse_qft(state, layout.phase)
    return measurement_distribution(state, layout.phase)


def _resolve_backend(backend: str, qubits: int) -> str:
    if backend == "auto":
        return "statevector" if qubits <= AUTO_STATEVECTOR_QUBITS else "analytic"
    if backend == "statevector" and qubits > DEFAULT_QUBIT_CAP:
        raise ResourceCapError(
            f"{qubits} qubits exceeds the statevector cap {DEFAULT_QUBIT_CAP}; use backend='analytic'"
        )
    return backend


def run_law(oracle: BitQueryOracle, t: int, backend: str = "auto") -> tuple[np.ndarray, str]:
    """Per-repetition law of the phase index, from the chosen backend."""
    qubits = oracle.index_width + 1 + t
    which = _resolve_backend(backend, qubits)
    if which == "statevector":
        before = oracle.counter
        law = qae_statevector_distribution(oracle, t)
        oracle.counter = before
    else:
        law = qae_exact_distribution(oracle.mean(), t)
    return law, which


def qae_single_run(oracle: BitQueryOracle, t: int, rng, backend: str = "auto") -> tuple[int, float, dict]:
    rng, _ = as_generator(rng)
    law, which = run_law(oracle, t, backend)
    y = int(rng.choice(law.size, p=law))
    oracle.count(queries_per_run(t))
    return y, float(estimate_values(t)[y]), {
        "queries": queries_per_run(t), "qubits": oracle.index_width + 1 + t, "backend": which,
    }


def _summation_fixed_t(oracle: BitQueryOracle, t: int, rng, repetitions: int, backend: str) -> Estimate:
    gen, seed = as_generator(rng)
    law, which = run_law(oracle, t, backend)
    ys = gen.choice(law.size, size=repetitions, p=law)
    vals = estimate_values(t)[ys]
    oracle.count(repetitions * queries_per_run(t))
    return Estimate(
        value=float(np.median(vals)),
        queries_used=repetitions * queries_per_run(t),
        qubits_used=oracle.index_width + 1 + t,
        seed=seed,
        trace=[{"y": int(y), "estimate": float(v)} for y, v in zip(ys, vals)],
        info={"phase_qubits": t, "repetitions": repetitions, "backend": which},
    )


@dataclass
class PreparedRun:
    """A quantum summation ready to run: oracle, phase qubits and an affine readout.

    The reported value is ``offset + scale * median``.  ``classical_queries``
    counts function values read outside the quantum register.
    """

    oracle: BitQueryOracle
    t: int
    repetitions: int = REPETITIONS
    offset: float = 0.0
    scale: float = 1.0
    classical_queries: int = 0
    extra_qubits: int = 0
    info: dict = field(default_factory=dict)
    quantum: bool = True

    @property
    def qubits(self) -> int:
        if not self.quantum:
            return 0
        return self.oracle.index_width + 1 + self.t + self.extra_qubits

    @property
    def queries(self) -> int:
        quantum = self.repetitions * queries_per_run(self.t) if self.quantum else 0
        return quantum + self.classical_queries

    def law(self, backend: str = "analytic") -> tuple[np.ndarray, np.ndarray]:
        """Exact law (values, probabilities) of the reported value."""
        if not self.quantum:
            return np.array([self.offset]), np.array([1.0])
        single, _ = run_law(self.oracle, self.t, backend)
        values, folded = _fold(single, self.t)
        return self.offset + self.scale * values, median_pmf(folded, self.repetitions)

    def run(self, rng, backend: str = "auto") -> Estimate:
        if not self.quantum:
            _, seed = as_generator(rng)
            return Estimate(float(self.offset), self.classical_queries, 0, seed, info=dict(self.info))
        est = _summation_fixed_t(self.oracle, self.t, rng, self.repetitions, backend)
        est.value = float(self.offset + self.scale * est.value)
        est.queries_used += self.classical_queries
        est.qubits_used += self.extra_qubits
        est.info.update(self.info)
        return est


def constant_run(value: float, classical_queries: int = 0, info: dict | None = None) -> PreparedRun:
    """A run that needs no quantum work (e.g. a residual already below tolerance)."""
    oracle = BitQueryOracle(np.zeros(2, dtype=np.int64))
    return PreparedRun(oracle, 1, 1, offset=value, scale=0.0, classical_queries=classical_queries,
                       info=dict(info or {}), quantum=False)


def boolean_summation(oracle: BitQueryOracle, n: int, rng, repetitions: int = REPETITIONS,
                      backend: str = "auto") -> Estimate:
    """Median of ``repetitions`` amplitude-estimation runs within budget ``n``.

    Each repetition gets ``t = floor(log2(n / R))`` phase qubits; leftover
    budget is unspent.
    """
    if not oracle.is_boolean:
        raise ValueError("Boolean summation needs a Boolean oracle")
    t = phase_qubits_for_budget(n, repetitions)
    est = _summation_fixed_t(oracle, t, rng, repetitions, backend)
    est.info["budget"] = n
    return est


def recover_exact_mean(approx: float, n: int) -> Fraction:
    """``(ceil(N A + 1/2) - 1) / N``; exact when ``|A - B_N(f)| < 1/(2N)``."""
    a = Fraction(approx) if not isinstance(approx, Fraction) else approx
    return Fraction(math.ceil(n * a + Fraction(1, 2)) - 1, n)


def prepare_randomized_boolean(f: BooleanTable, eps: float, rng, repetitions: int = REPETITIONS,
                               plan: str = "exact") -> PreparedRun:
    if not 0 < eps < 0.5:
        raise ValueError("epsilon must lie in (0, 0.5)")
    gen, _ = as_generator(rng)
    m, t = plan_randomized(eps, repetitions, plan)
    oracle = make_randomized_subsample_oracle(f, m, gen)
    return PreparedRun(oracle, t, repetitions,
                       info={"subsample": m, "plan": plan, "subsample_mean": oracle.mean()})


def randomized_boolean_summation(f: BooleanTable, eps: float, rng, repetitions: int = REPETITIONS,
                                 plan: str = "exact", backend: str = "auto") -> Estimate:
    """Amplitude estimation on ``g(l) = f(omega_l)``, omega iid uniform.

    The register depends on eps only: ``log2 m + 1 + t`` qubits whatever N is.
    """
    gen, seed = as_generator(rng)
    est = prepare_randomized_boolean(f, eps, gen, repetitions, plan).run(gen, backend)
    est.seed = seed
    return est


def prepare_deterministic_boolean(f: BooleanTable, eps: float, repetitions: int = REPETITIONS,
                                  plan: str = "exact") -> PreparedRun:
    if not 0 < eps < 0.5:
        raise ValueError("epsilon must lie in (0, 0.5)")
    t = plan_deterministic(eps, repetitions, plan)
    return PreparedRun(boolean_oracle(f), t, repetitions, info={"plan": plan})


def deterministic_boolean_summation(f: BooleanTable, eps: float, rng, repetitions: int = REPETITIONS,
                                    plan: str = "exact", backend: str = "auto") -> Estimate:
    """Standard-setting summation of the whole table at worst-case error eps."""
    return prepare_deterministic_boolean(f, eps, repetitions, plan).run(rng, backend)


def boost_repetitions(delta: float) -> int:
    """``ceil(8 ln(1/delta))``: median of that many 3/4-reliable runs fails w.p. <= delta.

    Hoeffding/Chernoff with KL(1/2 || 1/4) = ln(4/3)/2 > 1/8 gives failure
    probability <= exp(-8 ln(1/delta) * 0.1438) <= delta.
    """
    if not 0 < delta <= 0.25:
        raise ValueError("delta must lie in (0, 1/4]")
    return math.ceil(8 * math.log(1 / delta))


def boost_success(run: Callable[[np.random.Generator], Estimate | float], delta: float, rng) -> Estimate:
    gen, seed = as_generator(rng)
    reps = boost_repetitions(delta)
    results = [run(gen) for _ in range(reps)]
    values = [r.value if isinstance(r, Estimate) else float(r) for r in results]
    queries = sum(r.queries_used for r in results if isinstance(r, Estimate))
    qubits = max((r.qubits_used for r in results if isinstance(r, Estimate)), default=0)
    return Estimate(float(np.median(values)), queries, qubits, seed,
                    trace=values, info={"repetitions": reps, "delta": delta})
