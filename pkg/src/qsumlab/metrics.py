"""Error functionals, Chebyshev relations and lower-bound consistency checks.

The expectation over measurement outcomes is always exact (analytic or
statevector law); the expectation over the random element omega is a Monte
Carlo average over W independent draws with a reported standard error.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .amplitude import PreparedRun
from .baselines import entropy_cells, info_complexity_boolean, randomized_info_complexity
from .estimate import Estimate, as_generator

# algorithm(instance, generator) -> PreparedRun; instance is whatever the problem needs
Algorithm = Callable[[object, np.random.Generator], PreparedRun]


@dataclass
class SuiteMember:
    name: str
    instance: object
    truth: float | None
    provenance: str = ""


@dataclass
class OutcomeLaw:
    """Exact per-omega outcome distributions for one function."""

    values: list[np.ndarray]
    probs: list[np.ndarray]
    queries: list[int] = field(default_factory=list)
    qubits: list[int] = field(default_factory=list)
    seeds: list[int] = field(default_factory=list)

    def __post_init__(self):
        for p in self.probs:
            if abs(float(np.sum(p)) - 1.0) > 1e-9:
                raise ValueError(f"outcome law sums to {np.sum(p)}, not 1")

    @property
    def draws(self) -> int:
        return len(self.values)

    def squared_errors(self, truth: float) -> np.ndarray:
        """E(f, omega) for every drawn omega."""
        return np.array([float(np.sum(p * (v - truth) ** 2)) for v, p in zip(self.values, self.probs)])

    def randomized_error(self, truth: float) -> tuple[float, float]:
        """(sqrt of mean E(f, omega), delta-method standard error)."""
        sq = self.squared_errors(truth)
        mean = float(sq.mean())
        err = math.sqrt(mean)
        if self.draws < 2 or err == 0.0:
            return err, 0.0
        se_sq = float(sq.std(ddof=1)) / math.sqrt(self.draws)
        return err, se_sq / (2 * err)

    def probabilistic_error(self, truth: float, delta: float, mode: str = "joint") -> float:
        """Smallest alpha with ``|S(f) - A| <= alpha`` outside an event of probability <= delta.

        ``joint``: one quantile of the mixed (j, omega) law.  ``nested``: per
        omega the j-quantile at delta, then the omega-quantile at delta of
        those values (the sup-inf form that the Chebyshev bound with delta**-1
        is proved for).
        """
        if not 0 < delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if mode == "joint":
            errs = np.concatenate([np.abs(v - truth) for v in self.values])
            w = np.concatenate(self.probs) / self.draws
            return _upper_quantile(errs, w, delta)
        if mode == "nested":
            inner = np.array([_upper_quantile(np.abs(v - truth), p, delta)
                              for v, p in zip(self.values, self.probs)])
            return _upper_quantile(inner, np.full(inner.size, 1.0 / inner.size), delta)
        raise ValueError(f"unknown mode {mode!r}")


def _upper_quantile(errs: np.ndarray, weights: np.ndarray, delta: float) -> float:
    """min alpha with ``P(err > alpha) <= delta``."""
    order = np.argsort(errs, kind="stable")
    e = errs[order]
    tail = np.cumsum(weights[order][::-1])[::-1]  # tail[i] = P(err >= e[i]) over sorted atoms
    # P(err > e[i]) = tail[i+1]; pick the first atom whose strict tail is <= delta
    strict = np.append(tail[1:], 0.0)
    ok = np.nonzero(strict <= delta + 1e-12)[0]
    return float(e[ok[0]])


def collect_laws(algorithm: Algorithm, instance, draws: int, rng, backend: str = "analytic") -> OutcomeLaw:
    """Run the random part of ``algorithm`` ``draws`` times and keep each exact law."""
    if draws < 1:
        raise ValueError("need at least one omega draw")
    gen, _ = as_generator(rng)
    seeds = gen.integers(0, 2 ** 63 - 1, size=draws)
    values, probs, queries, qubits = [], [], [], []
    for s in seeds:
        run = algorithm(instance, np.random.default_rng(int(s)))
        v, p = run.law(backend)
        values.append(np.asarray(v, dtype=float))
        probs.append(np.asarray(p, dtype=float))
        queries.append(run.queries)
        qubits.append(run.qubits)
    return OutcomeLaw(values, probs, queries, qubits, [int(s) for s in seeds])


@dataclass
class CheckResult:
    passed: bool
    lhs: float
    rhs: float
    note: str = ""

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


@dataclass
class ErrorReport:
    problem: str
    algorithm: str
    epsilon: float
    delta: list[float]
    per_function: list[dict]
    suite_max: float
    suite_max_se: float
    prob_suite_max: dict[float, float]
    queries_mean: float
    qubits: int
    checks: dict[str, bool] = field(default_factory=dict)

    def to_json(self) -> str:
        d = asdict(self)
        d["prob_suite_max"] = {str(k): v for k, v in self.prob_suite_max.items()}
        for row in d["per_function"]:
            row["prob_error"] = {str(k): v for k, v in row["prob_error"].items()}
        return json.dumps(d, sort_keys=True, indent=2)


def _check_resolution(draws: int, deltas: Sequence[float], randomized: bool) -> None:
    if randomized and deltas and draws * min(deltas) < 10:
        raise ValueError(f"W * delta = {draws * min(deltas):g} < 10: too few omega draws for delta")


def randomized_error(algorithm: Algorithm, suite: Sequence[SuiteMember], draws: int, rng,
                     deltas: Sequence[float] = (), problem: str = "", name: str = "",
                     epsilon: float = float("nan"), randomized: bool = True,
                     mode: str = "joint", backend: str = "analytic") -> ErrorReport:
    """Randomized error per function, suite max, and probabilistic errors at each delta.

    ``randomized=False`` marks an omega-free algorithm: one draw is enough.
    """
    gen, _ = as_generator(rng)
    draws = draws if randomized else 1
    _check_resolution(draws, deltas, randomized)
    rows, worst, worst_se = [], 0.0, 0.0
    prob_max = {float(d): 0.0 for d in deltas}
    queries, qubits = [], 0
    for member in suite:
        if member.truth is None:
            raise ValueError(f"no ground truth for {member.name!r}")
        law = collect_laws(algorithm, member.instance, draws, gen, backend)
        err, se = law.randomized_error(member.truth)
        probs = {float(d): law.probabilistic_error(member.truth, d, mode) for d in deltas}
        rows.append({"name": member.name, "truth": member.truth, "rand_error": err,
                     "rand_error_se": se, "prob_error": probs,
                     "queries_mean": float(np.mean(law.queries)), "qubits": int(max(law.qubits))})
        if err >= worst:
            worst, worst_se = err, se
        for d in prob_max:
            prob_max[d] = max(prob_max[d], probs[d])
        queries.extend(law.queries)
        qubits = max(qubits, max(law.qubits))
    return ErrorReport(problem, name, epsilon, [float(d) for d in deltas], rows, worst, worst_se,
                       prob_max, float(np.mean(queries)) if queries else 0.0, qubits)


def probabilistic_error(algorithm: Algorithm, suite: Sequence[SuiteMember], delta: float, draws: int,
                        rng, mode: str = "joint", randomized: bool = True) -> float:
    report = randomized_error(algorithm, suite, draws, rng, deltas=[delta], randomized=randomized, mode=mode)
    return report.prob_suite_max[float(delta)]


# --- Chebyshev relations ------------------------------------------------------

def chebyshev_bound(rand_error: float, delta: float, form: str = "quantum") -> float:
    """delta**-1 e (quantum, randomized queries) or delta**-1/2 e (classical randomized)."""
    if form == "quantum":
        return rand_error / delta
    if form == "classical":
        return rand_error / math.sqrt(delta)
    raise ValueError(f"unknown form {form!r}")


def chebyshev_check(prob_error: float, rand_error: float, delta: float, form: str = "quantum",
                    rand_error_se: float = 0.0, z: float = 3.0) -> CheckResult:
    """``prob_error <= bound(rand_error + z * se)``; se is the omega-sampling error."""
    rhs = chebyshev_bound(rand_error + z * rand_error_se, delta, form)
    return CheckResult(prob_error <= rhs, prob_error, rhs, form)


def chebyshev_check_report(report: ErrorReport, delta: float, form: str = "quantum") -> CheckResult:
    return chebyshev_check(report.prob_suite_max[float(delta)], report.suite_max, delta, form,
                           report.suite_max_se)


def extremal_law(delta: float, size: float = 1.0, form: str = "quantum",
                 slack: float = 1e-10) -> OutcomeLaw:
    """Outcome law that meets the Chebyshev bound up to a relative ``slack``.

    ``classical``: one omega-free law, error ``size`` with probability
    ``delta (1 + slack)``.  ``quantum``: a fraction ``delta (1 + slack)`` of
    the omegas carry that same two-point law, the rest are exact (use the
    nested probabilistic error).
    """
    q = delta * (1 + slack)
    two_point = (np.array([0.0, size]), np.array([1 - q, q]))
    if form == "classical":
        return OutcomeLaw([two_point[0]], [two_point[1]])
    if form != "quantum":
        raise ValueError(f"unknown form {form!r}")
    return _WeightedOutcomeLaw([two_point[0], np.array([0.0])], [two_point[1], np.array([1.0])],
                               omega_weights=np.array([q, 1 - q]))


class _WeightedOutcomeLaw(OutcomeLaw):
    """OutcomeLaw whose omega atoms carry explicit probabilities (exact laws, not samples)."""

    def __init__(self, values, probs, omega_weights):
        super().__init__(values, probs)
        self.omega_weights = np.asarray(omega_weights, dtype=float)

    def randomized_error(self, truth: float) -> tuple[float, float]:
        return math.sqrt(float(np.sum(self.omega_weights * self.squared_errors(truth)))), 0.0

    def probabilistic_error(self, truth: float, delta: float, mode: str = "nested") -> float:
        if mode == "joint":
            errs = np.concatenate([np.abs(v - truth) for v in self.values])
            w = np.concatenate([p * wt for p, wt in zip(self.probs, self.omega_weights)])
            return _upper_quantile(errs, w, delta)
        inner = np.array([_upper_quantile(np.abs(v - truth), p, delta)
                          for v, p in zip(self.values, self.probs)])
        return _upper_quantile(inner, self.omega_weights, delta)


# --- lower-bound consistency --------------------------------------------------

# half-width of S(F) per problem: the range of the solution operator
SOLUTION_HALFWIDTH = {
    "boolean-sum": 0.5,
    "real-sum": 0.5,
    "integrate-r0": 1.0,
    "integrate-r1": 1.0,
    "path-integrate": 1.0,
}


def qubit_lower_bound_check(qubits: int, eps: float, problem: str, setting: str,
                            n: int | None = None) -> dict[str, CheckResult]:
    """Consistency of a measured qubit count with the closed-form lower bounds.

    Deterministic queries: ``2**k >= comp^{inf-wor}(2 eps)`` (Boolean sum)
    and ``2**k >= n(eps, S(F))``.  Randomized queries: the entropy bound and
    ``2**k >= comp^{inf-ran}(eps)``; the worst-case bound is not asserted
    since randomized queries legitimately beat it.
    """
    if problem not in SOLUTION_HALFWIDTH:
        raise ValueError(f"no lower-bound formula registered for {problem!r}")
    if setting not in ("deterministic", "randomized"):
        raise ValueError(f"unknown setting {setting!r}")
    size = 2.0 ** qubits
    out = {}
    cells = entropy_cells(eps, SOLUTION_HALFWIDTH[problem])
    out["entropy"] = CheckResult(size >= cells, float(cells), size, "2^k >= ceil(h/eps)")
    if setting == "deterministic":
        if problem == "boolean-sum":
            if n is None:
                raise ValueError("Boolean summation needs N")
            bound = info_complexity_boolean(min(2 * eps, 0.5), n)
            out["info_worst_2eps"] = CheckResult(size >= bound, float(bound), size,
                                                 "2^k >= ceil(N(1 - 4 eps))")
            strict = info_complexity_boolean(eps, n)
            out["info_worst"] = CheckResult(size >= strict, float(strict), size,
                                            "2^k >= ceil(N(1 - 2 eps))")
    else:
        bound = randomized_info_complexity(eps, n)
        out["info_randomized"] = CheckResult(size >= bound, float(bound), size,
                                             "2^k >= two-point randomized bound")
    return out


# --- resource accounting ------------------------------------------------------

def resource_report(estimates: Sequence[Estimate], epsilon: float | None = None,
                    truth: float | None = None) -> dict:
    """Mean queries (average of n_omega), max qubits, and RMS error if the truth is known."""
    if not estimates:
        raise ValueError("no estimates")
    row = {
        "epsilon": epsilon,
        "queries": float(np.mean([e.queries_used for e in estimates])),
        "qubits": int(max(e.qubits_used for e in estimates)),
        "error": None,
    }
    if truth is not None:
        row["error"] = float(np.sqrt(np.mean([(e.value - truth) ** 2 for e in estimates])))
    return row
