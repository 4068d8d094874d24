"""The acceptance suite: twelve checks at desk scale, each returning pass/fail with details."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .amplitude import (
    REPETITIONS,
    median_l2_error,
    prepare_deterministic_boolean,
    prepare_randomized_boolean,
    qae_exact_distribution,
    qae_statevector_distribution,
    recover_exact_mean,
)
from .baselines import (
    certify_adversarial_error,
    info_complexity_boolean,
    lipschitz_quadrature,
    random_lipschitz_function,
)
from .catalog import PROBLEMS, R0_FUNCTIONS
from .integration import SmoothClassDescriptor, prepare_integrate_r0, prepare_integrate_rge1
from .metrics import (
    chebyshev_check,
    collect_laws,
    extremal_law,
    qubit_lower_bound_check,
)
from .oracles import BooleanTable, RealTable, boolean_oracle
from .paths import (
    PATH_CATALOG,
    PATH_QUBIT_CONSTANT,
    deterministic_qubit_requirement,
    kl_eigenpair,
    kl_eigenvalues,
    prepare_path_integrate,
)
from .amplitude import constant_run
from .summation import BinaryExpansion


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.title}: {self.detail} ({self.seconds:.1f}s)"


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def _table_with_count(n: int, k: int, rng: np.random.Generator) -> BooleanTable:
    vals = np.zeros(n, dtype=np.int64)
    vals[rng.permutation(n)[:k]] = 1
    return BooleanTable(vals)


# 1 ---------------------------------------------------------------------------

def backend_equivalence() -> tuple[bool, str]:
    """Every count for N in {8, 16, 64} (all 256 tables for N = 8), t in 2..5."""
    rng = np.random.default_rng(1)
    worst, cases = 0.0, 0
    for n in (8, 16, 64):
        if n == 8:
            tables = [BooleanTable([(m >> b) & 1 for b in range(8)]) for m in range(256)]
        else:
            tables = [_table_with_count(n, k, rng) for k in range(n + 1)]
        for table in tables:
            for t in range(2, 6):
                sv = qae_statevector_distribution(boolean_oracle(table), t)
                an = qae_exact_distribution(table.mean(), t)
                worst = max(worst, 0.5 * float(np.abs(sv - an).sum()))
                cases += 1
    return worst <= 1e-9, f"max TV {worst:.2e} over {cases} (table, t) cases, tolerance 1e-9"


# 2 ---------------------------------------------------------------------------

def query_rate() -> tuple[bool, str]:
    """Slope of the amplitude-averaged exact L2 error vs budget n = 16..1024."""
    budgets = [16, 32, 64, 128, 256, 512, 1024]
    grid = np.arange(1025) / 1024
    mean_err, worst_err = [], []
    for n in budgets:
        t = int(math.floor(math.log2(n / REPETITIONS)))
        e = median_l2_error(grid, t, REPETITIONS)
        mean_err.append(float(e.mean()))
        worst_err.append(float(e.max()))
    slope = loglog_slope(budgets, mean_err)
    worst_slope = loglog_slope(budgets, worst_err)
    ok = abs(slope + 1) <= 0.1
    return ok, (f"slope {slope:.3f} (target -1 +- 0.1, error averaged over a = k/1024); "
                f"worst-case-over-a slope {worst_slope:.3f} reported only")


# 3 ---------------------------------------------------------------------------

def qubit_separation() -> tuple[bool, str]:
    eps = 0.05
    rng = np.random.default_rng(3)
    det, ran = {}, {}
    for n in (2 ** 8, 2 ** 16):
        f = _table_with_count(n, n // 3, rng)
        det[n] = prepare_deterministic_boolean(f, eps).qubits
        ran[n] = prepare_randomized_boolean(f, eps, rng).qubits
    ok = det[2 ** 16] - det[2 ** 8] == 8 and ran[2 ** 16] == ran[2 ** 8]
    return ok, (f"deterministic {det[2 ** 8]} -> {det[2 ** 16]} qubits (+{det[2 ** 16] - det[2 ** 8]}), "
                f"randomized {ran[2 ** 8]} -> {ran[2 ** 16]}")


# 4 ---------------------------------------------------------------------------

def exact_recovery() -> tuple[bool, str]:
    offsets = [Fraction(s, 1000) for s in (-999, -700, -333, -1, 0, 1, 250, 500, 999)]
    checked, failures = 0, 0
    for n in range(1, 257):
        half = Fraction(1, 2 * n)
        for k in range(n + 1):
            target = Fraction(k, n)
            for off in offsets:
                a = target + off * half  # |A - k/N| < 1/(2N)
                if recover_exact_mean(a, n) != target:
                    failures += 1
                checked += 1
    return failures == 0, f"{checked} rational cases over N = 1..256, {failures} failures"


# 5 ---------------------------------------------------------------------------

def reduction_identity() -> tuple[bool, str]:
    rng = np.random.default_rng(5)
    worst_gap, mismatches = 0.0, 0
    shapes = [(16, 6)] + [(int(rng.integers(1, 17)), int(rng.integers(1, 7))) for _ in range(99)]
    for n, k in shapes:
        vals = rng.random(n)
        vals[rng.random(n) < 0.1] = 1.0
        vals[rng.random(n) < 0.1] = rng.integers(0, 1 << k, size=1) / (1 << k)
        exp = BinaryExpansion(RealTable(vals), k)
        total = sum(exp.b(i, j, p) for i, j, p in exp.domain())
        if Fraction(total, n << k) != exp.s_k():
            mismatches += 1
        gap = abs(Fraction(float(vals.sum())) / n - exp.s_k())
        worst_gap = max(worst_gap, float(gap * (1 << k)))
    ok = mismatches == 0 and worst_gap <= 1.0
    return ok, (f"100 tables (N <= 16, K <= 6): {mismatches} identity mismatches; "
                f"max |SUM - S_K| * 2^K = {worst_gap:.4f} (must be <= 1)")


# 6 ---------------------------------------------------------------------------

def r0_separation(draws: int = 200, eps: float = 0.1) -> tuple[bool, str]:
    rng = np.random.default_rng(6)
    worst_cert = math.inf
    for k in range(11):
        for d in (1, 2):
            m = 1 << k
            sets = [rng.random((m, d))]
            side = round(m ** (1 / d))
            if side ** d == m:
                axis = (np.arange(side) + 0.5) / side
                sets.append(np.stack(np.meshgrid(*([axis] * d), indexing="ij"), -1).reshape(-1, d))
            for pts in sets:
                worst_cert = min(worst_cert, certify_adversarial_error(pts, 0.2))
    cert_ok = worst_cert >= 0.8
    lines, rand_ok = [], True
    for d in (1, 2):
        for name, tf in sorted(R0_FUNCTIONS.items()):
            law = collect_laws(lambda f, g: prepare_integrate_r0(f, d, eps, g), tf.f, draws, rng)
            err, se = law.randomized_error(tf.truth(d))
            rand_ok &= err + 3 * se <= eps
            lines.append(f"{name}/d{d} {err:.4f}+-{se:.4f}")
    return cert_ok and rand_ok, (f"deterministic sets: certified error >= {worst_cert:.4f} (need 0.8); "
                                 f"randomized e at eps={eps}: " + ", ".join(lines))


# 7 ---------------------------------------------------------------------------

def r1_query_rate() -> tuple[bool, str]:
    eps_list = [0.2, 0.1, 0.05, 0.025]
    desc = SmoothClassDescriptor(1, 1)
    f = lambda x: np.sin(np.pi * x[:, 0]) / np.pi  # noqa: E731
    truth = 2 / math.pi ** 2
    queries, errs = [], []
    for eps in eps_list:
        run = prepare_integrate_rge1(f, desc, eps, np.random.default_rng(7))
        queries.append(run.queries)
        v, p = run.law()
        errs.append(math.sqrt(float(np.sum(p * (v - truth) ** 2))))
    slope = loglog_slope(eps_list, queries)
    ok = abs(slope + 0.5) <= 0.15 and all(e <= eps for e, eps in zip(errs, eps_list))
    return ok, (f"queries {queries} at eps {eps_list}: slope {slope:.3f} (target -0.5 +- 0.15); "
                f"exact L2 errors {', '.join(f'{e:.4f}' for e in errs)}")


# 8 ---------------------------------------------------------------------------

def path_integration(draws: int = 100, eps: float = 0.1) -> tuple[bool, str]:
    rng = np.random.default_rng(8)
    f = PATH_CATALOG["cos-of-mean"]
    truth = f.truth
    closed = math.exp(-1 / 6)
    z = rng.normal(0.0, math.sqrt(1 / 3), size=10 ** 7)
    c = np.cos(z)
    mc, mc_se = float(c.mean()), float(c.std() / math.sqrt(z.size))
    oracle_ok = abs(truth - closed) <= 1e-12 and abs(mc - truth) <= 3 * mc_se
    law = collect_laws(lambda g, gen: prepare_path_integrate(g, eps, gen), f, draws, rng)
    err, se = law.randomized_error(truth)
    qubits = max(law.qubits)
    bound = PATH_QUBIT_CONSTANT * math.log2(1 / eps)
    det_req = deterministic_qubit_requirement(eps)
    ok = oracle_ok and err + 3 * se <= eps and qubits <= bound and qubits < det_req
    return ok, (f"Gauss-Hermite {truth:.10f} vs exp(-1/6) {closed:.10f}, 1e7-sample MC {mc:.5f}+-{mc_se:.5f}; "
                f"randomized e {err:.4f}+-{se:.4f} over {draws} draws; qubits {qubits} <= "
                f"{PATH_QUBIT_CONSTANT:g} log2(1/eps) = {bound:.1f} and < eps^-2 log2(1/eps) = {det_req:.0f}")


# 9 ---------------------------------------------------------------------------

def kl_trace() -> tuple[bool, str]:
    l1, l2 = kl_eigenpair(1)[1], kl_eigenpair(2)[1]
    s = float(np.sum(kl_eigenvalues(1000)))
    ok = (abs(l1 - 4 / math.pi ** 2) <= 1e-12 and abs(l2 - 4 / (9 * math.pi ** 2)) <= 1e-12
          and 0.5 - 2e-4 <= s <= 0.5)
    return ok, f"lambda1 {l1:.12f}, lambda2 {l2:.12f}, sum_1000 {s:.8f}"


# 10 --------------------------------------------------------------------------

def _mc_algorithm(n: int, d: int):
    def alg(f, g):
        return constant_run(float(np.mean(f(g.random((n, d))))), n)
    return alg


def chebyshev_relations(draws: int = 200, eps: float = 0.2) -> tuple[bool, str]:
    rng = np.random.default_rng(10)
    deltas = (0.05, 0.25)
    params = {"N": 64, "d": 1, "r": 1, "seed": 10}
    failures, checks = [], 0

    def check(label, law, truth, form, modes):
        nonlocal checks
        e, se = law.randomized_error(truth)
        for dl in deltas:
            for mode in modes:
                res = chebyshev_check(law.probabilistic_error(truth, dl, mode), e, dl, form, se)
                checks += 1
                if not res.passed:
                    failures.append(f"{label} delta={dl} {mode}")

    for pname, prob in sorted(PROBLEMS.items()):
        suite = prob.suite(params)
        for variant in prob.variants:
            alg = prob.algorithm(variant, eps, params)
            w = draws if variant == "randomized" else 1
            for member in suite:
                law = collect_laws(alg, member.instance, w, rng)
                check(f"{pname}/{variant}/{member.name}", law, member.truth, "quantum", ("joint", "nested"))
    for name, tf in sorted(R0_FUNCTIONS.items()):
        law = collect_laws(_mc_algorithm(100, 1), tf.f, draws, rng)
        check(f"monte-carlo/{name}", law, tf.truth(1), "classical", ("joint",))
    for s in range(5):
        plf = random_lipschitz_function(s)
        law = collect_laws(lambda f, g: constant_run(lipschitz_quadrature(f, 8), 8), plf, 1, rng)
        check(f"midpoint/{s}", law, plf.integral(), "classical", ("joint",))
    margins = []
    for dl in deltas:
        for form, mode in (("quantum", "nested"), ("classical", "joint")):
            law = extremal_law(dl, 1.0, form)
            e, _ = law.randomized_error(0.0)
            res = chebyshev_check(law.probabilistic_error(0.0, dl, mode), e, dl, form)
            checks += 1
            margins.append(res.margin)
            if not res.passed or res.margin > 1e-9:
                failures.append(f"extremal {form} delta={dl} margin {res.margin:.2e}")
    detail = (f"{checks} checks (all problem/variant pairs, MC and midpoint baselines, extremal laws "
              f"with margins {max(margins):.1e} max); failures: {failures or 'none'}")
    return not failures, detail


# 11 --------------------------------------------------------------------------

def lower_bound_consistency() -> tuple[bool, str]:
    rng = np.random.default_rng(11)
    failures, checks = [], 0

    def record(label, results, extra=None):
        nonlocal checks
        for key, res in results.items():
            checks += 1
            if not res.passed:
                failures.append(f"{label}:{key}")
        if extra is not None:
            checks += 1
            if not extra:
                failures.append(f"{label}:strict-worst-case")

    for n in (2 ** 4, 2 ** 8, 2 ** 16):
        f = _table_with_count(n, n // 5, rng)
        for eps in (0.2, 0.1, 0.05):
            det = prepare_deterministic_boolean(f, eps)
            strict = 2 ** det.qubits >= info_complexity_boolean(eps, n)
            record(f"boolean-det N={n} eps={eps}", qubit_lower_bound_check(det.qubits, eps, "boolean-sum",
                                                                           "deterministic", n), strict)
            ran = prepare_randomized_boolean(f, eps, rng)
            record(f"boolean-ran N={n} eps={eps}",
                   qubit_lower_bound_check(ran.qubits, eps, "boolean-sum", "randomized", n))
    params = {"N": 64, "d": 1, "r": 1, "seed": 11}
    for pname, prob in sorted(PROBLEMS.items()):
        if pname == "boolean-sum":
            continue
        member = prob.suite(params)[0]
        for variant in prob.variants:
            for eps in (0.2, 0.1):
                run = prob.algorithm(variant, eps, params)(member.instance, rng)
                n = params["N"] if pname == "real-sum" else None
                record(f"{pname}/{variant} eps={eps}",
                       qubit_lower_bound_check(run.qubits, eps, pname, variant, n))
    n, eps = 2 ** 16, 0.05
    ran = prepare_randomized_boolean(_table_with_count(n, n // 3, rng), eps, rng)
    bound = info_complexity_boolean(eps, n)
    separated = 2 ** ran.qubits < bound
    ok = not failures and separated
    return ok, (f"{checks} bound checks, failures: {failures or 'none'}; separation at N=2^16, eps=0.05: "
                f"2^{ran.qubits} = {2 ** ran.qubits} < ceil(N(1-2eps)) = {bound}")


# 12 --------------------------------------------------------------------------

def classical_baselines() -> tuple[bool, str]:
    rng = np.random.default_rng(12)
    sizes = [100, 1000, 10000]
    reps = 2000
    rms = []
    for n in sizes:
        est = np.array([rng.random(n).mean() for _ in range(reps)])
        rms.append(float(np.sqrt(np.mean((est - 0.5) ** 2))))
    slope = loglog_slope(sizes, rms)
    worst = 0.0
    for s in range(200):
        f = random_lipschitz_function(np.random.default_rng(1000 + s))
        for n in (2, 4, 16, 64, 100):
            worst = max(worst, abs(lipschitz_quadrature(f, n) - f.integral()) * 4 * n)
    ok = abs(slope + 0.5) <= 0.05 and worst <= 1.0
    return ok, (f"MC RMS slope {slope:.3f} (target -0.5 +- 0.05, {reps} replications); "
                f"midpoint max error / (1/(4n)) = {worst:.3f} over 200 functions")


CRITERIA: dict[int, tuple[str, Callable[[], tuple[bool, str]]]] = {
    1: ("backend equivalence", backend_equivalence),
    2: ("Boolean summation query rate", query_rate),
    3: ("qubit separation", qubit_separation),
    4: ("exact recovery", exact_recovery),
    5: ("real-summation reduction identity", reduction_identity),
    6: ("r=0 separation", r0_separation),
    7: ("r>=1 query rate", r1_query_rate),
    8: ("path integration", path_integration),
    9: ("KL trace", kl_trace),
    10: ("Chebyshev relations", chebyshev_relations),
    11: ("lower-bound consistency", lower_bound_consistency),
    12: ("classical baselines", classical_baselines),
}


def run_criterion(number: int) -> CriterionResult:
    title, fn = CRITERIA[number]
    start = time.perf_counter()
    passed, detail = fn()
    return CriterionResult(number, title, bool(passed), detail, time.perf_counter() - start)


def run_criteria(only=None, echo: bool = False) -> list[CriterionResult]:
    out = []
    for number in sorted(only or CRITERIA):
        res = run_criterion(number)
        if echo:
            print(res.line(), flush=True)
        out.append(res)
    return out
