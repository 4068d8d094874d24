"""Named problems, their test-function suites and ground truths."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .amplitude import prepare_deterministic_boolean, prepare_randomized_boolean
from .integration import SmoothClassDescriptor, prepare_integrate_r0, prepare_integrate_rge1
from .metrics import Algorithm, SuiteMember
from .oracles import BooleanTable, RealTable
from .paths import PATH_CATALOG, prepare_path_integrate
from .summation import prepare_real_summation, prepare_table_summation


@dataclass(frozen=True)
class TestFunction:
    name: str
    f: Callable[[np.ndarray], np.ndarray]
    truth: Callable[[int], float]  # dimension -> exact integral
    oracle: str  # closed-form | brute-force | symmetry
    provenance: str

    __test__ = False  # not a pytest class


def _prod(fn: Callable[[np.ndarray], np.ndarray]) -> Callable[[np.ndarray], np.ndarray]:
    return lambda x: np.prod(fn(np.atleast_2d(x)), axis=1)


# |f| <= 1 on [0,1]^d
R0_FUNCTIONS = {
    "prod-sin": TestFunction("prod-sin", _prod(lambda x: np.sin(np.pi * x)),
                             lambda d: (2 / math.pi) ** d, "closed-form", "(2/pi)^d"),
    "cos-sum": TestFunction("cos-sum", lambda x: np.cos(np.sum(np.atleast_2d(x), axis=1)),
                            lambda d: float(np.real(((np.exp(1j) - 1) / 1j) ** d)), "closed-form",
                            "Re((e^i - 1)/i)^d"),
    "centered-linear": TestFunction("centered-linear",
                                    lambda x: np.mean(2 * np.atleast_2d(x) - 1, axis=1),
                                    lambda d: 0.0, "symmetry", "odd about the cube center"),
}


def _r_functions(r: int) -> dict[str, TestFunction]:
    """Functions whose partial derivatives up to order r are bounded by 1."""
    s = math.pi ** r
    return {
        "sin-over-pi": TestFunction("sin-over-pi", _prod(lambda x: np.sin(np.pi * x) / s),
                                    lambda d: (2 / (math.pi * s)) ** d, "closed-form",
                                    "(2/pi^(r+1))^d"),
        "half-square": TestFunction("half-square", _prod(lambda x: x ** 2 / 2),
                                    lambda d: (1 / 6) ** d, "closed-form", "(1/6)^d"),
        "cos-shift": TestFunction("cos-shift", _prod(lambda x: np.cos(x + 0.3)),
                                  lambda d: (math.sin(1.3) - math.sin(0.3)) ** d, "closed-form",
                                  "(sin 1.3 - sin 0.3)^d"),
    }


def boolean_suite(n: int, seed: int) -> list[SuiteMember]:
    """Tables with counts spread over [0, N], positions shuffled by ``seed``."""
    rng = np.random.default_rng(seed)
    counts = sorted({0, 1, n // 7, n // 4, n // 3, n // 2, (3 * n) // 5, n - 1})
    out = []
    for k in counts:
        vals = np.zeros(n, dtype=np.int64)
        vals[rng.permutation(n)[:k]] = 1
        out.append(SuiteMember(f"count-{k}", BooleanTable(vals), k / n, "brute-force"))
    return out


def real_suite(n: int, seed: int) -> list[SuiteMember]:
    rng = np.random.default_rng(seed)
    tables = {
        "uniform": rng.random(n),
        "beta-skewed": rng.beta(0.5, 3.0, n),
        "constant-third": np.full(n, 1 / 3),
    }
    return [SuiteMember(k, RealTable(v), float(np.mean(v)), "brute-force") for k, v in tables.items()]


@dataclass(frozen=True)
class Problem:
    name: str
    description: str
    variants: tuple[str, ...]
    suite: Callable[[dict], list[SuiteMember]]
    algorithm: Callable[[str, float, dict], Algorithm]
    oracle: str


def _boolean_alg(variant: str, eps: float, params: dict) -> Algorithm:
    if variant == "deterministic":
        return lambda f, g: prepare_deterministic_boolean(f, eps)
    return lambda f, g: prepare_randomized_boolean(f, eps, g)


def _real_alg(variant: str, eps: float, params: dict) -> Algorithm:
    if variant == "deterministic":
        return lambda f, g: prepare_table_summation(f, eps)
    return lambda f, g: prepare_real_summation(f, eps, g)


def _r0_suite(params: dict) -> list[SuiteMember]:
    d = params["d"]
    return [SuiteMember(k, t.f, t.truth(d), t.oracle) for k, t in sorted(R0_FUNCTIONS.items())]


def _r0_alg(variant: str, eps: float, params: dict) -> Algorithm:
    d = params["d"]
    return lambda f, g: prepare_integrate_r0(f, d, eps, g)


def _r1_suite(params: dict) -> list[SuiteMember]:
    d = params["d"]
    return [SuiteMember(k, t.f, t.truth(d), t.oracle) for k, t in sorted(_r_functions(params["r"]).items())]


def _r1_alg(variant: str, eps: float, params: dict) -> Algorithm:
    desc = SmoothClassDescriptor(params["d"], params["r"])
    randomized = variant == "randomized"
    return lambda f, g: prepare_integrate_rge1(f, desc, eps, g, randomized=randomized)


def _path_suite(params: dict) -> list[SuiteMember]:
    return [SuiteMember(k, p, p.truth, p.provenance.split(":")[0]) for k, p in sorted(PATH_CATALOG.items())]


def _path_alg(variant: str, eps: float, params: dict) -> Algorithm:
    return lambda f, g: prepare_path_integrate(f, eps, g)


PROBLEMS: dict[str, Problem] = {
    "boolean-sum": Problem("boolean-sum", "mean of a Boolean table of size N",
                           ("deterministic", "randomized"),
                           lambda p: boolean_suite(p["N"], p["seed"]), _boolean_alg, "brute-force"),
    "real-sum": Problem("real-sum", "mean of a [0,1] table of size N",
                        ("deterministic", "randomized"),
                        lambda p: real_suite(p["N"], p["seed"]), _real_alg, "brute-force"),
    "integrate-r0": Problem("integrate-r0", "integral over [0,1]^d of bounded f",
                            ("randomized",), _r0_suite, _r0_alg, "closed-form"),
    "integrate-r1": Problem("integrate-r1", "integral over [0,1]^d of f in the C^r unit ball",
                            ("deterministic", "randomized"), _r1_suite, _r1_alg, "closed-form"),
    "path-integrate": Problem("path-integrate", "Wiener integral of an L2-Lipschitz functional",
                              ("randomized",), _path_suite, _path_alg, "closed-form"),
}


def list_catalog(pattern: str = "") -> list[str]:
    """Sorted lines ``problem<TAB>function<TAB>oracle<TAB>provenance`` matching ``pattern``."""
    lines = []
    for name, prob in sorted(PROBLEMS.items()):
        lines.append(f"{name}\t*\t{prob.oracle}\t{prob.description}; variants: {', '.join(prob.variants)}")
    for k, t in R0_FUNCTIONS.items():
        lines.append(f"integrate-r0\t{k}\t{t.oracle}\t{t.provenance}")
    for k, t in _r_functions(1).items():
        lines.append(f"integrate-r1\t{k}\t{t.oracle}\t{t.provenance}")
    for k, p in PATH_CATALOG.items():
        oracle, _, prov = p.provenance.partition(": ")
        lines.append(f"path-integrate\t{k}\t{oracle}\t{prov or oracle}")
    lines.append("boolean-sum\tcount-k\tbrute-force\texact count / N")
    lines.append("real-sum\tseeded tables\tbrute-force\texact table mean")
    return sorted(line for line in lines if pattern in line)
