"""Path integration under the Wiener measure.

Paths are represented by Karhunen-Loeve coefficients: ``x = sum_i t_i eta_i``
with independent ``t_i ~ N(0, lambda_i)``.  A functional that is Lipschitz in
L2 stays Lipschitz (same constant) in the Euclidean norm of the coefficients,
since the ``eta_i`` are orthonormal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .amplitude import REPETITIONS, PreparedRun
from .estimate import Estimate, as_generator
from .oracles import RealTable, next_pow2
from .summation import prepare_table_summation

# qubits_used <= PATH_QUBIT_CONSTANT * log2(1/eps) for eps <= 0.3 (checked in the tests).
PATH_QUBIT_CONSTANT = 12.0


def kl_eigenpair(i: int) -> tuple[Callable[[np.ndarray], np.ndarray], float]:
    """(eta_i, lambda_i) of the covariance min(s, t) on [0,1]."""
    if i < 1:
        raise ValueError("eigenpair index starts at 1")
    w = (2 * i - 1) * math.pi / 2

    def eta(x: np.ndarray) -> np.ndarray:
        return math.sqrt(2.0) * np.sin(w * np.asarray(x, dtype=float))

    return eta, 1.0 / (w * w)


def kl_eigenvalues(d: int) -> np.ndarray:
    i = np.arange(1, d + 1)
    return 4.0 / (math.pi ** 2 * (2 * i - 1) ** 2)


def kl_mean_weights(d: int) -> np.ndarray:
    """Integrals of eta_i over [0,1]: 2 sqrt(2) / ((2i-1) pi)."""
    i = np.arange(1, d + 1)
    return 2 * math.sqrt(2.0) / ((2 * i - 1) * math.pi)


def kl_tail_bound(d: int) -> float:
    """sum_{i>d} lambda_i <= 1/(pi**2 d)."""
    return 1.0 / (math.pi ** 2 * d)


def truncation_dimension(eps: float, lipschitz: float = 1.0) -> int:
    """d = ceil(9 L**2 / (pi**2 eps**2)), so that ``L sqrt(tail) <= L / (pi sqrt d) <= eps/3``."""
    if not 0 < eps < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if not 0 < lipschitz <= 1:
        raise ValueError("Lipschitz constant must lie in (0, 1]")
    return max(1, math.ceil(9 * lipschitz ** 2 / (math.pi ** 2 * eps ** 2) - 1e-12))


def gaussian_sample_mu_d(d: int, rng, size: int | None = None) -> np.ndarray:
    """Coefficient vectors with independent ``t_i ~ N(0, lambda_i)``; shape (d,) or (size, d)."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    gen, _ = as_generator(rng)
    sd = np.sqrt(kl_eigenvalues(d))
    shape = (d,) if size is None else (size, d)
    return gen.standard_normal(shape) * sd


def path_from_coefficients(coef: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate ``sum_i t_i eta_i(x)``; ``coef`` is (d,) or (n, d), the result (len(x),) or (n, len(x))."""
    coef = np.asarray(coef, dtype=float)
    i = np.arange(1, coef.shape[-1] + 1)
    basis = math.sqrt(2.0) * np.sin(np.outer(np.asarray(x, dtype=float), (2 * i - 1) * math.pi / 2))
    return coef @ basis.T


@dataclass(frozen=True)
class PathIntegrand:
    """Functional on coefficient space, ``|f| <= 1`` and L2-Lipschitz with constant ``lipschitz``."""

    name: str
    evaluate: Callable[[np.ndarray], np.ndarray]  # (n, d) coefficients -> n values
    lipschitz: float = 1.0
    truth: float | None = None
    provenance: str = ""


def gauss_hermite_expectation(g: Callable[[np.ndarray], np.ndarray], variance: float,
                              nodes: int = 80) -> float:
    """E g(Z) for Z ~ N(0, variance) by probabilists' Gauss-Hermite quadrature."""
    x, w = np.polynomial.hermite_e.hermegauss(nodes)
    return float(np.sum(w * g(math.sqrt(variance) * x)) / math.sqrt(2 * math.pi))


def _mean_of_path(coef: np.ndarray) -> np.ndarray:
    coef = np.atleast_2d(coef)
    return coef @ kl_mean_weights(coef.shape[1])


def _catalog() -> dict[str, PathIntegrand]:
    # int_0^1 x(t) dt ~ N(0, 1/3): double integral of min(s, t).
    cos_truth = gauss_hermite_expectation(np.cos, 1.0 / 3.0)
    return {
        "cos-of-mean": PathIntegrand(
            "cos-of-mean", lambda c: np.cos(_mean_of_path(c)), 1.0, cos_truth,
            "closed-form: exp(-1/6) via Gauss-Hermite for E cos Z, Z ~ N(0, 1/3)"),
        "sin-of-mean": PathIntegrand(
            "sin-of-mean", lambda c: np.sin(_mean_of_path(c)), 1.0, 0.0,
            "symmetry: odd functional of a centered Gaussian"),
        "exp-neg-energy": PathIntegrand(
            "exp-neg-energy", lambda c: np.exp(-np.sum(np.atleast_2d(c) ** 2, axis=1)), 1.0,
            1.0 / math.sqrt(math.cosh(math.sqrt(2.0))),
            "closed-form: prod (1 + 2 lambda_i)**-1/2 = cosh(sqrt 2)**-1/2"),
        "zero": PathIntegrand("zero", lambda c: np.zeros(np.atleast_2d(c).shape[0]), 1.0, 0.0,
                              "closed-form: identically zero"),
    }


PATH_CATALOG = _catalog()


def prepare_path_integrate(f: PathIntegrand, eps: float, rng,
                           repetitions: int = REPETITIONS) -> PreparedRun:
    """Truncate to d coordinates, draw the MC points, set up the quantum table sum.

    Budget: eps/3 truncation bias, eps/3 MC spread (``n >= 9 eps**-2`` and
    ``|f| <= 1``), eps/3 quantum summation on f's scale.
    """
    if not 0 < eps < 0.5:
        raise ValueError("epsilon must lie in (0, 0.5)")
    gen, _ = as_generator(rng)
    d = truncation_dimension(eps, f.lipschitz)
    n = next_pow2(math.ceil(9 / eps ** 2))
    coef = gaussian_sample_mu_d(d, gen, size=n)
    vals = np.asarray(f.evaluate(coef), dtype=float).reshape(-1)
    if vals.size != n:
        raise ValueError("path functional returned the wrong number of values")
    if np.any(np.abs(vals) > 1 + 1e-12) or not np.all(np.isfinite(vals)):
        raise ValueError(f"path functional {f.name!r} left [-1, 1]")
    table = RealTable((np.clip(vals, -1, 1) + 1.0) / 2.0)
    run = prepare_table_summation(table, eps / 6, repetitions, offset=-1.0, scale=2.0)
    run.info.update({"truncation_dimension": d, "mc_points": n, "mc_mean": float(vals.mean()),
                     "functional": f.name})
    return run


def path_integrate(f: PathIntegrand | str, eps: float, rng, repetitions: int = REPETITIONS,
                   backend: str = "auto") -> Estimate:
    if isinstance(f, str):
        f = PATH_CATALOG[f]
    gen, seed = as_generator(rng)
    est = prepare_path_integrate(f, eps, gen, repetitions).run(gen, backend)
    est.seed = seed
    return est


def deterministic_qubit_requirement(eps: float) -> float:
    """eps**-2 log2(1/eps): the qubit order needed with deterministic queries."""
    return eps ** -2 * math.log2(1 / eps)
