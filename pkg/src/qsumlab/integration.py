"""Multivariate integration over [0,1]^d with randomized bit queries.

r = 0: Monte Carlo points become a real table that is summed by the
quantum routine.  r >= 1: a piecewise tensor Lagrange interpolant is
integrated classically and only the small residual goes to the quantum
summation (control variate).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .amplitude import REPETITIONS, PreparedRun, constant_run
from .errors import ResidualBoundError
from .estimate import Estimate, as_generator
from .oracles import RealTable, next_pow2
from .summation import prepare_table_summation, truncation_split

Integrand = Callable[[np.ndarray], np.ndarray]  # (n, d) points -> n values


@dataclass(frozen=True)
class SmoothClassDescriptor:
    """Unit ball of C^r([0,1]^d): all partial derivatives up to order r bounded by ``bound``."""

    d: int
    r: int
    bound: float = 1.0

    def __post_init__(self):
        if self.d < 1 or self.r < 0:
            raise ValueError("need d >= 1 and r >= 0")


def mc_sample_count(eps: float) -> int:
    """ceil(4 eps**-2) rounded up to a power of two: MC error <= eps/2 when |f| <= 1."""
    return max(2, next_pow2(math.ceil(4 / eps ** 2)))


def _evaluate(f: Integrand, points: np.ndarray, bound: float = 1.0) -> np.ndarray:
    vals = np.asarray(f(points), dtype=float).reshape(-1)
    if vals.size != points.shape[0]:
        raise ValueError("integrand returned the wrong number of values")
    if np.any(np.abs(vals) > bound + 1e-12) or not np.all(np.isfinite(vals)):
        raise ValueError(f"integrand exceeds |f| <= {bound} at a sampled point")
    return np.clip(vals, -bound, bound)


def prepare_integrate_r0(f: Integrand, d: int, eps: float, rng,
                         repetitions: int = REPETITIONS) -> PreparedRun:
    """Draw the MC points (the random element) and set up the quantum sum.

    Values are mapped to ``g = (f + 1)/2`` in [0,1]; the table sum runs at
    worst-case error ``eps/4`` on that scale, i.e. ``eps/2`` on f's scale,
    and the MC points contribute at most ``eps/2``.
    """
    if not 0 < eps < 0.5:
        raise ValueError("epsilon must lie in (0, 0.5)")
    if d < 1:
        raise ValueError("dimension must be >= 1")
    gen, _ = as_generator(rng)
    m = mc_sample_count(eps)
    points = gen.random((m, d))
    vals = _evaluate(f, points)
    table = RealTable((vals + 1.0) / 2.0)
    run = prepare_table_summation(table, eps / 4, repetitions, offset=-1.0, scale=2.0)
    run.info.update({"mc_points": m, "mc_mean": float(vals.mean())})
    return run


def integrate_r0(f: Integrand, d: int, eps: float, rng, repetitions: int = REPETITIONS,
                 backend: str = "auto") -> Estimate:
    gen, seed = as_generator(rng)
    est = prepare_integrate_r0(f, d, eps, gen, repetitions).run(gen, backend)
    est.seed = seed
    return est


# --- piecewise tensor Lagrange interpolation ----------------------------------

def lagrange_basis(r: int, u: np.ndarray) -> np.ndarray:
    """Values of the degree-r Lagrange basis on nodes k/r (k = 0..r) at local coordinates u."""
    nodes = np.linspace(0.0, 1.0, r + 1)
    u = np.asarray(u, dtype=float)[..., None]
    out = np.ones(u.shape[:-1] + (r + 1,))
    for k in range(r + 1):
        for l in range(r + 1):
            if l != k:
                out[..., k] *= (u[..., 0] - nodes[l]) / (nodes[k] - nodes[l])
    return out


@lru_cache(maxsize=None)
def newton_cotes_weights(r: int) -> np.ndarray:
    """Integrals over [0,1] of the degree-r Lagrange basis on equispaced nodes."""
    xs, ws = np.polynomial.legendre.leggauss(r + 2)
    u = (xs + 1) / 2
    return (lagrange_basis(r, u) * (ws / 2)[:, None]).sum(axis=0)


@lru_cache(maxsize=None)
def lebesgue_constant(r: int) -> float:
    u = np.linspace(0.0, 1.0, 20001)
    return float(np.abs(lagrange_basis(r, u)).sum(axis=1).max())


# Bound on |d/dx P g| for 1-D interpolation of a 1-Lipschitz g, per degree.
_DERIVATIVE_GAIN = {1: 1.0, 2: 2.0}


def interpolation_constant(d: int, r: int) -> float:
    """c with ``|f - P f| <= c n0**-r`` on the unit ball of C^r([0,1]^d).

    Per axis ``(1 + Lambda_r) (h/2)**r / r!`` (Taylor remainder of degree r-1
    plus the interpolant's Lebesgue constant), accumulated over axes with the
    already-interpolated ones amplified by ``Lambda_r``.
    """
    if r < 1:
        raise ValueError("interpolation needs r >= 1")
    lam = lebesgue_constant(r)
    per_axis = (1 + lam) / (2 ** r * math.factorial(r))
    return per_axis * sum(lam ** i for i in range(d))


class PiecewiseInterpolant:
    """Degree-r tensor Lagrange interpolant on n0**d subcubes sharing a node grid."""

    def __init__(self, f: Integrand, d: int, r: int, n0: int):
        self.d, self.r, self.n0 = d, r, n0
        axis = np.linspace(0.0, 1.0, r * n0 + 1)
        grid = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
        self.node_values = _evaluate(f, grid, bound=np.inf).reshape((r * n0 + 1,) * d)
        self.evaluations = grid.shape[0]

    def integral(self) -> float:
        w1 = np.zeros(self.r * self.n0 + 1)
        nc = newton_cotes_weights(self.r)
        for c in range(self.n0):
            w1[c * self.r: c * self.r + self.r + 1] += nc / self.n0
        out = self.node_values
        for _ in range(self.d):
            out = np.tensordot(out, w1, axes=([0], [0]))
        return float(out)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        cell = np.minimum(np.floor(x * self.n0).astype(np.int64), self.n0 - 1)
        local = x * self.n0 - cell
        basis = lagrange_basis(self.r, local)  # (n, d, r+1)
        out = np.zeros(x.shape[0])
        for ks in itertools.product(range(self.r + 1), repeat=self.d):
            idx = tuple(cell[:, a] * self.r + ks[a] for a in range(self.d))
            weight = np.prod([basis[:, a, ks[a]] for a in range(self.d)], axis=0)
            out += weight * self.node_values[idx]
        return out


def _quantum_cost(eta: float, repetitions: int) -> int:
    """Queries spent by the residual summation at normalized target ``eta``."""
    if eta >= 1.0:
        return 0
    _, t = truncation_split(min(eta, 0.49) / 4, repetitions)
    return repetitions * ((1 << t) - 1)


CELL_RULES = ("balanced", "min-cost", "half")


def choose_cells(desc: SmoothClassDescriptor, eps: float, rule: str = "balanced",
                 repetitions: int = REPETITIONS) -> int:
    """Cells per axis for the control variate.

    ``balanced``: ``n0 = ceil(eps**(-1/(r+d)))``, equating the ``n0**d`` node
    reads with the ``n0**-r / eps`` quantum queries of the residual sum (the
    rate-optimal choice).  ``min-cost``: minimize the actual total count at
    this eps.  ``half``: smallest n0 with residual bound <= eps/2.
    """
    c = desc.bound * interpolation_constant(desc.d, desc.r)
    if rule == "balanced":
        return max(1, math.ceil(eps ** (-1.0 / (desc.r + desc.d)) - 1e-12))
    if rule == "half":
        return max(1, math.ceil((2 * c / eps) ** (1.0 / desc.r) - 1e-12))
    if rule != "min-cost":
        raise ValueError(f"unknown cell rule {rule!r}; choose from {CELL_RULES}")
    best = None
    n_max = max(2, int(math.ceil((c / eps) ** (1.0 / desc.r))) + 1)
    for n0 in range(1, n_max + 1):
        delta = c * n0 ** -desc.r
        cost = (desc.r * n0 + 1) ** desc.d + _quantum_cost(eps / delta, repetitions)
        if best is None or cost < best[0]:
            best = (cost, n0)
    return best[1]


def residual_lipschitz(desc: SmoothClassDescriptor) -> float:
    """Per-axis Lipschitz bound of ``f - P f`` for f in the unit ball (r in {1, 2})."""
    if desc.r not in _DERIVATIVE_GAIN:
        raise ValueError("residual Lipschitz bound is calibrated for r in {1, 2} only")
    return desc.bound * (1 + _DERIVATIVE_GAIN[desc.r] * lebesgue_constant(desc.r) ** (desc.d - 1))


def prepare_integrate_rge1(f: Integrand, desc: SmoothClassDescriptor, eps: float, rng,
                           randomized: bool = True, repetitions: int = REPETITIONS,
                           n0: int | None = None, rule: str = "balanced") -> PreparedRun:
    if desc.r < 1:
        raise ValueError("use integrate_r0 for r = 0")
    if desc.r not in _DERIVATIVE_GAIN:
        raise ValueError("remainder constants are calibrated for r in {1, 2} only")
    if not 0 < eps < 0.5:
        raise ValueError("epsilon must lie in (0, 0.5)")
    gen, _ = as_generator(rng)
    d, r = desc.d, desc.r
    n0 = n0 or choose_cells(desc, eps, rule, repetitions)
    interp = PiecewiseInterpolant(f, d, r, n0)
    classical = interp.integral()
    delta = desc.bound * interpolation_constant(d, r) * n0 ** -r
    info = {"cells_per_axis": n0, "residual_bound": delta, "classical_part": classical,
            "classical_evaluations": interp.evaluations}
    eta = eps / delta
    if eta >= 1.0:
        # |integral of residual| <= delta <= eps already.
        return constant_run(classical, interp.evaluations, info)

    def residual(x: np.ndarray) -> np.ndarray:
        res = (np.asarray(f(x), dtype=float).reshape(-1) - interp(x)) / delta
        worst = float(np.max(np.abs(res))) if res.size else 0.0
        if worst > 1.0 + 1e-9:
            raise ResidualBoundError(f"residual reached {worst:.4f} x bound; interpolation constant too small")
        return np.clip(res, -1.0, 1.0)

    eta = min(eta, 0.49)
    if randomized:
        run = prepare_integrate_r0(residual, d, eta, gen, repetitions)
    else:
        run = _deterministic_residual_run(residual, desc, delta, eta, repetitions)
    run.offset = classical + delta * run.offset
    run.scale = delta * run.scale
    run.classical_queries += interp.evaluations
    run.info.update(info)
    return run


def _deterministic_residual_run(residual: Integrand, desc: SmoothClassDescriptor, delta: float,
                                eta: float, repetitions: int) -> PreparedRun:
    """Midpoint grid sum of the normalized residual with deterministic queries.

    The normalized residual is ``L/delta``-Lipschitz per axis, so the midpoint
    grid with G points per axis is off by at most ``d L / (4 G delta)``.  G
    (a power of two) keeps that at ``eta/2``; the table sum gets ``eta/4`` on
    the [0,1] scale, i.e. ``eta/2`` after the affine map.
    """
    lip = residual_lipschitz(desc)
    G = next_pow2(math.ceil(desc.d * lip / (2 * delta * eta)))
    axis = (np.arange(G) + 0.5) / G
    grid = np.stack(np.meshgrid(*([axis] * desc.d), indexing="ij"), axis=-1).reshape(-1, desc.d)
    vals = residual(grid)
    table = RealTable((vals + 1.0) / 2.0)
    run = prepare_table_summation(table, eta / 4, repetitions, offset=-1.0, scale=2.0)
    run.info.update({"grid_per_axis": G})
    return run


def integrate_rge1(f: Integrand, desc: SmoothClassDescriptor, eps: float, rng,
                   randomized: bool = True, repetitions: int = REPETITIONS,
                   backend: str = "auto", rule: str = "balanced") -> Estimate:
    gen, seed = as_generator(rng)
    est = prepare_integrate_rge1(f, desc, eps, gen, randomized, repetitions, rule=rule).run(gen, backend)
    est.seed = seed
    return est


def validate_residual_bound(f: Integrand, desc: SmoothClassDescriptor, n0: int, rng,
                            samples: int = 10_000) -> float:
    """Largest ``|f - P f| / delta`` over random points; must stay <= 1."""
    gen, _ = as_generator(rng)
    interp = PiecewiseInterpolant(f, desc.d, desc.r, n0)
    delta = desc.bound * interpolation_constant(desc.d, desc.r) * n0 ** -desc.r
    x = gen.random((samples, desc.d))
    return float(np.max(np.abs(np.asarray(f(x)).reshape(-1) - interp(x))) / delta)
