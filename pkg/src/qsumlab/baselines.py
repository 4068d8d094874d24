"""Classical comparators and closed-form complexity quantities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .estimate import as_generator


@dataclass(frozen=True)
class ClassicalAlgorithm:
    """Non-adaptive classical algorithm: fixed points (worst case) or a point sampler (randomized)."""

    kind: str  # "worst-case" | "randomized"
    n: int
    points: np.ndarray | None = None
    sampler: Callable[[np.random.Generator, int], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind not in ("worst-case", "randomized"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "worst-case" and self.points is None:
            raise ValueError("worst-case algorithms need a fixed point set")
        if self.kind == "randomized" and self.sampler is None:
            raise ValueError("randomized algorithms need a sampler")


def monte_carlo(f: Callable[[np.ndarray], np.ndarray], n: int, d: int, rng) -> float:
    """(1/n) sum f(t_j) at iid uniform points of [0,1]^d; f takes an (n, d) array."""
    if n < 1:
        raise ValueError("n must be >= 1")
    gen, _ = as_generator(rng)
    pts = gen.random((n, d))
    return float(np.mean(np.asarray(f(pts), dtype=float)))


def midpoints(n: int) -> np.ndarray:
    return (2 * np.arange(1, n + 1) - 1) / (2 * n)


def lipschitz_quadrature(f: Callable[[np.ndarray], np.ndarray], n: int) -> float:
    """Composite midpoint rule; worst-case error 1/(4n) for Lipschitz-1 f on [0,1]."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return float(np.mean(np.asarray(f(midpoints(n)), dtype=float)))


def lipschitz_points_for(eps: float) -> int:
    """n = ceil(1/(4 eps)), at least 2."""
    return max(2, math.ceil(1 / (4 * eps) - 1e-12))


def rescale_lipschitz(f: Callable[[np.ndarray], np.ndarray]) -> tuple[Callable[[np.ndarray], np.ndarray], float]:
    """(g, f(0)) with ``g = f - f(0)``, so ``|g(x)| <= x`` and ``S(f) = S(g) + f(0)``."""
    f0 = float(np.asarray(f(np.array([0.0])), dtype=float)[0])

    def g(x: np.ndarray) -> np.ndarray:
        return np.asarray(f(x), dtype=float) - f0

    return g, f0


# --- piecewise-linear test functions with exact integrals ---------------------

@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear function on [0,1] given by knots and values."""

    knots: np.ndarray
    values: np.ndarray

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.interp(np.asarray(x, dtype=float), self.knots, self.values)

    def integral(self) -> float:
        return float(np.sum(np.diff(self.knots) * (self.values[1:] + self.values[:-1]) / 2))

    def exact_integral(self) -> Fraction:
        k = [Fraction(float(x)) for x in self.knots]
        v = [Fraction(float(y)) for y in self.values]
        return sum(((k[i + 1] - k[i]) * (v[i + 1] + v[i]) / 2 for i in range(len(k) - 1)), Fraction(0))

    def lipschitz(self) -> float:
        return float(np.max(np.abs(np.diff(self.values) / np.diff(self.knots))))


def random_lipschitz_function(rng, grid: int = 64, offset_range: float = 1.0) -> PiecewiseLinear:
    """Breakpoints on the 1/grid lattice, slopes uniform in [-1, 1], random start value."""
    gen, _ = as_generator(rng)
    slopes = gen.uniform(-1.0, 1.0, size=grid)
    start = gen.uniform(-offset_range, offset_range)
    knots = np.arange(grid + 1) / grid
    values = start + np.concatenate([[0.0], np.cumsum(slopes / grid)])
    return PiecewiseLinear(knots, values)


def midpoint_error_bound(n: int) -> float:
    return 1.0 / (4 * n)


# --- adversarial pair ---------------------------------------------------------

_RHO_FLOOR = 1e-12


@dataclass(frozen=True)
class TentBump:
    """``sign * min(1, min_j ||x - t_j||_inf / rho)``: zero at every point, +-1 far away.

    Each point removes at most ``(2 rho)**d`` of mass.  In one dimension the
    function is piecewise linear and integrated exactly; in higher
    dimensions the certified bound ``1 - n (2 rho)**d`` is used.
    """

    points: np.ndarray
    rho: float
    sign: float = 1.0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.points.shape[1] and self.points.size:
            x = x.reshape(-1, self.points.shape[1])
        if self.points.size == 0:
            return self.sign * np.ones(x.shape[0])
        dist = np.min(np.max(np.abs(x[:, None, :] - self.points[None, :, :]), axis=2), axis=1)
        return self.sign * np.minimum(1.0, dist / self.rho)

    def integral_bound(self) -> float:
        """Certified ``|integral|`` lower bound."""
        n, d = self.points.shape if self.points.size else (0, 1)
        if d == 1 and n:
            return float(abs(self.as_piecewise_linear().exact_integral()))
        return float(max(Fraction(0), 1 - n * (2 * Fraction(self.rho)) ** d))

    def as_piecewise_linear(self) -> PiecewiseLinear:
        pts = np.sort(self.points[:, 0])
        cand = np.concatenate([[0.0, 1.0], pts, pts - self.rho, pts + self.rho])
        # midpoints between neighbours are where two tents meet
        cand = np.concatenate([cand, (pts[1:] + pts[:-1]) / 2])
        knots = np.unique(np.clip(cand, 0.0, 1.0))
        return PiecewiseLinear(knots, self(knots[:, None]))


def adversarial_pair(points, gamma: float) -> tuple[TentBump, TentBump]:
    """Two functions vanishing on ``points`` with ``|f| <= 1`` and integrals >= 1-gamma, <= -(1-gamma).

    ``rho`` is set so that the excised mass ``n (2 rho)**d`` equals gamma.
    """
    if not 0 < gamma < 1:
        raise ValueError("gap must lie in (0, 1)")
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        pts = np.zeros((0, 1))
    elif pts.ndim == 1:
        pts = pts[:, None]
    n, d = pts.shape
    rho = 0.5 * (gamma / n) ** (1.0 / d) if n else 1.0
    # round down until the excised mass is provably <= gamma
    while n and n * (2 * Fraction(rho)) ** d > Fraction(gamma):
        rho = float(np.nextafter(rho, 0.0))
    if rho < _RHO_FLOOR:
        raise ValueError(f"gap {gamma} too small for {n} points (tent radius {rho:.2e})")
    return TentBump(pts, rho, 1.0), TentBump(pts, rho, -1.0)


def certify_adversarial_error(points, gamma: float = 0.2) -> float:
    """Lower bound on the worst-case error of any algorithm using exactly ``points``.

    Both functions share all information (zeros), so some output misses one
    integral by at least ``(I1 - I2)/2``.
    """
    f1, f2 = adversarial_pair(points, gamma)
    if f1.points.size:
        at = f1(f1.points)
        if np.any(at != 0) or np.any(f2(f2.points) != 0):
            raise AssertionError("tent functions do not vanish at the sample points")
    return (f1.integral_bound() + f2.integral_bound()) / 2


# --- closed-form complexity quantities ----------------------------------------

def info_complexity_boolean(eps: float, n: int) -> int:
    """ceil(N (1 - 2 eps)): worst-case information complexity of Boolean summation."""
    if not 0 <= eps <= 0.5:
        raise ValueError("epsilon must lie in [0, 0.5]")
    return max(0, math.ceil(n * (1 - 2 * eps) - 1e-9))


def entropy_cells(eps: float, halfwidth: float) -> int:
    if eps <= 0 or halfwidth <= 0:
        raise ValueError("epsilon and half-width must be positive")
    return max(1, math.ceil(halfwidth / eps - 1e-12))


def entropy_interval(eps: float, halfwidth: float) -> float:
    """log2 ceil(h / eps): entropy of an interval of half-width h at scale eps."""
    return math.log2(entropy_cells(eps, halfwidth))


def randomized_info_error_bound(n: int, N: int | None = None) -> float:
    """Lower bound on the randomized error of any n-sample method for Boolean means.

    Two-point argument: tables with means ``1/2 +- h`` are hard to tell apart
    from n samples (Bretagnolle-Huber: total variation <= 1 - exp(-n KL)/2),
    so one of them is missed by >= h with probability >= exp(-n KL)/4 and
    its L2 error is >= ``h exp(-n KL(h) / 2) / 2``.  For a finite table the
    bound is scaled down by the unseen fraction ``(N - n)/N`` (conservative).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    hs = np.linspace(1e-4, 0.499, 4000)
    kl = 2 * hs * np.log((1 + 2 * hs) / (1 - 2 * hs))  # KL(Ber(1/2+h) || Ber(1/2-h))
    bound = hs * np.exp(-n * kl / 2) / 2
    if N is not None:
        bound = bound * max(0.0, (N - n) / N)
    return float(bound.max())


def randomized_info_complexity(eps: float, N: int | None = None) -> int:
    """Smallest n whose two-point lower bound drops to eps or below."""
    if not 0 < eps < 0.5:
        raise ValueError("epsilon must lie in (0, 0.5)")
    lo, hi = 0, 1
    while randomized_info_error_bound(hi, N) > eps:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if randomized_info_error_bound(mid, N) > eps:
            lo = mid + 1
        else:
            hi = mid
    return lo
