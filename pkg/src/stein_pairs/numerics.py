"""Shared numerical kernels: adaptive quadrature, log-space combinatorics,
grid sup-norms and the discrete-vs-continuous Kolmogorov distance.

All functions here are pure and operate on immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln

__all__ = [
    "Grid",
    "QuadratureResult",
    "QuadratureError",
    "DiscreteLaw",
    "CumulativeIntegral",
    "integrate",
    "log_binomial",
    "sup_on_grid",
    "kolmogorov_distance",
    "truncate_support",
]

# 15-point Gauss-Legendre panel rule; exact for polynomials up to degree 29,
# which is far beyond what the narrow adaptive panels require.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)

DEFAULT_TOL = 1e-10


class QuadratureError(RuntimeError):
    """Raised when adaptive refinement fails to meet the tolerance.

    Carries the best available estimate so callers can degrade gracefully.
    """

    def __init__(self, message: str, best_estimate: float, error_estimate: float):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int

    def __post_init__(self):
        if self.abs_error_estimate < 0:
            raise ValueError("abs_error_estimate must be nonnegative")
        if self.evaluations < 1:
            raise ValueError("evaluations must be at least 1")


@dataclass(frozen=True)
class Grid:
    """Strictly increasing abscissae covering a truncated support."""

    points: np.ndarray
    policy: str = "uniform-x"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        if pts.size < 2:
            raise ValueError("grid needs at least 2 points")
        if not np.all(np.diff(pts) > 0):
            raise ValueError("grid points must be strictly increasing")

    @classmethod
    def uniform(cls, lo: float, hi: float, n: int) -> "Grid":
        return cls(np.linspace(lo, hi, n), policy="uniform-x")

    def refine(self, factor: int = 4) -> "Grid":
        """Grid with `factor` times the point density on the same interval."""
        pts = self.points
        n = (pts.size - 1) * factor + 1
        if self.policy == "uniform-x":
            return Grid(np.linspace(pts[0], pts[-1], n), policy=self.policy)
        # generic: subdivide each cell evenly
        segs = [np.linspace(a, b, factor + 1)[:-1] for a, b in zip(pts[:-1], pts[1:])]
        return Grid(np.concatenate(segs + [pts[-1:]]), policy=self.policy)


@dataclass(frozen=True)
class DiscreteLaw:
    """Finitely supported law: sorted atoms with matching probabilities."""

    atoms: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)
        if atoms.size == 0:
            raise ValueError("empty support")
        if atoms.shape != probs.shape:
            raise ValueError("atoms and probs must have matching shapes")
        if not np.all(np.diff(atoms) > 0):
            raise ValueError("atoms must be strictly increasing")
        if np.any(probs < -1e-15):
            raise ValueError("negative probability")
        if abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError("probabilities must sum to 1")

    def cdf_at_atoms(self) -> np.ndarray:
        return np.cumsum(self.probs)

    def expectation(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.probs, f(self.atoms)))


def _panel(f, a: float, b: float) -> float:
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return half * float(np.dot(_GL_WEIGHTS, f(mid + half * _GL_NODES)))


def _as_vectorized(f):
    def fv(x):
        out = f(x)
        out = np.asarray(out, dtype=float)
        if out.shape != np.shape(x):
            out = np.array([float(f(xi)) for xi in np.atleast_1d(x)])
        return out

    return fv


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    tol: float = DEFAULT_TOL,
    max_depth: int = 50,
) -> QuadratureResult:
    """Adaptive bisection with a fixed 15-point Gauss-Legendre panel rule.

    The per-panel error is estimated by comparing a panel's value against the
    sum over its two halves; panels whose estimate exceeds their share of the
    budget are split.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if hi < lo:
        raise ValueError("hi must be >= lo")
    fv = _as_vectorized(f)
    if hi == lo:
        return QuadratureResult(0.0, 0.0, 1)

    total = 0.0
    err_total = 0.0
    evals = 0
    exhausted = False
    width = hi - lo
    # stack entries: (a, b, panel value, depth)
    stack = [(lo, hi, _panel(fv, lo, hi), 0)]
    evals += 15
    while stack:
        a, b, whole, depth = stack.pop()
        mid = 0.5 * (a + b)
        left = _panel(fv, a, mid)
        right = _panel(fv, mid, b)
        evals += 30
        err = abs(whole - (left + right))
        budget = tol * (b - a) / width
        if err <= budget or not np.isfinite(err):
            total += left + right
            err_total += err if np.isfinite(err) else tol
        elif depth >= max_depth:
            total += left + right
            err_total += err
            exhausted = True
        else:
            stack.append((a, mid, left, depth + 1))
            stack.append((mid, b, right, depth + 1))
    if exhausted and err_total > tol:
        raise QuadratureError(
            f"quadrature failed to converge on [{lo}, {hi}]: "
            f"error estimate {err_total:.3e} > tol {tol:.3e}",
            best_estimate=total,
            error_estimate=err_total,
        )
    return QuadratureResult(total, min(err_total, tol) if not exhausted else err_total, evals)


def log_binomial(n: int, k: int) -> float:
    """Natural log of C(n, k); -inf for k outside [0, n]."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if k < 0 or k > n:
        return -np.inf
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def sup_on_grid(f, grid: Grid) -> tuple[float, float]:
    """Exact maximum of f over the finite grid, with its argmax.

    The result is a lower bound on the true sup; callers certify by checking
    stability under grid refinement.
    """
    vals = _as_vectorized(f)(grid.points)
    if not np.all(np.isfinite(vals)):
        bad = grid.points[~np.isfinite(vals)][0]
        raise ValueError(f"f not finite on grid (at x={bad})")
    i = int(np.argmax(vals))
    return float(vals[i]), float(grid.points[i])


def kolmogorov_distance(discrete: DiscreteLaw, F: Callable[[np.ndarray], np.ndarray]) -> float:
    """sup_z |F_W(z) - F(z)| of a discrete law against a continuous CDF.

    Against a continuous F the sup is attained at the atoms, comparing F there
    with both the left and right limits of the discrete CDF; no grid is needed.
    """
    cum = discrete.cdf_at_atoms()
    Fv = _as_vectorized(F)(discrete.atoms)
    # left limits of F, so staircase targets with matching jumps compare as 0
    Fv_left = _as_vectorized(F)(np.nextafter(discrete.atoms, -np.inf))
    gap_at = np.max(np.abs(cum - Fv))
    gap_before = np.max(np.abs((cum - discrete.probs) - Fv_left))
    return float(max(gap_at, gap_before, 0.0))


def truncate_support(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    rel_floor: float = 1e-16,
    max_span: float = 1e9,
) -> tuple[float, float]:
    """Truncation points for an infinite support by doubling search.

    Expands each infinite endpoint until f falls below rel_floor times the
    peak value seen so far. Raises if no decay is found within max_span.
    """
    a = lo if np.isfinite(lo) else -1.0
    b = hi if np.isfinite(hi) else 1.0
    if np.isfinite(lo):
        a = lo
    if np.isfinite(hi):
        b = hi
    if a >= b:
        a, b = min(a, b - 1.0), max(b, a + 1.0)
    peak = float(np.max(_as_vectorized(f)(np.linspace(a, b, 129))))
    if peak <= 0:
        raise ValueError("integrand has no positive peak on the initial window")
    floor = rel_floor * peak

    def expand(side: float, fixed_sign: int) -> float:
        x = side
        step = max(1.0, abs(side))
        while float(f(x)) > floor:
            step *= 2.0
            x = side + fixed_sign * step
            if abs(x) > max_span:
                raise ValueError("no tail decay found: density not normalizable")
        return x

    if not np.isfinite(lo):
        a = expand(a, -1)
    if not np.isfinite(hi):
        b = expand(b, +1)
    return a, b


class CumulativeIntegral:
    """Prefix and suffix integrals of f over a fixed panelization.

    Panel integrals use the 15-point Gauss-Legendre rule; arbitrary endpoints
    are handled by a partial panel. The suffix form avoids the catastrophic
    cancellation of computing tail integrals as total-minus-prefix.
    """

    def __init__(self, f, edges: np.ndarray):
        self.f = _as_vectorized(f)
        self.edges = np.asarray(edges, dtype=float)
        a = self.edges[:-1]
        b = self.edges[1:]
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        vals = self.f(nodes.ravel()).reshape(nodes.shape)
        self.panels = half * (vals @ _GL_WEIGHTS)
        self.prefix = np.concatenate([[0.0], np.cumsum(self.panels)])
        self.suffix = np.concatenate([np.cumsum(self.panels[::-1])[::-1], [0.0]])

    @property
    def total(self) -> float:
        return float(self.prefix[-1])

    def _partial(self, a: np.ndarray, t: np.ndarray) -> np.ndarray:
        mid = 0.5 * (a + t)
        half = 0.5 * (t - a)
        nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        vals = self.f(nodes.ravel()).reshape(nodes.shape)
        return half * (vals @ _GL_WEIGHTS)

    def forward(self, t):
        """Integral of f from the first edge up to t (clamped to the range)."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        tc = np.clip(t_arr, self.edges[0], self.edges[-1])
        idx = np.searchsorted(self.edges, tc, side="right") - 1
        idx = np.clip(idx, 0, self.edges.size - 2)
        out = self.prefix[idx] + self._partial(self.edges[idx], tc)
        return float(out[0]) if np.isscalar(t) or np.ndim(t) == 0 else out

    def backward(self, t):
        """Integral of f from t up to the last edge (clamped to the range)."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        tc = np.clip(t_arr, self.edges[0], self.edges[-1])
        idx = np.searchsorted(self.edges, tc, side="right") - 1
        idx = np.clip(idx, 0, self.edges.size - 2)
        out = self.suffix[idx + 1] + self._partial(tc, self.edges[idx + 1])
        return float(out[0]) if np.isscalar(t) or np.ndim(t) == 0 else out
