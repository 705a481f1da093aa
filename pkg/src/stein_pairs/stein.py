"""Stein equation solver and the solution-bound audit suite.

Solves f' + f p'/p = h - Eh(Y) by the integral representation, switching
between the forward and backward forms at the law's median so that neither
tail divides by a vanishing density. Derivatives of f are always recovered
algebraically from the equation itself, never by finite differences.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .limit_law import HypothesisReport, LimitLaw, certify_hypotheses, _zoomed_sup
from .numerics import CumulativeIntegral, Grid, integrate

__all__ = [
    "TestFunction",
    "SteinSolution",
    "BoundAudit",
    "solve",
    "solve_indicator",
    "stein_identity_residual",
    "audit_bounds",
    "audit_cdf_assumptions",
]


@dataclass(frozen=True)
class TestFunction:
    """Test function h with whichever norms apply to its class."""

    __test__ = False  # not a pytest collection target

    h: Callable[[np.ndarray], np.ndarray]
    h_prime: Optional[Callable[[np.ndarray], np.ndarray]] = None
    sup_norm: Optional[float] = None
    lip_norm: Optional[float] = None
    kind: str = "bounded"  # bounded | lipschitz | indicator
    z: Optional[float] = None
    name: str = "h"

    def __post_init__(self):
        if self.sup_norm is None and self.lip_norm is None:
            raise ValueError("at least one of sup_norm/lip_norm must be given")
        if self.kind == "indicator" and self.z is None:
            raise ValueError("indicator test function needs a threshold z")

    @classmethod
    def indicator(cls, z: float) -> "TestFunction":
        return cls(
            h=lambda w: (np.asarray(w, dtype=float) <= z).astype(float),
            sup_norm=1.0,
            kind="indicator",
            z=z,
            name=f"indicator(z={z:g})",
        )


class SteinSolution:
    """Solved f_h for one law and one test function."""

    def __init__(self, law: LimitLaw, h: TestFunction, eh_y: float,
                 f: Callable, forward_f: Callable, backward_f: Callable):
        self.law = law
        self.h = h
        self.eh_y = float(eh_y)
        self._f = f
        self._forward = forward_f
        self._backward = backward_f

    def f(self, w):
        return self._f(w)

    def f_forward(self, w):
        return self._forward(w)

    def f_backward(self, w):
        return self._backward(w)

    def f_prime(self, w):
        """From the Stein equation: f' = h - Eh(Y) - f * p'/p."""
        w = np.asarray(w, dtype=float)
        return (np.asarray(self.h.h(w), dtype=float) - self.eh_y
                - self._f(w) * self.law.score(w))

    def f_double_prime(self, w):
        """f'' = h' - f' g1 - f g1' with g1 = p'/p = -c0 g."""
        if self.h.h_prime is None:
            raise ValueError("f'' needs h'")
        w = np.asarray(w, dtype=float)
        g1 = self.law.score(w)
        g1p = -self.law.c0 * np.asarray(self.law.drift.g_prime(w), dtype=float)
        return (np.asarray(self.h.h_prime(w), dtype=float)
                - self.f_prime(w) * g1 - self._f(w) * g1p)

    def residual(self, w, dx: float = 1e-5):
        """Stein-equation residual with a finite-difference derivative of f.

        The algebraic f' satisfies the equation identically, so the check
        differentiates the integral-computed f independently.
        """
        w = np.asarray(w, dtype=float)
        step = dx * max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
        # keep the stencil inside the support; one-sided at the edges
        up = np.minimum(w + step, self.law.hi)
        dn = np.maximum(w - step, self.law.lo)
        fd = (self._f(up) - self._f(dn)) / (up - dn)
        return fd + self._f(w) * self.law.score(w) - (
            np.asarray(self.h.h(w), dtype=float) - self.eh_y)

    def export_csv(self, path, n: int = 501):
        law = self.law
        ws = np.linspace(law.lo, law.hi, n)
        fs = self._f(ws)
        fps = self.f_prime(ws)
        res = self.residual(ws)
        with open(path, "w", newline="") as fh:
            fh.write(f"# law={law.name} h={self.h.name} Eh={self.eh_y:.17g}\n")
            writer = csv.writer(fh)
            writer.writerow(["w", "f", "f_prime", "residual"])
            for row in zip(ws, fs, fps, res):
                writer.writerow([f"{v:.17g}" for v in row])


@dataclass
class BoundAudit:
    """Named inequality results: (label, lhs sup, rhs value, margin)."""

    inequalities: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)
    skipped: list = field(default_factory=list)

    def add(self, label: str, lhs: float, rhs: float):
        self.inequalities.append((label, float(lhs), float(rhs), float(rhs - lhs)))

    @property
    def passed(self) -> bool:
        return all(m >= -1e-8 for _, _, _, m in self.inequalities)

    def to_json(self, path=None) -> str:
        doc = {
            "pass": self.passed,
            "constants": self.constants,
            "inequalities": [
                {"label": lbl, "lhs": lhs, "rhs": rhs, "margin": m}
                for lbl, lhs, rhs, m in self.inequalities
            ],
            "skipped": self.skipped,
        }
        text = json.dumps(doc, indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def solve(law: LimitLaw, h: TestFunction) -> SteinSolution:
    """Solve the Stein equation for an integrable test function.

    f(w) = (1/p(w)) int_a^w (h - Eh) p below the median and the equivalent
    backward integral above it.
    """
    if h.kind == "indicator":
        return solve_indicator(law, h.z)

    eh = integrate(lambda t: np.asarray(h.h(t), dtype=float) * law.p(t),
                   law._lo_ext, law._hi_ext, tol=1e-12).value
    cum = CumulativeIntegral(
        lambda t: (np.asarray(h.h(t), dtype=float) - eh) * law.p(t), law._edges
    )
    median = law.median

    def forward_f(w):
        w = np.asarray(w, dtype=float)
        return cum.forward(w) / law.p(w)

    def backward_f(w):
        w = np.asarray(w, dtype=float)
        return -cum.backward(w) / law.p(w)

    def f(w):
        w_arr = np.atleast_1d(np.asarray(w, dtype=float))
        out = np.where(w_arr <= median, cum.forward(w_arr), -cum.backward(w_arr))
        out = out / law.p(w_arr)
        return float(out[0]) if np.ndim(w) == 0 else out

    return SteinSolution(law, h, eh, f, forward_f, backward_f)


def solve_indicator(law: LimitLaw, z: float) -> SteinSolution:
    """Kolmogorov Stein equation f' - c0 f g = 1{w <= z} - F(z).

    The integral representation collapses to CDF products:
    f(w) = (1 - F(z)) F(w) / p(w) for w <= z and F(z) (1 - F(w)) / p(w)
    above, with each tail factor taken from its own cumulative direction.
    """
    h = TestFunction.indicator(z)
    Fz = law.cdf(z)

    def f(w):
        w_arr = np.atleast_1d(np.asarray(w, dtype=float))
        below = (1.0 - Fz) * law.cdf(w_arr)
        above = Fz * law.sf(w_arr)
        out = np.where(w_arr <= z, below, above) / law.p(w_arr)
        return float(out[0]) if np.ndim(w) == 0 else out

    def forward_f(w):
        w_arr = np.asarray(w, dtype=float)
        return (np.minimum(law.cdf(w_arr), Fz) - Fz * law.cdf(w_arr)) / law.p(w_arr)

    def backward_f(w):
        w_arr = np.asarray(w, dtype=float)
        tail = np.maximum(Fz - law.cdf(w_arr), 0.0)
        return -(tail - Fz * law.sf(w_arr)) / law.p(w_arr)

    return SteinSolution(law, h, Fz, f, forward_f, backward_f)


def stein_identity_residual(law: LimitLaw, f: Callable, f_prime: Callable) -> float:
    """|E f'(Y) + E f(Y) p'(Y)/p(Y)| by quadrature; zero for members of D."""
    for endpoint in (law.lo, law.hi):
        if abs(float(f(endpoint)) * law.p(endpoint)) > 1e-9:
            warnings.warn(
                "f does not vanish against p at the support endpoints; "
                "it may be outside the Stein class D",
                stacklevel=2,
            )

    def integrand(t):
        t = np.asarray(t, dtype=float)
        return (np.asarray(f_prime(t), dtype=float)
                + np.asarray(f(t), dtype=float) * law.score(t)) * law.p(t)

    return abs(integrate(integrand, law.lo, law.hi, tol=1e-9).value)


def _grid_sup(fn, grid: Grid) -> float:
    # zoomed so the audited sups are stable under grid refinement
    return _zoomed_sup(lambda w: np.abs(np.asarray(fn(w), dtype=float)), grid)


def audit_bounds(
    law: LimitLaw,
    h: TestFunction,
    report: Optional[HypothesisReport] = None,
    grid: Optional[Grid] = None,
) -> BoundAudit:
    """Audit the six solution bounds with d1 = 1/c1, d2 = 1, d3 = d4 = c2.

    The bounded-h suite compares sups of f, f p'/p and f' against multiples
    of ||h||; the Lipschitz suite additionally bounds f'' and re-bounds f and
    f' against ||h'||. Inapplicable comparisons are skipped with a reason.
    """
    if report is None:
        report = certify_hypotheses(law)
    if grid is None:
        grid = law.default_grid(2001)
    sol = solve(law, h)
    d1 = 1.0 / law.c1
    d2 = 1.0
    audit = BoundAudit(constants={
        "d1": d1, "d2": d2, "d3": report.c2, "d4": report.c2,
        "c1": law.c1, "c2": report.c2, "c3": report.c3,
    })

    sup_f = _grid_sup(sol.f, grid)
    sup_f_score = _grid_sup(lambda w: sol.f(w) * law.score(w), grid)
    sup_fp = _grid_sup(sol.f_prime, grid)

    if h.sup_norm is not None:
        hn = h.sup_norm
        audit.add("sup|f| <= 2 d1 ||h||", sup_f, 2 * d1 * hn)
        audit.add("sup|f p'/p| <= 2 d2 ||h||", sup_f_score, 2 * d2 * hn)
        audit.add("sup|f'| <= (2 + 2 d2) ||h||", sup_fp, (2 + 2 * d2) * hn)
    else:
        audit.skipped.append("bounded-h suite: sup_norm not given")

    if h.lip_norm is not None and h.h_prime is not None:
        if np.isfinite(report.c2):
            ln = h.lip_norm
            d3 = d4 = report.c2
            sup_fpp = _grid_sup(sol.f_double_prime, grid)
            audit.add("sup|f''| <= (1 + d2)(1 + d3) ||h'||",
                      sup_fpp, (1 + d2) * (1 + d3) * ln)
            audit.add("sup|f| <= d4 ||h'||", sup_f, d4 * ln)
            audit.add("sup|f'| <= (1 + d3) d1 ||h'||", sup_fp, (1 + d3) * d1 * ln)
        else:
            audit.skipped.append("lipschitz suite: c2 not finite")
    elif h.kind != "indicator":
        audit.skipped.append("lipschitz suite: lip_norm or h' not given")
    return audit


def audit_cdf_assumptions(
    law: LimitLaw,
    grid: Optional[Grid] = None,
    report: Optional[HypothesisReport] = None,
) -> BoundAudit:
    """Pointwise check of the four CDF assumptions behind the bound suite.

    Margins are minimized over the grid; a pass means every assumption holds
    with the Lemma constants d1 = 1/c1, d2 = 1, d3 = d4 = c2.
    """
    if report is None:
        report = certify_hypotheses(law)
    if grid is None:
        grid = law.default_grid(2001)
    d1 = 1.0 / law.c1
    d2 = 1.0
    d3 = d4 = report.c2
    x = grid.points
    p = law.p(x)
    F = law.cdf(x)
    S = law.sf(x)
    min_FS = np.minimum(F, S)
    trunc = np.minimum(
        law.abs_moment_prefix(x) + law.mean_abs * F,
        law.abs_moment_suffix(x) + law.mean_abs * S,
    )
    score_prime = np.abs(-law.c0 * np.asarray(law.drift.g_prime(x), dtype=float))

    audit = BoundAudit(constants={"d1": d1, "d2": d2, "d3": d3, "d4": d4})
    audit.add("min(F, 1-F) <= d1 p", float(np.max(min_FS - d1 * p)), 0.0)
    audit.add("|p'| min(F, 1-F) <= d2 p^2",
              float(np.max(np.abs(law.score(x)) * min_FS - d2 * p)), 0.0)
    if np.isfinite(d3):
        audit.add("truncated-mean * |(p'/p)'| <= d3 p",
                  float(np.max(trunc * score_prime - d3 * p)), 0.0)
        audit.add("truncated-mean <= d4 p", float(np.max(trunc - d4 * p)), 0.0)
    else:
        audit.skipped.append("truncated-mean assumptions: c2 not finite")
    return audit
