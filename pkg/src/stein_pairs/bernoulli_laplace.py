"""Exact spectral measure of the Bernoulli-Laplace urn chain and its
exponential approximation.

A uniformly-by-multiplicity random eigenvalue lambda_I gives W = n lambda_I + 1,
which converges to the mean-one exponential law; the pair statistics below feed
the exponential-limit bound evaluators and reproduce the 12 n^(-1/2) constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bounds import PairStatistics
from .numerics import DiscreteLaw, integrate, kolmogorov_distance, log_binomial
from .stein import TestFunction

__all__ = [
    "SpectralMeasure",
    "spectral_measure",
    "pair_statistics",
    "smooth_distance",
    "kolmogorov_to_exponential",
    "lipschitz_family",
]

# At and below this size the binomials fit comfortably as exact integers, so
# the weights are computed without any floating-point cancellation at all.
_EXACT_N = 512


@dataclass(frozen=True)
class SpectralMeasure:
    """Eigenvalues lambda_i with multiplicity weights pi_i and atoms
    mu_i = n lambda_i + 1 = (n - i)(n + 1 - i)/n, for i = 0..n."""

    n: int
    lam: np.ndarray
    pi: np.ndarray
    mu: np.ndarray

    def as_discrete_law(self) -> DiscreteLaw:
        # mu is decreasing in i; the discrete law wants ascending atoms
        return DiscreteLaw(self.mu[::-1], self.pi[::-1])

    def expectation(self, f) -> float:
        return float(np.dot(self.pi, f(self.mu)))

    def csv_rows(self):
        yield "n,i,lambda,pi,mu"
        for i in range(self.n + 1):
            yield (f"{self.n},{i},{self.lam[i]:.17g},"
                   f"{self.pi[i]:.17g},{self.mu[i]:.17g}")


def spectral_measure(n: int) -> SpectralMeasure:
    """Exact spectral measure of the 2n-ball urn chain.

    pi_i = (C(2n,i) - C(2n,i-1)) / C(2n,n): exact integer arithmetic for
    small n, otherwise log-space with the neighbor ratio
    C(2n,i-1)/C(2n,i) = i/(2n-i+1) to avoid cancellation of huge binomials.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    i = np.arange(n + 1, dtype=float)
    lam = 1.0 - i * (2 * n - i + 1) / n**2
    mu = (n - i) * (n + 1 - i) / n
    if n <= _EXACT_N:
        denom = math.comb(2 * n, n)
        pi = np.array([
            (math.comb(2 * n, k) - math.comb(2 * n, k - 1)) / denom if k > 0
            else 1 / denom
            for k in range(n + 1)
        ])
    else:
        log_ratio = np.array([log_binomial(2 * n, k) for k in range(n + 1)])
        log_ratio -= log_binomial(2 * n, n)
        pi = np.exp(log_ratio) * (1.0 - i / (2 * n - i + 1))
        # gammaln noise in the log differences leaves ~1e-12 mass error;
        # renormalize so the measure invariant holds at every n
        pi /= math.fsum(pi)
    return SpectralMeasure(n=n, lam=lam, pi=pi, mu=mu)


def pair_statistics(n: int, measure: Optional[SpectralMeasure] = None) -> PairStatistics:
    """Pair statistics of the reversible one-step coupling on the spectrum.

    The conditional moment identities give c0 = 2 n^2, a first LLN term that
    is exactly zero, and a remainder supported on {W = 0} so that
    E|W r(W)| = 0 exactly. E|Delta|^3 is stored as the 6 n^(-5/2) upper
    bound (the exact value would need the unpublished transition kernel), so
    downstream bounds are valid but conservative.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if measure is None:
        measure = spectral_measure(n)
    pi_n = float(measure.pi[n])  # P(W = 0)
    r_mass = (n + 1) / (2.0 * n**2)
    # exponential(1) limit law has c1 = 1; the weighted remainder puts
    # |W| + 3/c1 = 3 at the only atom where r is nonzero
    return PairStatistics(
        c0=2.0 * n**2,
        e_abs_one_minus_half_c0_d2=0.0,
        e_abs_delta_cubed=6.0 * n**-2.5,
        e_abs_r=r_mass * pi_n,
        e_weighted_r=3.0 * r_mass * pi_n,
        e_abs_Wr=0.0,
        delta_max=2.0,
        e_abs_c0g_W=1.0,
        flags=("e_abs_delta_cubed is an upper bound, not exact",),
    )


def smooth_distance(n: int, h: TestFunction,
                    measure: Optional[SpectralMeasure] = None) -> float:
    """Exact |E h(W) - E h(Y)| against the mean-one exponential law."""
    if measure is None:
        measure = spectral_measure(n)
    exact = measure.expectation(lambda w: np.asarray(h.h(w), dtype=float))
    hi = max(60.0, float(measure.mu[0]) + 1.0)
    limit = integrate(
        lambda t: np.asarray(h.h(t), dtype=float) * np.exp(-np.asarray(t, dtype=float)),
        0.0, hi, tol=1e-12,
    ).value
    return abs(exact - limit)


def kolmogorov_to_exponential(n: int,
                              measure: Optional[SpectralMeasure] = None) -> float:
    """Exact KS distance of the spectral law of W to exponential(1)."""
    if measure is None:
        measure = spectral_measure(n)

    def F(z):
        z = np.asarray(z, dtype=float)
        return np.where(z >= 0, -np.expm1(-np.maximum(z, 0.0)), 0.0)

    return kolmogorov_distance(measure.as_discrete_law(), F)


def _clip_min(a):
    def h(w):
        return np.minimum(np.asarray(w, dtype=float), a)

    def hp(w):
        return (np.asarray(w, dtype=float) < a).astype(float)

    return h, hp


def lipschitz_family() -> list[TestFunction]:
    """Ten Lipschitz test functions with certified ||h'||, used to exercise
    the smooth-function bound over a concrete class."""
    fns = []
    for a in (0.5, 1.0, 2.0):
        h, hp = _clip_min(a)
        fns.append(TestFunction(h=h, h_prime=hp, sup_norm=a, lip_norm=1.0,
                                kind="lipschitz", name=f"min(w,{a:g})"))
    fns.append(TestFunction(
        h=lambda w: np.exp(-np.asarray(w, dtype=float)),
        h_prime=lambda w: -np.exp(-np.asarray(w, dtype=float)),
        sup_norm=1.0, lip_norm=1.0, kind="lipschitz", name="exp(-w)"))
    fns.append(TestFunction(
        h=lambda w: 1.0 / (1.0 + np.exp(-np.asarray(w, dtype=float))),
        h_prime=lambda w: (lambda s: s * (1 - s))(1.0 / (1.0 + np.exp(-np.asarray(w, dtype=float)))),
        sup_norm=1.0, lip_norm=0.25, kind="lipschitz", name="sigmoid"))
    fns.append(TestFunction(
        h=lambda w: np.tanh(np.asarray(w, dtype=float)),
        h_prime=lambda w: 1.0 / np.cosh(np.asarray(w, dtype=float)) ** 2,
        sup_norm=1.0, lip_norm=1.0, kind="lipschitz", name="tanh"))
    fns.append(TestFunction(
        h=lambda w: np.sin(np.asarray(w, dtype=float)),
        h_prime=lambda w: np.cos(np.asarray(w, dtype=float)),
        sup_norm=1.0, lip_norm=1.0, kind="lipschitz", name="sin"))
    fns.append(TestFunction(
        h=lambda w: np.cos(np.asarray(w, dtype=float) / 2),
        h_prime=lambda w: -0.5 * np.sin(np.asarray(w, dtype=float) / 2),
        sup_norm=1.0, lip_norm=0.5, kind="lipschitz", name="cos(w/2)"))
    # gaussian bump centered at 1: max |h'| = sqrt(2) exp(-1/2)
    fns.append(TestFunction(
        h=lambda w: np.exp(-((np.asarray(w, dtype=float) - 1.0) ** 2)),
        h_prime=lambda w: -2 * (np.asarray(w, dtype=float) - 1.0)
        * np.exp(-((np.asarray(w, dtype=float) - 1.0) ** 2)),
        sup_norm=1.0, lip_norm=float(np.sqrt(2.0) * np.exp(-0.5)),
        kind="lipschitz", name="bump(w-1)"))
    fns.append(TestFunction(
        h=lambda w: np.asarray(w, dtype=float) / (1.0 + np.abs(np.asarray(w, dtype=float))),
        h_prime=lambda w: 1.0 / (1.0 + np.abs(np.asarray(w, dtype=float))) ** 2,
        sup_norm=1.0, lip_norm=1.0, kind="lipschitz", name="w/(1+|w|)"))
    return fns
