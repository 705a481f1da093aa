"""Exact and Monte Carlo machinery for the critical Curie-Weiss magnetization.

The rescaled magnetization W = n^(-3/4) sum(sigma) has an exact (n+1)-atom
law obtained by collapsing the Gibbs measure onto the total spin S. All
inequality checks run on that exact law; the Glauber sampler exists for
validation and exploration, never as a substitute for exact expectations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .bounds import PairStatistics
from .limit_law import LimitLaw
from .numerics import DiscreteLaw, kolmogorov_distance

__all__ = [
    "SpinModel",
    "MagnetizationLaw",
    "exact_magnetization_law",
    "conditional_drift",
    "conditional_quadratic",
    "verify_lemma_5_1",
    "pair_statistics",
    "glauber_sampler",
    "kolmogorov_rate_study",
    "brute_force_enumeration",
]

# Normalizer of the quartic limit density exp(-w^4/12); closed form
# sqrt(2) / (3^(1/4) Gamma(1/4)).
QUARTIC_C1 = float(np.sqrt(2.0) / (3.0**0.25 * np.exp(gammaln(0.25))))


@dataclass(frozen=True)
class SpinModel:
    n: int
    T: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least 2 spins")
        if self.T <= 0:
            raise ValueError("temperature must be positive")


@dataclass(frozen=True)
class MagnetizationLaw:
    """Exact law of the total spin S, with derived W and m atoms."""

    model: SpinModel
    S: np.ndarray          # atoms -n, -n+2, ..., n
    probs: np.ndarray

    @property
    def W(self) -> np.ndarray:
        return self.model.n**-0.75 * self.S

    @property
    def m(self) -> np.ndarray:
        return self.S / self.model.n

    def as_discrete_law(self) -> DiscreteLaw:
        return DiscreteLaw(self.W, self.probs)

    def expectation(self, values: np.ndarray) -> float:
        return float(np.dot(self.probs, values))


def exact_magnetization_law(model: SpinModel) -> MagnetizationLaw:
    """Collapse the Gibbs measure onto S = sum(sigma).

    Since sum_{i<j} sigma_i sigma_j = (S^2 - n)/2, the weight of S = k is
    C(n, (n+k)/2) * exp((k^2 - n) / (2 T n)), normalized in log space.
    """
    n, T = model.n, model.T
    S = np.arange(-n, n + 1, 2, dtype=float)
    k_up = (n + S) / 2
    logw = (
        gammaln(n + 1) - gammaln(k_up + 1) - gammaln(n - k_up + 1)
        + (S**2 - n) / (2.0 * T * n)
    )
    probs = np.exp(logw - logsumexp(logw))
    return MagnetizationLaw(model, S, probs)


def _check_parity(model: SpinModel, S):
    S_arr = np.asarray(S)
    if np.any(np.abs(S_arr) > model.n) or np.any((S_arr + model.n) % 2 != 0):
        raise ValueError("S must lie in {-n, -n+2, ..., n}")


def conditional_drift(model: SpinModel, S) -> float | np.ndarray:
    """E(W - W' | S) for one Glauber step.

    Exact sufficient-statistic form: n^(-3/4) m - n^(-7/4) [n_plus tanh((m - 1/n)/T)
    + n_minus tanh((m + 1/n)/T)].
    """
    _check_parity(model, S)
    n, T = model.n, model.T
    S_arr = np.asarray(S, dtype=float)
    m = S_arr / n
    n_plus = (n + S_arr) / 2
    n_minus = (n - S_arr) / 2
    out = n**-0.75 * m - n**-1.75 * (
        n_plus * np.tanh((m - 1.0 / n) / T) + n_minus * np.tanh((m + 1.0 / n) / T)
    )
    return float(out) if np.ndim(S) == 0 else out


def conditional_quadratic(model: SpinModel, S) -> float | np.ndarray:
    """E((W - W')^2 | S) = 2 n^(-3/2) - 2 n^(-5/2) sum_i sigma_i tanh(m_i / T)."""
    _check_parity(model, S)
    n, T = model.n, model.T
    S_arr = np.asarray(S, dtype=float)
    m = S_arr / n
    n_plus = (n + S_arr) / 2
    n_minus = (n - S_arr) / 2
    out = 2 * n**-1.5 - 2 * n**-2.5 * (
        n_plus * np.tanh((m - 1.0 / n) / T) - n_minus * np.tanh((m + 1.0 / n) / T)
    )
    return float(out) if np.ndim(S) == 0 else out


def flip_probability(model: SpinModel, S) -> float | np.ndarray:
    """P(sigma' != sigma | S) for one Glauber step; |Delta| is either 0 or
    2 n^(-3/4), so this carries all the |Delta|^k information."""
    # E(Delta^2 | S) = (2 n^(-3/4))^2 * P(flip)
    return conditional_quadratic(model, S) / (4.0 * model.n**-1.5)


@dataclass(frozen=True)
class Lemma51Report:
    n: int
    drift_dev: float
    quad_dev: float
    e_abs_w3: float
    e_w6: float
    delta_max: float
    drift_bound: float
    quad_bound: float
    w3_bound: float = 15.0
    w6_bound: float = 224.4

    @property
    def passed(self) -> bool:
        return (
            self.drift_dev <= self.drift_bound
            and self.quad_dev <= self.quad_bound
            and self.e_abs_w3 <= self.w3_bound
            and self.e_w6 <= self.w6_bound
            and self.delta_max <= 2.0 * self.n**-0.75
        )


def verify_lemma_5_1(model: SpinModel, law: Optional[MagnetizationLaw] = None) -> Lemma51Report:
    """Exactly evaluate the drift/variance deviations and moment bounds.

    Both deviations are checked against 15 n^(-2), E|W|^3 against 15,
    E(W^6) against 224.4 and the increment against 2 n^(-3/4).
    """
    if law is None:
        law = exact_magnetization_law(model)
    n = model.n
    W = law.W
    g = n**-1.5 * W**3 / 3.0
    drift_dev = law.expectation(np.abs(conditional_drift(model, law.S) - g))
    quad_dev = law.expectation(np.abs(conditional_quadratic(model, law.S) - 2 * n**-1.5))
    return Lemma51Report(
        n=n,
        drift_dev=drift_dev,
        quad_dev=quad_dev,
        e_abs_w3=law.expectation(np.abs(W) ** 3),
        e_w6=law.expectation(W**6),
        delta_max=2.0 * n**-0.75,
        drift_bound=15.0 * n**-2.0,
        quad_bound=15.0 * n**-2.0,
    )


def pair_statistics(model: SpinModel, law: Optional[MagnetizationLaw] = None,
                    limit_c1: float = QUARTIC_C1) -> PairStatistics:
    """All pair statistics computed exactly by summation over the atom law.

    The remainder is r(W) = E(W - W'|W) - n^(-3/2) W^3 / 3 with no series
    truncation; E|Delta|^3 = 2 n^(-3/4) E(Delta^2) exactly because the
    increment takes only the values 0 and 2 n^(-3/4).
    """
    if law is None:
        law = exact_magnetization_law(model)
    n = model.n
    c0 = n**1.5
    W = law.W
    quad = conditional_quadratic(model, law.S)
    drift = conditional_drift(model, law.S)
    r = drift - n**-1.5 * W**3 / 3.0
    delta_max = 2.0 * n**-0.75
    return PairStatistics(
        c0=c0,
        e_abs_one_minus_half_c0_d2=law.expectation(np.abs(1.0 - 0.5 * c0 * quad)),
        e_abs_delta_cubed=delta_max * law.expectation(quad),
        e_abs_r=law.expectation(np.abs(r)),
        e_weighted_r=law.expectation((np.abs(W) + 3.0 / limit_c1) * np.abs(r)),
        e_abs_Wr=law.expectation(np.abs(W * r)),
        delta_max=delta_max,
        e_abs_c0g_W=law.expectation(np.abs(W) ** 3) / 3.0,
    )


def glauber_sampler(
    model: SpinModel,
    steps: int,
    seed: int,
    burn_in: int = 0,
    chains: int = 1,
    init: str = "stationary",
) -> tuple[np.ndarray, np.ndarray]:
    """Glauber chains on the total spin, returning pooled (W, W') pairs.

    The single-site heat bath collapses to a birth-death chain on S: a spin
    of the majority sign is picked with the majority's frequency and
    resampled from its conditional law. ``init="stationary"`` draws the
    starting states from the exact law (warm start, marginal exactly
    stationary); ``init="up"`` starts all spins at +1 and relies on burn-in.
    Pairs (W_t, W_{t+1}) are recorded for t >= burn_in in every chain.
    """
    if steps <= burn_in:
        raise ValueError("steps must exceed burn_in")
    n, T = model.n, model.T
    law = exact_magnetization_law(model)
    rng = np.random.default_rng(np.random.SeedSequence(seed))

    atoms = law.S
    m = atoms / n
    # transition probabilities of the collapsed chain, indexed by (S + n) / 2
    p_down = ((n + atoms) / (2 * n)) * (
        np.exp(-(atoms - 1) / (n * T)) / (2 * np.cosh((atoms - 1) / (n * T)))
    )
    p_up = ((n - atoms) / (2 * n)) * (
        np.exp((atoms + 1) / (n * T)) / (2 * np.cosh((atoms + 1) / (n * T)))
    )

    if init == "stationary":
        cdf = np.cumsum(law.probs)
        idx = np.searchsorted(cdf, rng.random(chains))
    elif init == "up":
        idx = np.full(chains, len(atoms) - 1)
    else:
        raise ValueError("init must be 'stationary' or 'up'")

    keep = steps - burn_in
    W_out = np.empty((chains, keep))
    Wp_out = np.empty((chains, keep))
    scale = n**-0.75
    for t in range(steps):
        u = rng.random(chains)
        down = u < p_down[idx]
        up = ~down & (u < p_down[idx] + p_up[idx])
        new_idx = idx - down.astype(int) + up.astype(int)
        if t >= burn_in:
            W_out[:, t - burn_in] = scale * atoms[idx]
            Wp_out[:, t - burn_in] = scale * atoms[new_idx]
        idx = new_idx
    return W_out.ravel(), Wp_out.ravel()


@dataclass(frozen=True)
class RateRow:
    n: int
    ks: float
    ks_sqrt_n: float


@dataclass(frozen=True)
class RateStudy:
    rows: tuple
    slope: Optional[float]

    def csv_rows(self):
        yield "n,ks,ks_sqrt_n"
        for row in self.rows:
            yield f"{row.n},{row.ks:.17g},{row.ks_sqrt_n:.17g}"


def kolmogorov_rate_study(ns: Sequence[int], law: LimitLaw) -> RateStudy:
    """Exact KS distance to the quartic limit for each n, with a log-log fit.

    The slope is the least-squares fit of log KS against log n; it is None
    when fewer than two sizes are given.
    """
    rows = []
    for n in sorted(ns):
        exact = exact_magnetization_law(SpinModel(n)).as_discrete_law()
        ks = kolmogorov_distance(exact, law.cdf)
        rows.append(RateRow(n=n, ks=ks, ks_sqrt_n=ks * np.sqrt(n)))
    slope = None
    if len(rows) >= 2:
        slope = float(np.polyfit(
            np.log([r.n for r in rows]), np.log([r.ks for r in rows]), 1
        )[0])
    return RateStudy(rows=tuple(rows), slope=slope)


def brute_force_enumeration(model: SpinModel):
    """Full 2^n oracle for small n: per-configuration Gibbs weights and
    conditional moments straight from the definitions.

    Returns (S per config, probs per config, drift per config, quad per
    config). Intended for n <= 12 cross-checks against the collapsed
    formulas.
    """
    n, T = model.n, model.T
    if n > 20:
        raise ValueError("enumeration oracle is for small n")
    configs = np.array(list(itertools.product([-1, 1], repeat=n)), dtype=float)
    S = configs.sum(axis=1)
    energy = (S**2 - n) / 2.0  # sum_{i<j} sigma_i sigma_j
    logw = energy / (T * n)
    probs = np.exp(logw - logsumexp(logw))

    m_i = (S[:, None] - configs) / n  # magnetization excluding each site
    cond_mean = np.tanh(m_i / T)
    drift = n**-0.75 * (configs - cond_mean).mean(axis=1)
    flip = np.exp(-m_i * configs / T) / (2 * np.cosh(m_i / T))
    quad = (4.0 * n**-1.5) * flip.mean(axis=1)
    return S, probs, drift, quad
