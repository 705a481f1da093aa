"""Exchangeable-pair Stein machinery for non-normal limits.

The package builds limiting densities from drift functions, solves and audits
the associated Stein equation, evaluates Berry-Esseen style bound formulas,
and ships exact desk-scale oracles for the Curie-Weiss quartic limit and the
Bernoulli-Laplace exponential limit.
"""

from .numerics import (
    CumulativeIntegral,
    DiscreteLaw,
    Grid,
    QuadratureError,
    QuadratureResult,
    integrate,
    kolmogorov_distance,
    log_binomial,
    sup_on_grid,
    truncate_support,
)
from .limit_law import (
    DriftFunction,
    HypothesisError,
    HypothesisReport,
    LimitLaw,
    NotNormalizableError,
    build_limit_law,
    certify_hypotheses,
    default_c0,
    exponential_law,
    gaussian_drift,
    generalized_normal_law,
    law_from_spec,
    poly_drift,
    quartic_drift,
)
from .stein import (
    BoundAudit,
    SteinSolution,
    TestFunction,
    audit_bounds,
    audit_cdf_assumptions,
    solve,
    solve_indicator,
    stein_identity_residual,
)
from .bounds import (
    BoundValue,
    PairStatistics,
    theorem_1_1,
    theorem_1_1_best,
    theorem_1_2,
    theorem_3_1,
)
from .curie_weiss import (
    QUARTIC_C1,
    Lemma51Report,
    MagnetizationLaw,
    RateRow,
    RateStudy,
    SpinModel,
    brute_force_enumeration,
    conditional_drift,
    conditional_quadratic,
    exact_magnetization_law,
    glauber_sampler,
    kolmogorov_rate_study,
    pair_statistics,
    verify_lemma_5_1,
)
from .bernoulli_laplace import (
    SpectralMeasure,
    kolmogorov_to_exponential,
    lipschitz_family,
    smooth_distance,
    spectral_measure,
)
from .bernoulli_laplace import pair_statistics as bl_pair_statistics

__version__ = "1.0.0"
