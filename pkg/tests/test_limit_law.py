import math

import numpy as np
import pytest

from stein_pairs.limit_law import (
    DriftFunction,
    HypothesisError,
    NotNormalizableError,
    build_limit_law,
    certify_hypotheses,
    default_c0,
    exponential_law,
    gaussian_drift,
    generalized_normal_law,
    law_from_spec,
    quartic_drift,
)
from stein_pairs.numerics import integrate

GAUSSIAN_C1 = 0.3989422804014327        # 1 / sqrt(2 pi)
QUARTIC_C1 = 0.2963832180033231         # sqrt(2) / (3^(1/4) Gamma(1/4))


class TestBuildLimitLaw:
    def test_gaussian_normalizer(self, gaussian_law):
        assert gaussian_law.c1 == pytest.approx(GAUSSIAN_C1, abs=1e-7)
        assert gaussian_law.c1 == pytest.approx(0.3989423, abs=5e-8)

    def test_quartic_normalizer(self, quartic_law):
        assert quartic_law.c1 == pytest.approx(QUARTIC_C1, rel=1e-12)
        assert quartic_law.c1 == pytest.approx(0.29638, abs=5e-6)
        # closed form sqrt(2) / (3^(1/4) Gamma(1/4))
        closed = math.sqrt(2.0) / (3**0.25 * math.gamma(0.25))
        assert quartic_law.c1 == pytest.approx(closed, rel=1e-12)

    def test_quartic_scaled_drift_matches_unit_form(self):
        # g(w) = w^3/(3 n^(3/2)) with c0 = n^(3/2) collapses to exp(-w^4/12)
        law = build_limit_law(quartic_drift(7), c0=7**1.5)
        assert law.c1 == pytest.approx(QUARTIC_C1, rel=1e-10)

    def test_zero_drift_not_normalizable(self):
        with pytest.raises(NotNormalizableError):
            law_from_spec("poly:0")

    def test_h1_violation_raises(self):
        falling = DriftFunction(
            g=lambda t: -np.asarray(t, dtype=float),
            g_prime=lambda t: -np.ones_like(np.asarray(t, dtype=float)),
            name="falling",
        )
        with pytest.raises((HypothesisError, NotNormalizableError)):
            build_limit_law(falling, c0=1.0)

    def test_density_normalized(self, gaussian_law, quartic_law, exp_law):
        for law in (gaussian_law, quartic_law, exp_law):
            mass = integrate(law.p, law.lo, law.hi, tol=1e-10).value
            assert mass == pytest.approx(1.0, abs=1e-8)

    def test_cdf_endpoints(self, gaussian_law, quartic_law, exp_law):
        for law in (gaussian_law, quartic_law, exp_law):
            assert law.cdf(law.lo) == pytest.approx(0.0, abs=1e-10)
            assert law.cdf(law.hi) == pytest.approx(1.0, abs=1e-10)
            assert law.sf(law.lo) == pytest.approx(1.0, abs=1e-10)

    def test_score_identity_by_finite_difference(self, quartic_law):
        ts = np.linspace(quartic_law.lo * 0.8, quartic_law.hi * 0.8, 41)
        dx = 1e-6
        fd = (np.log(quartic_law.p(ts + dx)) - np.log(quartic_law.p(ts - dx))) / (2 * dx)
        drift_term = quartic_law.c0 * np.asarray(quartic_law.drift.g(ts))
        assert np.max(np.abs(fd + drift_term)) <= 1e-6

    def test_gaussian_moments(self, gaussian_law):
        assert gaussian_law.moment(1) == pytest.approx(0.0, abs=1e-10)
        assert gaussian_law.moment(2) == pytest.approx(1.0, abs=1e-8)
        assert gaussian_law.moment(4) == pytest.approx(3.0, abs=1e-7)

    def test_moment_cap(self, gaussian_law):
        with pytest.raises(ValueError):
            gaussian_law.moment(9)


class TestGeneralizedNormal:
    def test_alpha2_beta2_is_standard_normal(self, gaussian_law):
        law = law_from_spec("gennorm:2:2")
        assert law.c1 == pytest.approx(GAUSSIAN_C1, abs=1e-8)
        ts = np.linspace(-6, 6, 101)
        assert np.max(np.abs(law.p(ts) - gaussian_law.p(ts))) <= 1e-8

    def test_alpha4_beta12_is_quartic_limit(self, gennorm_412_law, quartic_law):
        ts = np.linspace(-3.5, 3.5, 201)
        diff = np.abs(gennorm_412_law.p(ts) - quartic_law.p(ts))
        assert np.max(diff) <= 1e-8

    def test_laplace_normalizer(self):
        law = generalized_normal_law(1.0, 1.0)
        assert law.c1 == pytest.approx(0.5, abs=1e-10)
        assert law.p(0.0) == pytest.approx(0.5, abs=1e-10)

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            generalized_normal_law(-1.0, 2.0)
        with pytest.raises(ValueError):
            generalized_normal_law(2.0, 0.0)


class TestExponentialLaw:
    def test_rate_one_mean_and_median(self, exp_law):
        assert exp_law.moment(1) == pytest.approx(1.0, abs=1e-8)
        assert exp_law.cdf(math.log(2.0)) == pytest.approx(0.5, abs=1e-9)

    def test_rate_two_mean(self):
        law = exponential_law(2.0)
        assert law.moment(1) == pytest.approx(0.5, abs=1e-8)

    def test_tail_probability(self, exp_law):
        assert exp_law.sf(3.0) == pytest.approx(math.exp(-3.0), abs=1e-9)
        assert math.exp(-3.0) == pytest.approx(0.049787, abs=5e-7)

    def test_score_is_constant(self, exp_law):
        ts = np.linspace(0.5, 10.0, 25)
        assert np.max(np.abs(exp_law.score(ts) + 1.0)) <= 1e-12

    def test_invalid_rate(self):
        with pytest.raises(ValueError):
            exponential_law(0.0)


class TestCertifyHypotheses:
    def test_quartic_h2_value_at_zero(self, quartic_law):
        from stein_pairs.limit_law import _h2_expression
        expr = _h2_expression(quartic_law, bare=False)
        expected = 3.0 / quartic_law.c1**2
        assert float(expr(np.array([0.0]))[0]) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(34.16, abs=5e-2)

    def test_quartic_h2_tail_limit(self, quartic_law):
        from stein_pairs.limit_law import _h2_expression
        expr = _h2_expression(quartic_law, bare=False)
        # min(1/c1, 3/x^3) (x + 3/c1) x^2 -> 3 as x -> inf
        xs = np.array([1e3, 1e4, 1e5])
        assert float(expr(xs)[-1]) == pytest.approx(3.0, rel=1e-3)
        assert quartic_law.drift.h2_tail_limit == 3.0

    def test_gaussian_h2_value_at_zero(self, gaussian_law):
        from stein_pairs.limit_law import _h2_expression
        expr = _h2_expression(gaussian_law, bare=False)
        expected = 3.0 / gaussian_law.c1**2
        assert float(expr(np.array([0.0]))[0]) == pytest.approx(expected, rel=1e-10)
        assert expected == pytest.approx(18.85, abs=5e-3)

    def test_gaussian_constants(self, gaussian_report, gaussian_law):
        # sup attained where min(1/c1, 1/x) switches: 1 + 3/c1^2
        expected = 1.0 + 3.0 / gaussian_law.c1**2
        assert gaussian_report.c2 == pytest.approx(expected, rel=1e-8)
        assert gaussian_report.c3 == pytest.approx(expected, rel=1e-8)
        assert gaussian_report.h1_holds

    def test_quartic_constants_frozen(self, quartic_report):
        assert quartic_report.c2 == pytest.approx(37.39626148373013, rel=1e-8)
        assert quartic_report.c3 == pytest.approx(34.5789204371897, rel=1e-8)
        assert quartic_report.h1_holds

    def test_c3_below_c2(self, gaussian_report, quartic_report):
        for rep in (gaussian_report, quartic_report):
            assert rep.c3 <= rep.c2 + 1e-12

    def test_h3_pointwise_below_h2(self, quartic_law):
        from stein_pairs.limit_law import _h2_expression
        h2 = _h2_expression(quartic_law, bare=False)
        h3 = _h2_expression(quartic_law, bare=True)
        xs = np.linspace(quartic_law.lo, quartic_law.hi, 501)
        assert np.all(h3(xs) <= h2(xs) + 1e-14)

    def test_exponential_h2_diverges_h3_zero(self, exp_law):
        rep = certify_hypotheses(exp_law)
        assert rep.c2 == math.inf
        assert rep.c3 == 0.0


class TestDefaultC0:
    def test_basic(self):
        assert default_c0(2.0) == 1.0

    def test_urn_scaling(self):
        n = 37
        assert default_c0(1.0 / n**2) == pytest.approx(2.0 * n**2, rel=1e-14)

    def test_spin_scaling(self):
        n = 37
        assert default_c0(2.0 * n**-1.5) == pytest.approx(n**1.5, rel=1e-14)

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            default_c0(0.0)


class TestLawSpecAndExport:
    def test_presets_parse(self):
        for spec in ("gaussian", "quartic:4", "gennorm:2:2",
                     "exponential:1.5", "poly:2"):
            law = law_from_spec(spec)
            assert law.c1 > 0

    def test_unknown_spec_rejected(self):
        with pytest.raises(ValueError):
            law_from_spec("nosuch")
        with pytest.raises(ValueError):
            law_from_spec("gennorm:2")

    def test_export_csv(self, tmp_path, gaussian_law):
        path = tmp_path / "law.csv"
        gaussian_law.export_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# law=")
        assert lines[1] == "t,p,F"
        mid = lines[2 + (len(lines) - 2) // 2]
        t, p, F = (float(v) for v in mid.split(","))
        assert F == pytest.approx(gaussian_law.cdf(t), abs=1e-12)


class TestCdfSandwich:
    def test_tail_cdf_below_scaled_density(self, gaussian_law, quartic_law):
        # F(t) <= p(t)/c1 for t <= 0 and 1 - F(t) <= p(t)/c1 for t >= 0
        for law in (gaussian_law, quartic_law):
            neg = np.linspace(law.lo, 0.0, 201)
            pos = np.linspace(0.0, law.hi, 201)
            assert np.all(law.cdf(neg) <= law.p(neg) / law.c1 + 1e-9)
            assert np.all(law.sf(pos) <= law.p(pos) / law.c1 + 1e-9)

    def test_negative_tail_against_score(self, gaussian_law):
        # F(t) <= p(t)/|c0 g(t)| for t < 0
        ts = np.linspace(gaussian_law.lo, -0.1, 201)
        bound = gaussian_law.p(ts) / np.abs(
            gaussian_law.c0 * np.asarray(gaussian_law.drift.g(ts)))
        assert np.all(gaussian_law.cdf(ts) <= bound + 1e-9)
