import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special, stats

from hybridcell.errors import DomainError, TruncationError
from hybridcell.gamma import (
    GammaParams,
    LogNormalParams,
    composite_fading_params,
    expected_log_gamma,
    expected_log_sum,
    expected_log_sum_printed,
    moment_match,
    moschopoulos_mixture,
    sum_moment_match,
)

positive = st.floats(1e-3, 1e3)


class TestGammaParams:
    def test_moments(self):
        g = GammaParams(2.5, 3.0)
        assert g.mean() == 7.5
        assert g.variance() == 22.5

    @pytest.mark.parametrize("shape,scale", [(0, 1), (-1, 1), (1, 0), (math.inf, 1), (1, math.nan)])
    def test_rejects_invalid(self, shape, scale):
        with pytest.raises(DomainError):
            GammaParams(shape, scale)


class TestLogNormal:
    def test_db_conversion(self):
        ln = LogNormalParams.from_db(8.686)
        assert ln.sigma == pytest.approx(1.0)
        assert ln.sigma_db == pytest.approx(8.686)

    def test_mean(self):
        ln = LogNormalParams(0.7)
        assert ln.mean() == pytest.approx(math.exp(0.245))

    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            LogNormalParams(-0.1)


class TestMomentMatch:
    def test_examples(self):
        assert moment_match(2.0, 2.0) == GammaParams(2.0, 1.0)
        assert moment_match(1.0, 1.0) == GammaParams(1.0, 1.0)
        g = moment_match(3.5, 0.7)
        assert g.shape == pytest.approx(17.5, rel=1e-14)
        assert g.scale == pytest.approx(0.2, rel=1e-14)

    def test_sampled_moments(self, rng):
        x = GammaParams(17.5, 0.2).sample(rng, 1_000_000)
        assert x.mean() == pytest.approx(3.5, rel=0.01)
        assert x.var() == pytest.approx(0.7, rel=0.01)

    @given(positive, positive)
    def test_round_trip(self, mean, var):
        g = moment_match(mean, var)
        assert g.mean() == pytest.approx(mean, rel=1e-12)
        assert g.variance() == pytest.approx(var, rel=1e-12)

    @given(positive, positive, st.floats(1e-3, 1e3))
    def test_scale_equivariance(self, mean, var, alpha):
        g, h = moment_match(mean, var), moment_match(alpha * mean, alpha**2 * var)
        assert h.shape == pytest.approx(g.shape, rel=1e-12)
        assert h.scale == pytest.approx(alpha * g.scale, rel=1e-12)

    @pytest.mark.parametrize("mean,var", [(0, 1), (1, 0), (-1, 1), (math.inf, 1), (1, math.nan)])
    def test_domain(self, mean, var):
        with pytest.raises(DomainError):
            moment_match(mean, var)


class TestSumMomentMatch:
    def test_equal_scales_exact(self):
        assert sum_moment_match([GammaParams(1, 2), GammaParams(3, 2)]) == GammaParams(4.0, 2.0)

    def test_singleton(self):
        assert sum_moment_match([GammaParams(1, 1)]) == GammaParams(1.0, 1.0)

    def test_two_components(self, rng):
        # mean 1 + 6 = 7, variance 1 + 2 * 9 = 19
        g = sum_moment_match([GammaParams(1, 1), GammaParams(2, 3)])
        assert g.shape == pytest.approx(49 / 19, rel=1e-14)
        assert g.scale == pytest.approx(19 / 7, rel=1e-14)
        x = rng.gamma(1, 1, 1_000_000) + rng.gamma(2, 3, 1_000_000)
        assert x.mean() == pytest.approx(g.mean(), rel=0.01)
        assert x.var() == pytest.approx(g.variance(), rel=0.01)

    def test_empty(self):
        with pytest.raises(DomainError):
            sum_moment_match([])


class TestCompositeFading:
    @given(st.floats(0.1, 20), st.floats(0.01, 100))
    def test_no_shadowing_identity(self, k, theta):
        g = GammaParams(k, theta)
        assert composite_fading_params(g, LogNormalParams(0.0)) == g

    @given(st.floats(0.1, 20), st.floats(0.01, 100), st.floats(0.0, 12.0))
    def test_preserves_raw_moments(self, k, theta, sigma_db):
        shadow = LogNormalParams.from_db(sigma_db)
        p = composite_fading_params(GammaParams(k, theta), shadow)
        s2 = shadow.sigma**2
        assert p.mean() == pytest.approx(k * theta * math.exp(s2 / 2), rel=1e-10)
        assert p.second_moment() == pytest.approx(k * (k + 1) * theta**2 * math.exp(2 * s2), rel=1e-10)

    def test_rayleigh_6db_mean(self):
        shadow = LogNormalParams.from_db(6.0)
        p = composite_fading_params(GammaParams(1, 1), shadow)
        assert p.shape * p.scale == pytest.approx(math.exp(shadow.sigma**2 / 2), rel=1e-13)

    def test_rayleigh_6db_sampled(self, rng):
        shadow = LogNormalParams.from_db(6.0)
        p = composite_fading_params(GammaParams(1, 1), shadow)
        # E (HL)^2 has a heavy tail (SE ~0.6% at 1e6 draws), so use 1e7 for a 1% check
        hl = rng.exponential(1.0, 10_000_000) * shadow.sample(rng, 10_000_000)
        assert hl.mean() == pytest.approx(p.mean(), rel=0.01)
        assert np.mean(hl**2) == pytest.approx(p.second_moment(), rel=0.01)


class TestMoschopoulos:
    def test_equal_scales(self):
        mix = moschopoulos_mixture([GammaParams(1, 0.7), GammaParams(2, 0.7)])
        assert mix.prefactor == 1.0
        assert mix.rho == 3.0
        assert mix.theta_min == 0.7
        np.testing.assert_array_equal(mix.coeffs, [1.0])

    def test_exact_density(self):
        # Exp(1) + Exp(scale 2) has density e^{-y/2} - e^{-y}
        mix = moschopoulos_mixture([GammaParams(1, 1), GammaParams(1, 2)])
        y = np.linspace(0.01, 30, 200)
        np.testing.assert_allclose(mix.pdf(y), np.exp(-y / 2) - np.exp(-y), atol=1e-8)

    def test_cdf_vs_samples(self, rng):
        mix = moschopoulos_mixture([GammaParams(1, 1), GammaParams(1, 2)])
        x = rng.exponential(1.0, 1_000_000) + rng.exponential(2.0, 1_000_000)
        ks = stats.kstest(x, lambda y: mix.cdf(y)).statistic
        assert ks < 0.01

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.tuples(st.floats(0.2, 5), st.floats(0.1, 5)), min_size=1, max_size=4))
    def test_mean_identity(self, spec):
        parts = [GammaParams(k, t) for k, t in spec]
        mix = moschopoulos_mixture(parts, tolerance=1e-10)
        expect = sum(p.mean() for p in parts)
        assert mix.mean() == pytest.approx(expect, rel=1e-6)
        assert mix.coeffs[0] == 1.0
        assert mix.theta_min == min(p.scale for p in parts)
        assert mix.mass() <= 1 + 1e-12
        assert 1 - mix.mass() < 1e-10 + 1e-12

    def test_mass_monotone_in_depth(self):
        parts = [GammaParams(0.8, 1.0), GammaParams(1.5, 4.0)]
        masses = [moschopoulos_mixture(parts, tolerance=t).mass() for t in (1e-2, 1e-4, 1e-6, 1e-8)]
        assert masses == sorted(masses)
        assert np.all(np.cumsum(moschopoulos_mixture(parts).weights) >= 0)

    def test_recursion_matches_product(self):
        parts = [GammaParams(0.7, 1.0), GammaParams(1.3, 2.5), GammaParams(0.4, 7.0)]
        rec = moschopoulos_mixture(parts, method="recursion")
        prod = moschopoulos_mixture(parts, method="product")
        n = min(rec.terms, prod.terms)
        np.testing.assert_allclose(rec.coeffs[:n], prod.coeffs[:n], rtol=1e-8, atol=1e-14)

    def test_single_active_closed_form(self):
        # one scale above theta_min: c_n = (k)_n q^n / n!
        k, q = 0.45, 0.9
        mix = moschopoulos_mixture([GammaParams(1.0, 1.0), GammaParams(k, 1 / (1 - q))], method="recursion")
        n = np.arange(mix.terms)
        expect = np.exp(special.gammaln(k + n) - special.gammaln(k) - special.gammaln(n + 1) + n * math.log(q))
        np.testing.assert_allclose(mix.coeffs, expect, rtol=1e-10)

    def test_long_series_switches_to_product(self):
        parts = [GammaParams(0.45, 1e5), GammaParams(1.0, 1.0)]
        mix = moschopoulos_mixture(parts)
        assert mix.terms > 100_000
        assert 1 - mix.mass() < 1e-8

    def test_truncation_error_reports_mass(self):
        with pytest.raises(TruncationError) as info:
            moschopoulos_mixture([GammaParams(1, 1), GammaParams(1, 100)], method="recursion", max_terms=10)
        assert 0 < info.value.achieved_mass < 1
        assert info.value.terms >= 10

    @pytest.mark.parametrize("tol", [0.0, 1.0, -1e-3])
    def test_bad_tolerance(self, tol):
        with pytest.raises(DomainError):
            moschopoulos_mixture([GammaParams(1, 1)], tolerance=tol)

    def test_empty(self):
        with pytest.raises(DomainError):
            moschopoulos_mixture([])


class TestExpectedLog:
    def test_unit_exponential(self):
        assert expected_log_gamma(GammaParams(1, 1)) == pytest.approx(-0.57722, abs=1e-5)

    def test_gamma_two(self):
        assert expected_log_gamma(GammaParams(2, 1)) == pytest.approx(0.42278, abs=1e-5)

    def test_sampled(self, rng):
        x = rng.gamma(3.7, 0.4, 10_000_000)
        assert expected_log_gamma(GammaParams(3.7, 0.4)) == pytest.approx(np.log(x).mean(), abs=1e-3)

    def test_sum_iid(self):
        theta = 2.5
        got = expected_log_sum([GammaParams(1, theta), GammaParams(1, theta)])
        assert got == pytest.approx(special.psi(2) + math.log(theta), rel=1e-13)

    def test_sum_equal_scale(self):
        assert expected_log_sum([GammaParams(1, 1), GammaParams(2, 1)]) == pytest.approx(0.92278, abs=1e-5)

    def test_sum_sampled(self, rng):
        x = rng.exponential(1.0, 10_000_000) + rng.exponential(3.0, 10_000_000)
        got = expected_log_sum([GammaParams(1, 1), GammaParams(1, 3)])
        assert got == pytest.approx(np.log(x).mean(), abs=1e-3)

    @given(st.floats(0.1, 10), st.floats(0.01, 100))
    def test_singleton(self, k, theta):
        g = GammaParams(k, theta)
        assert expected_log_sum([g]) == expected_log_gamma(g)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.tuples(st.floats(0.2, 5), st.floats(0.1, 5)), min_size=2, max_size=4))
    def test_printed_form_equivalent(self, spec):
        parts = [GammaParams(k, t) for k, t in spec]
        assert expected_log_sum_printed(parts) == pytest.approx(expected_log_sum(parts), abs=1e-7)
