import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from dynprobit import (
    CapacityError,
    DomainError,
    OrthantSamplerConfig,
    log_normal_cdf,
    mills_inverse,
    normal_cdf,
    sample_orthant_tmvn,
    sample_trunc_norm,
    trunc_norm_mean,
)

mp.mp.dps = 40
HALF_NORMAL_MEAN = math.sqrt(2 / math.pi)
# log of int_{-inf}^{-20} phi, 40-digit quadrature after shifting the tail to the origin
LOG_PHI_MINUS_20 = -203.91715537109726
# mpmath phi(-25)/Phi(-25)
MILLS_MINUS_25 = 25.039873012057563
# mpmath quadrature of the truncated densities
TN_MEAN_2_HALF = 2.0000669172322343
TN_MEAN_MINUS_8 = 0.12136811223611268


def mp_mills(x):
    x = mp.mpf(x)
    return mp.npdf(x) / mp.ncdf(x)


def batch_means_se(draws, batches=50):
    """Standard error of the mean of an autocorrelated chain."""
    m = len(draws) // batches
    means = draws[: m * batches].reshape(batches, m, -1).mean(axis=1)
    return means.std(axis=0, ddof=1) / math.sqrt(batches)


class TestNormalCdf:
    def test_center(self):
        assert normal_cdf(0.0) == 0.5

    def test_symmetry(self):
        x = np.random.default_rng(0).uniform(-8, 8, 10_000)
        np.testing.assert_allclose(normal_cdf(x) + normal_cdf(-x), 1.0, rtol=0, atol=1e-12)

    def test_relative_accuracy(self):
        grid = np.linspace(-8, 8, 161)
        ref = np.array([float(mp.ncdf(mp.mpf(v))) for v in grid])
        np.testing.assert_allclose(normal_cdf(grid), ref, rtol=1e-12, atol=0)

    def test_log_tail(self):
        assert log_normal_cdf(-20.0) == pytest.approx(LOG_PHI_MINUS_20, rel=1e-13)
        # phi(-20 - u) = phi(20) exp(-20 u - u^2 / 2)
        tail = mp.quad(lambda u: mp.exp(-20 * u - u * u / 2), [0, 0.01, 0.05, 0.2, 1, mp.inf])
        ref = float(mp.log(mp.npdf(20) * tail))
        assert LOG_PHI_MINUS_20 == pytest.approx(ref, rel=1e-15)

    def test_log_accuracy_far_left(self):
        grid = np.linspace(-40, 5, 91)
        ref = np.array([float(mp.log(mp.ncdf(mp.mpf(v)))) for v in grid])
        got = log_normal_cdf(grid)
        assert np.all(np.isfinite(got))
        np.testing.assert_allclose(got, ref, rtol=1e-12, atol=1e-300)

    @pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
    def test_non_finite(self, bad):
        for f in (normal_cdf, log_normal_cdf, mills_inverse):
            with pytest.raises(DomainError):
                f(bad)


class TestMills:
    def test_zero(self):
        assert mills_inverse(0.0) == pytest.approx(HALF_NORMAL_MEAN, rel=1e-15)

    def test_far_tail(self):
        assert mills_inverse(-25.0) == pytest.approx(MILLS_MINUS_25, rel=1e-12)
        # asymptotic series cross-check
        assert MILLS_MINUS_25 == pytest.approx(25 + 1 / 25 - 2 / 25**3 + 10 / 25**5, rel=1e-9)

    def test_against_high_precision(self):
        grid = np.linspace(-30, 10, 401)
        ref = np.array([float(mp_mills(v)) for v in grid])
        np.testing.assert_allclose(mills_inverse(grid), ref, rtol=1e-10, atol=0)

    def test_bound_and_limit(self):
        x = -np.logspace(-2, np.log10(35), 200)
        z = mills_inverse(x)
        assert np.all(z > -x)
        gap = z + x
        assert np.all(np.diff(gap) < 0)
        assert gap[-1] < 0.03

    def test_monotone(self):
        z = mills_inverse(np.linspace(-30, 10, 1000))
        # phi/Phi decreases in x, i.e. increases in -x
        assert np.all(np.diff(z) < 0)


class TestTruncNormMean:
    @pytest.mark.parametrize(
        "mu, sigma, sign, expected",
        [
            (0.0, 1.0, 1, HALF_NORMAL_MEAN),
            (0.0, 1.0, -1, -HALF_NORMAL_MEAN),
            (2.0, 0.5, 1, TN_MEAN_2_HALF),
            (-8.0, 1.0, 1, TN_MEAN_MINUS_8),
        ],
    )
    def test_values(self, mu, sigma, sign, expected):
        assert trunc_norm_mean(mu, sigma, sign) == pytest.approx(expected, rel=1e-12)

    def test_frozen_values_match_quadrature(self):
        for mu, sigma, expected in ((2.0, 0.5, TN_MEAN_2_HALF), (-8.0, 1.0, TN_MEAN_MINUS_8)):
            f = lambda v: mp.npdf(v, mu, sigma)  # noqa: E731
            ref = mp.quad(lambda v: v * f(v), [0, max(mu, 1), mp.inf]) / mp.quad(f, [0, max(mu, 1), mp.inf])
            assert float(ref) == pytest.approx(expected, rel=1e-14)

    def test_bad_sigma(self):
        with pytest.raises(DomainError):
            trunc_norm_mean(0.0, 0.0, 1)
        with pytest.raises(DomainError):
            trunc_norm_mean(0.0, 1.0, 0)


class TestSampleTruncNorm:
    @given(
        st.floats(-50, 50),
        st.floats(0.01, 20),
        st.sampled_from([-1, 1]),
        st.integers(0, 2**32 - 1),
    )
    @settings(max_examples=200, deadline=None)
    def test_support(self, mu, sigma, sign, seed):
        v = sample_trunc_norm(mu, sigma, sign, np.random.default_rng(seed), size=64)
        assert np.all(sign * v > 0)

    def test_half_normal_mean(self):
        v = sample_trunc_norm(0.0, 1.0, 1, np.random.default_rng(1), size=100_000)
        se = v.std(ddof=1) / math.sqrt(v.size)
        assert abs(v.mean() - HALF_NORMAL_MEAN) <= 3 * se

    def test_far_tail_mean(self):
        v = sample_trunc_norm(-8.0, 1.0, 1, np.random.default_rng(2), size=10_000)
        se = v.std(ddof=1) / math.sqrt(v.size)
        assert abs(v.mean() - TN_MEAN_MINUS_8) <= 3 * se

    @pytest.mark.parametrize("mu", [-3.0, -6.0])
    def test_distribution_both_regimes(self, mu):
        # standardized truncation point 3 uses inverse CDF, 6 uses exponential rejection
        v = sample_trunc_norm(mu, 1.0, 1, np.random.default_rng(3), size=20_000)
        dist = stats.truncnorm(-mu, np.inf, loc=mu, scale=1.0)
        assert stats.kstest(v, dist.cdf).pvalue > 0.01

    def test_negative_side_scaled(self):
        v = sample_trunc_norm(1.5, 2.0, -1, np.random.default_rng(4), size=20_000)
        dist = stats.truncnorm(-np.inf, -1.5 / 2.0, loc=1.5, scale=2.0)
        assert stats.kstest(v, dist.cdf).pvalue > 0.01

    def test_deterministic(self):
        a = sample_trunc_norm([0.0, -7.0], 1.0, 1, np.random.default_rng(5), size=(100, 2))
        b = sample_trunc_norm([0.0, -7.0], 1.0, 1, np.random.default_rng(5), size=(100, 2))
        assert np.array_equal(a, b)

    def test_scalar(self):
        v = sample_trunc_norm(0.0, 1.0, -1, np.random.default_rng(0))
        assert isinstance(v, float) and v < 0


def bivariate_orthant_mean(rho):
    """Quadrature mean of the first coordinate of N_2(0, [[1, rho], [rho, 1]]) on (0, inf)^2."""
    det = 1 - rho**2

    def pdf(b, a):
        return math.exp(-(a * a - 2 * rho * a * b + b * b) / (2 * det)) / (2 * math.pi * math.sqrt(det))

    mass = integrate.dblquad(pdf, 0, 14, 0, 14, epsabs=1e-13)[0]
    first = integrate.dblquad(lambda b, a: a * pdf(b, a), 0, 14, 0, 14, epsabs=1e-13)[0]
    return first / mass


BIVARIATE_RHO_HALF_MEAN = 0.8976201309032275


class TestOrthant:
    def test_frozen_bivariate_oracle(self):
        assert bivariate_orthant_mean(0.5) == pytest.approx(BIVARIATE_RHO_HALF_MEAN, rel=1e-9)
        # closed form: phi(0) (1 + rho) / 2 over orthant probability 1/4 + asin(rho) / (2 pi)
        closed = (1.5 / (2 * math.sqrt(2 * math.pi))) / (0.25 + math.asin(0.5) / (2 * math.pi))
        assert closed == pytest.approx(BIVARIATE_RHO_HALF_MEAN, rel=1e-12)

    @pytest.mark.parametrize("strategy", ["rejection", "gibbs"])
    def test_identity_half_normal(self, strategy):
        s = sample_orthant_tmvn(np.eye(4), 20_000, OrthantSamplerConfig(strategy=strategy, seed=1))
        assert np.all(s.draws > 0)
        se = s.draws.std(axis=0, ddof=1) / math.sqrt(20_000)
        assert np.all(np.abs(s.draws.mean(axis=0) - HALF_NORMAL_MEAN) <= 3 * se)

    def test_gibbs_identity_ks(self):
        s = sample_orthant_tmvn(np.eye(3), 10_000, OrthantSamplerConfig(strategy="gibbs", seed=2))
        for j in range(3):
            assert stats.kstest(s.draws[:, j], stats.halfnorm.cdf).pvalue > 0.01

    def test_one_dimensional_reduction(self):
        s = sample_orthant_tmvn(np.eye(1), 10_000, OrthantSamplerConfig(seed=3))
        ref = sample_trunc_norm(0.0, 1.0, 1, np.random.default_rng(4), size=10_000)
        assert stats.ks_2samp(s.draws[:, 0], ref).pvalue > 0.01

    @pytest.mark.parametrize("strategy", ["rejection", "gibbs"])
    def test_bivariate_mean(self, strategy):
        gamma = np.array([[1.0, 0.5], [0.5, 1.0]])
        s = sample_orthant_tmvn(gamma, 40_000, OrthantSamplerConfig(strategy=strategy, seed=5))
        se = batch_means_se(s.draws)
        assert np.all(np.abs(s.draws.mean(axis=0) - BIVARIATE_RHO_HALF_MEAN) <= 3 * se)

    def test_deterministic(self):
        gamma = np.array([[1.0, -0.3, 0.2], [-0.3, 1.0, 0.4], [0.2, 0.4, 1.0]])
        for strategy in ("rejection", "gibbs", "auto"):
            cfg = OrthantSamplerConfig(strategy=strategy, seed=9)
            a = sample_orthant_tmvn(gamma, 500, cfg).draws
            b = sample_orthant_tmvn(gamma, 500, cfg).draws
            assert np.array_equal(a, b)

    def test_auto_selection(self):
        assert sample_orthant_tmvn(np.eye(3), 10, OrthantSamplerConfig(seed=0)).strategy == "rejection"
        big = sample_orthant_tmvn(np.eye(30), 10, OrthantSamplerConfig(seed=0, burn_in=10))
        assert big.strategy == "gibbs" and not big.exact
        assert big.burn_in == 10 and big.thinning == 5

    def test_default_burn_in(self):
        assert OrthantSamplerConfig().burn_in_for(7) == 350

    def test_capacity_error(self):
        with pytest.raises(CapacityError, match="gibbs"):
            sample_orthant_tmvn(np.eye(20), 10, OrthantSamplerConfig(strategy="rejection", max_rejection_attempts=5000))

    def test_singular_gamma_jitter(self):
        s = sample_orthant_tmvn(np.ones((2, 2)), 200, OrthantSamplerConfig(strategy="gibbs", seed=1, burn_in=20))
        assert s.jitter > 0
        assert np.all(s.draws > 0)
        assert s.diagnostics()["jitter"] == s.jitter

    def test_validation(self):
        with pytest.raises(DomainError, match="unit diagonal"):
            sample_orthant_tmvn(2 * np.eye(2), 10)
        with pytest.raises(DomainError, match="semidefinite"):
            sample_orthant_tmvn(np.array([[1.0, 2.0], [2.0, 1.0]]), 10)
        with pytest.raises(ValueError):
            OrthantSamplerConfig(thinning=0)
        with pytest.raises(ValueError):
            OrthantSamplerConfig(strategy="tilting")


def test_compiled_mills_matches_reference():
    from dynprobit.truncnorm import _mills, _mills_scalar

    grid = np.concatenate([np.linspace(-60.0, 12.0, 721), [-25.0, -25.0 + 1e-9, 0.0, -0.0]])
    ref = _mills(grid)
    got = np.array([_mills_scalar(v) for v in grid])
    np.testing.assert_allclose(got, ref, rtol=1e-12, atol=0)
