import math

import numpy as np
import pytest
from scipy import integrate as si
from scipy import stats

from gradstorm import sde
from gradstorm.errors import ConfigError, EnvelopeViolation
from gradstorm.kernel import GaussianKernelParams
from gradstorm.profiles import (CustomDensity, Gaussian, Linear, NoiseModel, PowerLaw,
                                Uniform)

ONE = NoiseModel(1.0)


def test_zero_time_is_identity():
    x0 = np.array([0.5, -1.0])
    u0 = np.array([2.0, 0.0])
    x, u = sde.sample_terminal(0.0, x0, u0, 1.0, sde.stream(1, 0))
    assert np.array_equal(x, x0) and np.array_equal(u, u0)
    assert x is not x0


def test_streams_are_reproducible_and_distinct():
    a = sde.stream(7, 3).standard_normal(4)
    assert np.array_equal(a, sde.stream(7, 3).standard_normal(4))
    assert not np.array_equal(a, sde.stream(7, 4).standard_normal(4))


@pytest.mark.parametrize("t,sigma", [(0.5, 1.0), (2.0, 0.3)])
def test_terminal_moments(t, sigma):
    mc = sde.moment_check(t, sigma, 10**6, seed=3)
    assert all(abs(z) < 3.0 for z in mc.z_scores.values()), mc.z_scores


def test_position_marginal_ks():
    t, sigma = 0.8, 1.2
    p = GaussianKernelParams(t, sigma)
    x, _ = sde.sample_terminal(t, np.zeros(10**6), np.full(10**6, 0.5), sigma, sde.stream(9, 0))
    d = stats.kstest(x, stats.norm(0.5 * t, math.sqrt(p.var_x)).cdf).statistic
    assert d < 0.002


def test_agrees_with_fine_step_simulation():
    # path-by-path Euler-Maruyama as an independent oracle (bias O(dt))
    t, sigma, n = 1.0, 1.0, 20_000
    xe, ue = sde.euler_maruyama(t, np.zeros(n), np.full(n, 0.3), sigma, 500, sde.stream(1, 0))
    xs, us = sde.sample_terminal(t, np.zeros(n), np.full(n, 0.3), sigma, sde.stream(2, 0))
    assert stats.ks_2samp(xe, xs).pvalue > 1e-3
    assert stats.ks_2samp(ue, us).pvalue > 1e-3
    assert stats.ks_2samp(xe - 0.5 * t * (ue - 0.3), xs - 0.5 * t * (us - 0.3)).pvalue > 1e-3


def test_two_half_steps_match_one_step():
    t, sigma, n = 1.4, 0.8, 200_000
    rng = sde.stream(4, 0)
    xh, uh = sde.sample_terminal(t / 2, np.zeros(n), np.zeros(n), sigma, rng)
    x2, u2 = sde.sample_terminal(t / 2, xh, uh, sigma, rng)
    x1, u1 = sde.sample_terminal(t, np.zeros(n), np.zeros(n), sigma, sde.stream(5, 0))
    assert stats.ks_2samp(x1, x2).pvalue > 1e-3
    assert stats.ks_2samp(u1, u2).pvalue > 1e-3
    p = GaussianKernelParams(t, sigma)
    se = math.sqrt((p.var_x * p.var_u + p.cov_xu**2) / n)
    assert abs(np.mean(x2 * u2) - p.cov_xu) < 4 * se


def test_gaussian_initial_variance():
    x = sde.draw_initial(Gaussian(1.0), None, sde.stream(0, 0), 10**6)
    assert abs(np.var(x) - 0.5) < 3 * 0.5 * math.sqrt(2e-6)


def test_uniform_initial_bounds():
    x = sde.draw_initial(Uniform(), 10.0, sde.stream(0, 0), 10**5)
    assert x.min() >= -10 and x.max() <= 10
    assert abs(x.mean()) < 3 * 10 / math.sqrt(3e5)
    with pytest.raises(ConfigError):
        sde.draw_initial(Uniform(), None, sde.stream(0, 0), 5)


def test_scalar_draw():
    assert isinstance(sde.draw_initial(Gaussian(1.0), None, sde.stream(0, 0)), float)


def test_power_law_sampler_ks():
    x = sde.draw_initial(PowerLaw(-2.0), None, sde.stream(6, 0), 10**6)

    def cdf(q):
        # (1 + x^2)^-2 integrates to (x / (1 + x^2) + atan x) / 2; total mass pi / 2
        q = np.asarray(q)
        return 0.5 + (q / (1 + q * q) + np.arctan(q)) / math.pi

    for q in (-3.0, -0.4, 0.0, 1.7):
        ref = 0.5 + si.quad(lambda s: (1 + s * s) ** -2, 0.0, q)[0] / (math.pi / 2)
        assert cdf(q) == pytest.approx(ref, abs=1e-12)
    assert stats.kstest(x, cdf).statistic < 0.002


def test_truncated_power_law_stays_inside():
    x = sde.draw_initial(PowerLaw(1.0), 5.0, sde.stream(6, 0), 10**4)
    assert np.abs(x).max() <= 5.0


def test_custom_rejection_sampler():
    f = CustomDensity(lambda x: np.exp(-np.abs(x)), scale=1.0, bounds=(-12.0, 12.0))
    x = sde.draw_initial(f, None, sde.stream(8, 0), 200_000)
    assert stats.kstest(np.abs(x), stats.expon(scale=1.0).cdf).pvalue > 1e-3


def test_custom_envelope_violation():
    f = CustomDensity(lambda x: np.exp(-x * x), bounds=(-4.0, 4.0))
    with pytest.raises(EnvelopeViolation):
        sde.draw_initial(f, None, sde.stream(8, 0), 1000, envelope=0.5)


@pytest.mark.parametrize("f,t,x,exact", [(Uniform(), 0.5, 1.0, -2.0),
                                         (Gaussian(1.0), 1.0, 2.0, 3.0)])
def test_monte_carlo_examples(f, t, x, exact):
    est, = sde.mc_conditional_mean(t, [x], f, Linear(-1.0), ONE, sde.McConfig(bandwidth=0.05))
    assert est.status == "ok"
    assert est.within < 3.0
    # bin averaging shifts the target by at most the bin-scale curvature
    assert abs(est.u_hat_mc - exact) < 3 * est.std_error + abs(est.u_hat_quad - exact)
    # the bin target itself, against scipy on the closed-form integrands
    from gradstorm.closedform import gaussian_mean
    from gradstorm.kernel import marginal_density
    lo, hi = x - 0.025, x + 0.025
    rho = lambda y: marginal_density(t, y, f, Linear(-1.0), ONE)
    if isinstance(f, Uniform):
        ref = -2.0
    else:
        ref = (si.quad(lambda y: rho(y) * gaussian_mean(-1.0, 1.0, 1.0, t, y), lo, hi)[0]
               / si.quad(rho, lo, hi)[0])
    assert est.u_hat_quad == pytest.approx(ref, rel=1e-9)


def test_uniform_bin_average_is_exact():
    assert sde.bin_average_mean(0.5, 1.0, 0.2, Uniform(), Linear(-1.0), ONE, L=200.0) == \
        pytest.approx(-2.0, rel=1e-10)


def test_empty_bins_are_flagged():
    est = sde.mc_conditional_mean(1.0, [0.0, 40.0], Gaussian(1.0), Linear(-1.0), ONE,
                                  sde.McConfig(n_samples=10_000))
    assert est[0].status == "ok" and est[1].status == "empty"
    assert est[1].within is None


def test_results_independent_of_thread_count():
    grid = np.linspace(-1, 1, 5)
    runs = [sde.mc_conditional_mean(0.7, grid, Gaussian(1.0), Linear(-1.0), ONE,
                                    sde.McConfig(n_samples=300_000, workers=w), compare=False)
            for w in (1, 3)]
    assert [e.row() for e in runs[0]] == [e.row() for e in runs[1]]


def test_config_validation():
    with pytest.raises(ConfigError):
        sde.McConfig(n_samples=0)
    with pytest.raises(ConfigError):
        sde.McConfig(seed=-1)
    with pytest.raises(ConfigError):
        sde.McConfig(bandwidth=0.0)


def test_summary_counts():
    ests = [sde.McEstimate(0.0, 1.0, 0.1, 100, 1.05), sde.McEstimate(1.0, 1.0, 0.1, 100, 2.0),
            sde.McEstimate(2.0, math.nan, math.nan, 3, status="empty")]
    assert sde.mc_summary(ests) == {"bins": 2, "within_3se": 1, "fraction": 0.5}
