import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as si

from gradstorm import sde
from gradstorm.gaslimit import fokker_planck_residual, total_mass
from gradstorm.kernel import (GaussianKernelParams, PhasePoint, covariance_exponent,
                              marginal_density, peak_density, phase_density,
                              phase_marginal_ratio, printed_exponent, transition_density,
                              transition_density_grid)
from gradstorm.profiles import Gaussian, Linear, NoiseModel, PowerLaw, tanh_velocity
from gradstorm.quadrature import gauss_legendre

times = st.floats(0.05, 5)
sigmas = st.floats(0.1, 3)


def test_rejects_nonpositive_time():
    with pytest.raises(ValueError):
        GaussianKernelParams(0.0, 1.0)
    with pytest.raises(ValueError):
        PhasePoint(math.nan, 0.0)


@given(times, sigmas)
def test_covariance_positive_definite(t, sigma):
    p = GaussianKernelParams(t, sigma)
    assert np.linalg.det(p.cov()) == pytest.approx(sigma**4 * t**4 / 12, rel=1e-9)
    assert p.cond_var_u == pytest.approx(sigma**2 * t / 4, rel=1e-12)


@given(times, sigmas, st.floats(-3, 3), st.floats(-2, 2))
def test_peak_value(t, sigma, s, u0):
    p = GaussianKernelParams(t, sigma)
    start = PhasePoint(s, u0)
    mean = PhasePoint(s + u0 * t, u0)
    # 1 / (2 pi sqrt(det)) with det = sigma^4 t^4 / 12
    assert transition_density(p, start, mean) == pytest.approx(
        math.sqrt(3) / (math.pi * sigma**2 * t**2), rel=1e-12)
    assert peak_density(p) == pytest.approx(transition_density(p, start, mean), rel=1e-14)


@given(times, sigmas, st.floats(-2, 2), st.floats(-2, 2))
def test_symmetric_about_mean(t, sigma, dx, du):
    p = GaussianKernelParams(t, sigma)
    start = PhasePoint(0.3, -0.4)
    mx, mu = 0.3 - 0.4 * t, -0.4
    a = transition_density(p, start, PhasePoint(mx + dx, mu + du))
    b = transition_density(p, start, PhasePoint(mx - dx, mu - du))
    assert a == pytest.approx(b, rel=1e-12, abs=1e-300)


def test_transition_density_normalized():
    p = GaussianKernelParams(0.7, 1.3)
    sx, su = math.sqrt(p.var_x), math.sqrt(p.var_u)
    mass = si.dblquad(lambda u, x: transition_density(p, PhasePoint(0.0, 0.5), PhasePoint(x, u)),
                      0.35 - 12 * sx, 0.35 + 12 * sx, 0.5 - 12 * su, 0.5 + 12 * su,
                      epsabs=0, epsrel=1e-10)[0]
    assert mass == pytest.approx(1.0, rel=1e-8)


def test_printed_exponent_matches_covariance_form():
    rng = np.random.default_rng(11)
    for _ in range(100):
        t = rng.uniform(0.05, 3)
        sigma = rng.uniform(0.2, 2)
        s, x, u, u0 = rng.uniform(-3, 3, 4)
        a = printed_exponent(t, sigma, s, x, u, u0)
        b = covariance_exponent(t, sigma, s, x, u, u0)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


def test_monte_carlo_histogram_matches_kernel():
    t, sigma = 1.0, 1.0
    p = GaussianKernelParams(t, sigma)
    n = 10**6
    x, u = sde.sample_terminal(t, np.zeros(n), np.zeros(n), sigma, sde.stream(5, 0))
    xe = np.linspace(-1.0, 1.0, 9)
    ue = np.linspace(-1.5, 1.5, 9)
    counts, _, _ = np.histogram2d(x, u, bins=[xe, ue])
    for i in range(8):
        for j in range(8):
            def inner(xs, j=j):
                return np.array([gauss_legendre(
                    lambda us: transition_density_grid(p, 0.0, 0.0, xv, us)[None, :],
                    ue[j], ue[j + 1], 16)[0] for xv in xs])[None, :]
            prob = gauss_legendre(inner, xe[i], xe[i + 1], 16)[0]
            expected = n * prob
            assert abs(counts[i, j] - expected) < 3 * math.sqrt(expected * (1 - prob))


def test_phase_density_normalized():
    t = 0.5
    f, v, noise = Gaussian(1.0), Linear(-1.0), NoiseModel(1.0)

    def over_u(xs):
        return np.array([gauss_legendre(
            lambda us: np.array([[phase_density(t, PhasePoint(xv, uu), f, v, noise)
                                  for uu in us]]), -7.0, 7.0, 40)[0] for xv in xs])[None, :]

    total = gauss_legendre(over_u, -5.0, 5.0, 40)[0]
    assert total == pytest.approx(1.0, abs=1e-8)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.1, 2))
def test_phase_density_point_symmetry(x, u, t):
    f, v, noise = Gaussian(0.8), tanh_velocity(1.0, 1.0), NoiseModel(0.7)
    a = phase_density(t, PhasePoint(x, u), f, v, noise)
    b = phase_density(t, PhasePoint(-x, -u), f, v, noise)
    assert a >= 0
    assert a == pytest.approx(b, rel=1e-9, abs=1e-300)


@pytest.mark.parametrize("t,x,u", [(0.5, 0.2, 0.1), (0.8, -0.6, 0.5), (1.3, 0.9, -0.4)])
def test_fokker_planck_residual(t, x, u):
    r = fokker_planck_residual(t, x, u, Gaussian(1.0), Linear(-1.0), NoiseModel(1.0))
    assert r.normalized < 1e-3


@pytest.mark.parametrize("x", [-1.0, 0.0, 0.4, 1.5])
def test_marginal_recovers_initial_density(x):
    f = Gaussian(1.0)
    rho = marginal_density(1e-4, x, f, Linear(-1.0), NoiseModel(1.0))
    assert rho == pytest.approx(float(f.pdf(np.array([x]))[0]), rel=1e-3)


@pytest.mark.parametrize("t", [0.1, 0.5, 1.0])
def test_mass_conserved(t):
    m = total_mass(t, Gaussian(1.0), Linear(-1.0), NoiseModel(1.0))
    assert m == pytest.approx(1.0, abs=1e-6)


def test_mass_conserved_heavy_tail():
    assert total_mass(0.5, PowerLaw(-2.0), tanh_velocity(1.0, 1.0), NoiseModel(0.5)) == \
        pytest.approx(1.0, abs=1e-6)


def test_marginal_variance_against_two_dimensional_quadrature():
    t, alpha, r, sigma = 0.6, -1.0, 1.0, 1.0
    f, v, noise = Gaussian(r), Linear(alpha), NoiseModel(sigma)
    p = GaussianKernelParams(t, sigma)
    var_rho = si.quad(lambda x: x * x * marginal_density(t, x, f, v, noise), -12, 12,
                      epsabs=0, epsrel=1e-11, limit=200)[0]

    def joint(x, s):
        m = s * (1 + alpha * t)
        return (x * x * r / math.sqrt(math.pi) * math.exp(-(r * s) ** 2)
                * math.exp(-0.5 * (x - m) ** 2 / p.var_x) / math.sqrt(2 * math.pi * p.var_x))

    var_2d = si.dblquad(joint, -10, 10, -12, 12, epsabs=0, epsrel=1e-10)[0]
    assert var_rho == pytest.approx(var_2d, rel=1e-7)


def test_phase_marginal_ratio_constant_in_s():
    s = np.linspace(-3, 3, 13)
    v = tanh_velocity(1.0, 1.0)
    ratio = phase_marginal_ratio(0.8, 0.3, s, v.eval(s), 0.9)
    assert np.ptp(ratio) / np.mean(ratio) < 1e-8
