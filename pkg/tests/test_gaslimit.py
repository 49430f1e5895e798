import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradstorm import gaslimit
from gradstorm.burgers import solve_characteristics
from gradstorm.closedform import gaussian_gap
from gradstorm.condmean import conditional_mean
from gradstorm.errors import MultiRoot, SingularTime
from gradstorm.kernel import GaussianKernelParams, transition_density_grid
from gradstorm.profiles import (CustomDensity, Gaussian, Linear, NoiseModel, PowerLaw,
                                tanh_velocity)

ONE = NoiseModel(1.0)
GAUSS, LIN = Gaussian(1.0), Linear(-1.0)


def test_vanishing_noise_linear_example():
    assert gaslimit.vanishing_noise_mean(LIN, 0.5, 1.0) == pytest.approx(-2.0, rel=1e-12)


@given(st.floats(0.05, 0.95), st.floats(-3, 3))
@settings(max_examples=20)
def test_vanishing_noise_agrees_with_characteristics(t, x):
    v = tanh_velocity(1.0, 1.0)
    out = solve_characteristics(v, t, x)
    got = gaslimit.vanishing_noise_solution(v, t, x)
    assert out.kind == "unique"
    assert got.value == pytest.approx(out.u, rel=1e-12, abs=1e-14)
    # the root is carried to x along its straight characteristic
    assert got.root + t * got.value == pytest.approx(x, abs=1e-10)
    assert got.jacobian > 0


def test_vanishing_noise_errors():
    with pytest.raises(SingularTime):
        gaslimit.vanishing_noise_solution(LIN, 1.0, 0.3)
    with pytest.raises(MultiRoot):
        gaslimit.vanishing_noise_solution(LIN, 1.5, 0.3)
    with pytest.raises(MultiRoot):
        gaslimit.vanishing_noise_solution(tanh_velocity(1.0, 1.0), 2.0, 0.0)
    with pytest.raises(ValueError):
        gaslimit.vanishing_noise_solution(LIN, 0.0, 0.3)


def test_sigma_convergence_gaussian():
    conv = gaslimit.sigma_convergence(GAUSS, LIN, 0.5, 1.0)
    assert conv.monotone
    assert conv.fitted_order == pytest.approx(2.0, abs=0.1)
    for s, e in zip(conv.sigmas, conv.errors):
        assert e == pytest.approx(abs(gaussian_gap(-1.0, 1.0, s, 0.5, 1.0)), abs=1e-8)
    assert len(conv.rows()) == 11


def test_sigma_sequence_must_decrease():
    with pytest.raises(ValueError):
        gaslimit.sigma_convergence(GAUSS, LIN, 0.5, 1.0, sigma_seq=[1.0, 1.0])


@pytest.mark.parametrize("f,v", [(GAUSS, LIN), (PowerLaw(-2.0), tanh_velocity(1.0, 1.0))])
def test_lambda_vanishes_at_origin(f, v):
    assert abs(gaslimit.lambda_term(0.6, 0.0, f, v, ONE)) < 1e-12


def test_lambda_decreases_with_noise():
    vals = [abs(gaslimit.lambda_term(0.5, 0.7, GAUSS, LIN, NoiseModel(2.0**-j)))
            for j in range(7)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-3


def _second_moment(t, x, c, f, v, sigma, n=240):
    """int int f(s) K(s -> x, u) (u - c)^2 du ds by tensor Gauss-Legendre."""
    p = GaussianKernelParams(t, sigma)
    gs, ws = np.polynomial.legendre.leggauss(n)
    s = 8.0 * gs
    u = 10.0 * gs
    S, U = np.meshgrid(s, u, indexing="ij")
    K = transition_density_grid(p, S, v.eval(S), x, U)
    vals = f.pdf(S) * K * (U - c) ** 2
    return 80.0 * float(ws @ vals @ ws)


@pytest.mark.parametrize("t,x", [(0.7, 0.4), (1.2, -0.9)])
def test_lambda_against_tensor_quadrature(t, x):
    # Lambda = -d/dx' int (u - c)^2 P(x', u) du at x' = x with c = u_hat(x) frozen
    f, v, sigma = GAUSS, tanh_velocity(1.0, 1.0), 0.8
    c = conditional_mean(t, x, f, v, NoiseModel(sigma)).u_hat
    h = 1e-3

    def d(step):
        return (_second_moment(t, x + step, c, f, v, sigma)
                - _second_moment(t, x - step, c, f, v, sigma)) / (2 * step)

    oracle = -(4 * d(h / 2) - d(h)) / 3
    got = gaslimit.lambda_term(t, x, f, v, NoiseModel(sigma))
    assert got == pytest.approx(oracle, rel=1e-7, abs=1e-10)


def _stencil():
    return [(float(t), float(x)) for t in np.linspace(0.3, 1.5, 5)
            for x in np.linspace(-1.2, 1.2, 5)]


def test_momentum_balance():
    worst = max(gaslimit.momentum_residual(t, x, GAUSS, LIN, ONE).normalized
                for t, x in _stencil())
    assert worst < 1e-3


def test_continuity():
    worst = max(gaslimit.continuity_residual(t, x, GAUSS, LIN, ONE).normalized
                for t, x in _stencil())
    assert worst < 1e-3


def test_continuity_heavy_tail_with_front():
    r = gaslimit.continuity_residual(0.8, 0.6, PowerLaw(-2.0), tanh_velocity(1.0, 1.0), ONE)
    assert r.normalized < 1e-3


def test_continuity_invariant_under_rescaling():
    f1 = CustomDensity(lambda x: np.exp(-x * x), scale=1.0)
    f3 = CustomDensity(lambda x: 3.0 * np.exp(-x * x), scale=1.0)
    a = gaslimit.continuity_residual(0.7, 0.5, f1, LIN, ONE)
    b = gaslimit.continuity_residual(0.7, 0.5, f3, LIN, ONE)
    assert a.normalized == pytest.approx(b.normalized, abs=1e-12)
    for k in a.terms:
        assert a.terms[k] == pytest.approx(b.terms[k], rel=1e-10)


@pytest.mark.parametrize("t,x,u", [(0.4, -0.8, 0.25), (0.7, 0.3, 0.25), (1.2, 1.1, -0.5)])
def test_fokker_planck(t, x, u):
    assert gaslimit.fokker_planck_residual(t, x, u, GAUSS, LIN, ONE).normalized < 1e-3


STENCIL_U = [(0.5, 0.4, 0.3), (0.8, -0.6, 0.9), (1.2, 0.9, -0.4)]


@pytest.mark.parametrize("t,x,u", STENCIL_U)
def test_kinetic_form_with_conditional_variance(t, x, u):
    r = gaslimit.kinetic_acceleration_check(t, x, u, GAUSS, LIN, ONE, orientation="conditional")
    assert r.normalized < 1e-2
    assert gaslimit.fokker_planck_residual(t, x, u, GAUSS, LIN, ONE).normalized < 1e-3


def test_printed_acceleration_fails_where_fokker_planck_holds():
    # the density solves its Fokker-Planck equation, yet the (2/t)(u_hat - u)
    # acceleration does not reproduce it
    worst = max(gaslimit.kinetic_acceleration_check(t, x, u, GAUSS, LIN, ONE).normalized
                for t, x, u in STENCIL_U)
    assert worst > 0.1


def test_single_launch_limit_uses_reversed_sign():
    # a narrow initial density behaves like one launch point: Var(U|X) -> sigma^2 t / 4
    f = Gaussian(30.0)
    t, x, u = 0.6, 0.05, 0.3
    rev = gaslimit.kinetic_acceleration_check(t, x, u, f, LIN, ONE, orientation="reversed")
    pr = gaslimit.kinetic_acceleration_check(t, x, u, f, LIN, ONE, orientation="printed")
    assert rev.normalized < 0.05 < pr.normalized
    cv = gaslimit.conditional_velocity_variance(t, x, f, LIN, ONE)
    assert cv == pytest.approx(t / 4, rel=0.02)


def test_acceleration_changes_sign_at_mean():
    r = gaslimit.kinetic_acceleration_check(0.5, 0.4, 0.0, GAUSS, LIN, ONE)
    uh, coef = r.extra["u_hat"], r.extra["coefficient"]
    assert coef * (uh + 0.1 - uh) * coef * (uh - 0.1 - uh) < 0
    with pytest.raises(ValueError):
        gaslimit.kinetic_acceleration_check(0.5, 0.4, 0.0, GAUSS, LIN, ONE, orientation="x")


def test_conditional_variance_against_tensor_quadrature():
    t, x, sigma = 0.9, 0.3, 1.0
    v = tanh_velocity(1.0, 1.0)
    c = conditional_mean(t, x, GAUSS, v, ONE).u_hat
    p = GaussianKernelParams(t, sigma)
    gs, ws = np.polynomial.legendre.leggauss(240)
    S, U = np.meshgrid(8.0 * gs, 10.0 * gs, indexing="ij")
    P = GAUSS.pdf(S) * transition_density_grid(p, S, v.eval(S), x, U)
    ref = float(ws @ (P * (U - c) ** 2) @ ws) / float(ws @ P @ ws)
    assert gaslimit.conditional_velocity_variance(t, x, GAUSS, v, ONE) == pytest.approx(
        ref, rel=1e-9)


@pytest.mark.parametrize("t,x", [(0.2, 0.5), (0.5, -0.3), (0.8, 1.4)])
def test_limit_solves_burgers(t, x):
    assert gaslimit.burgers_residual(tanh_velocity(1.0, 1.0), t, x).normalized < 1e-4
    assert gaslimit.burgers_residual(LIN, t, x).normalized < 1e-4
