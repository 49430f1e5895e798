"""Phase-space density of the Langevin system dX = U dt, dU = sigma dW.

A particle started at (s, u0(s)) has, at time t, a jointly Gaussian
position and velocity: X = s + u0 t + sigma int_0^t W, U = u0 + sigma W_t,
with covariance

    Var X = sigma^2 t^3 / 3,  Cov(X, U) = sigma^2 t^2 / 2,  Var U = sigma^2 t.

The phase density P(t, x, u) is the f-weighted mixture of these Gaussians.
The covariance form is the authoritative kernel; :func:`printed_exponent`
keeps the expanded quadratic form used in the literature so the two can be
compared term by term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _layout
from .profiles import DensityProfile, Linear, NoiseModel, VelocityProfile


@dataclass(frozen=True)
class PhasePoint:
    x: float
    u: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.u)):
            raise ValueError("phase point components must be finite")


@dataclass(frozen=True)
class GaussianKernelParams:
    t: float
    sigma: float

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError(f"transition kernel needs t > 0, got {self.t}")
        if not self.sigma > 0:
            raise ValueError(f"transition kernel needs sigma > 0, got {self.sigma}")

    @property
    def var_x(self):
        return self.sigma**2 * self.t**3 / 3.0

    @property
    def var_u(self):
        return self.sigma**2 * self.t

    @property
    def cov_xu(self):
        return self.sigma**2 * self.t**2 / 2.0

    @property
    def det(self):
        return self.sigma**4 * self.t**4 / 12.0

    @property
    def cond_var_u(self):
        """Var(U | X), equal to sigma^2 t / 4."""
        return self.var_u - self.cov_xu**2 / self.var_x

    def cov(self):
        return np.array([[self.var_x, self.cov_xu], [self.cov_xu, self.var_u]])


def _quad_form(p: GaussianKernelParams, dx, du):
    # inverse covariance times det: [[var_u, -cov], [-cov, var_x]]
    return (p.var_u * dx * dx - 2.0 * p.cov_xu * dx * du + p.var_x * du * du) / p.det


def transition_density(params: GaussianKernelParams, start: PhasePoint, end: PhasePoint):
    """Density at ``end`` of a particle launched from ``start`` (u = u0(s))."""
    dx = end.x - start.x - start.u * params.t
    du = end.u - start.u
    return math.exp(-0.5 * _quad_form(params, dx, du)) / (2.0 * math.pi * math.sqrt(params.det))


def transition_density_grid(params: GaussianKernelParams, s, u0s, x, u):
    """Vectorized transition density over arrays of start/end points."""
    dx = np.asarray(x) - np.asarray(s) - np.asarray(u0s) * params.t
    du = np.asarray(u) - np.asarray(u0s)
    return np.exp(-0.5 * _quad_form(params, dx, du)) / (2.0 * math.pi * math.sqrt(params.det))


def peak_density(params: GaussianKernelParams):
    """sqrt(3) / (pi sigma^2 t^2), the value at the kernel's mean."""
    return math.sqrt(3.0) / (math.pi * params.sigma**2 * params.t**2)


def printed_exponent(t, sigma, s, x, u, u0s):
    """Exponent of the expanded one-dimensional phase-density formula."""
    return -2.0 / (sigma**2 * t**3) * (
        3.0 * t**2 * u * u0s
        + t**2 * (u0s - u) ** 2
        + 3.0 * (x - s) ** 2
        + 3.0 * t * (u + u0s) * (s - x)
    )


def covariance_exponent(t, sigma, s, x, u, u0s):
    p = GaussianKernelParams(t, sigma)
    return -0.5 * _quad_form(p, x - s - u0s * t, u - u0s)


def _u_center(t, x, u, v: VelocityProfile, sigma):
    """Where the velocity factor of the kernel peaks in s (linear data only)."""
    if not isinstance(v, Linear):
        return ()
    # E[U | X=x, s] = (-u0 t - 3 (s - x)) / (2t) = u  ->  s = (3x - 2tu) / (alpha t + 3)
    den = v.alpha * t + 3.0
    if den == 0.0:
        return ()
    width = math.sqrt(GaussianKernelParams(t, sigma).cond_var_u) * 2.0 * t / abs(den)
    return (((3.0 * x - 2.0 * t * u) / den, width),)


def phase_density(t, pp: PhasePoint, f: DensityProfile, v: VelocityProfile, noise: NoiseModel,
                  L=None, epsrel=1e-12):
    """P(t, x, u) = int f(s) K(x, u | s, u0(s)) ds / int f.

    Non-normalizable f requires a truncation ``L`` (f restricted to [-L, L]).
    """
    params = GaussianKernelParams(t, noise.sigma)
    mass = _mass(f, L)
    edges, lt, rt = _layout.window(t, pp.x, f, v, noise.sigma, L,
                                   extra=_u_center(t, pp.x, pp.u, v, noise.sigma))

    def integrand(s):
        u0s = v.eval(s)
        return f.pdf(s) * transition_density_grid(params, s, u0s, pp.x, pp.u)

    val, _, _, _ = _layout.integrate_line(integrand, edges, lt, rt, epsrel=epsrel)
    return float(val[0]) / mass


def _mass(f: DensityProfile, L):
    if L is None:
        if not f.normalizable:
            raise ValueError("non-normalizable density needs a truncation L")
        return f.norm()
    from .quadrature import integrate

    edges = _layout.build_edges(f, [], [], -L, L)
    return float(integrate(f.pdf, edges, epsrel=1e-13).value[0])


def marginal_density(t, x, f: DensityProfile, v: VelocityProfile, noise: NoiseModel, L=None,
                     epsrel=1e-12):
    """rho(t, x) = int P(t, x, u) du, the position density at time t."""
    if not t > 0:
        raise ValueError("marginal density needs t > 0")
    sigma = noise.sigma
    a = 3.0 / (2.0 * sigma**2 * t**3)
    mass = _mass(f, L)
    edges, lt, rt = _layout.window(t, x, f, v, sigma, L)

    def integrand(s):
        z = v.flow(s, t) - x
        return f.pdf(s) * np.exp(-a * z * z)

    val, _, _, _ = _layout.integrate_line(integrand, edges, lt, rt, epsrel=epsrel)
    return float(val[0]) * math.sqrt(a / math.pi) / mass


def phase_marginal_ratio(t, x, s, u0s, sigma):
    """int K du divided by the position weight, per start point s.

    Completing the square must leave an s-independent constant.
    """
    from .quadrature import integrate

    params = GaussianKernelParams(t, sigma)
    sd = math.sqrt(params.var_u)
    out = []
    for si, ui in zip(np.atleast_1d(s), np.atleast_1d(u0s)):
        centre = ui + params.cov_xu / params.var_x * (x - si - ui * t)
        edges = centre + sd * np.linspace(-40, 40, 41)
        val = integrate(lambda u: transition_density_grid(params, si, ui, x, u), edges,
                        epsrel=1e-12).value[0]
        w = math.exp(-3.0 * (ui * t + si - x) ** 2 / (2.0 * sigma**2 * t**3))
        out.append(val / w)
    return np.array(out)
