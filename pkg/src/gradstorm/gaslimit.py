"""Vanishing-noise limit and the fluid equations satisfied by (rho, u_hat).

As sigma -> 0 the position weight concentrates on the root s(t, x) of
u0(s) + (s - x)/t = 0, so u_hat -> v(t, x) = u0(s(t, x)), the Burgers
solution before characteristics cross. For sigma > 0 the pair (rho, u_hat)
satisfies

    d_t rho + d_x (rho u_hat) = 0,
    d_t (rho u_hat) + d_x (rho u_hat^2) = Lambda,
    Lambda = -int P_x(t, x, u) (u - u_hat)^2 du,

and the residual checks here verify these by central finite differences.

Lambda is evaluated with the u-integral done in closed form: for a
particle launched from s, U given X = x is Gaussian with mean
m(s) = (-u0(s) t - 3 (s - x)) / (2t) and variance sigma^2 t / 4, so only
the s-integral is numerical.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _layout
from .burgers import characteristic_roots
from .condmean import conditional_mean, conditional_mean_renormalized
from .errors import MultiRoot, SingularTime
from .kernel import GaussianKernelParams, PhasePoint, _mass, marginal_density, phase_density
from .profiles import DensityProfile, Linear, NoiseModel, VelocityProfile

FD_REL = 1e-4
RESIDUAL_FLOOR = 1e-12
# relative accuracy of each quadrature value entering a difference quotient
ROUNDOFF = 1e-12
QUAD_FLOOR = 1e-8


# ---------------------------------------------------------------------------
# sigma -> 0
# ---------------------------------------------------------------------------


@dataclass
class VanishingNoiseValue:
    value: float
    root: float
    jacobian: float
    non_differentiable: bool = False


def vanishing_noise_solution(v: VelocityProfile, t, x, jac_tol=1e-12) -> VanishingNoiseValue:
    """Root s of u0(s) + (s - x)/t = 0 and v = u0(s).

    Raises MultiRoot when more than one root exists or the single root has
    already been crossed by its neighbours (1 + t u0'(s) < 0). A root with
    1 + t u0'(s) = 0 is returned with ``non_differentiable`` set.
    """
    if not t > 0:
        raise ValueError("vanishing-noise limit needs t > 0")
    if isinstance(v, Linear) and 1.0 + v.alpha * t == 0.0:
        raise SingularTime(f"all characteristics meet at t = {t}")
    roots = characteristic_roots(v, t, x)
    if len(roots) != 1:
        if not roots:
            raise MultiRoot(f"no root of the characteristic map at t={t}, x={x}")
        raise MultiRoot(f"{len(roots)} roots at t={t}, x={x}")
    s = roots[0]
    sa = np.array([s])
    jac = 1.0 + t * float(v.deriv(sa)[0])
    if jac < -jac_tol:
        raise MultiRoot(f"characteristic through x={x} crossed at t={t}")
    return VanishingNoiseValue(float(v.eval(sa)[0]), float(s), jac, abs(jac) <= jac_tol)


def vanishing_noise_mean(v: VelocityProfile, t, x):
    return vanishing_noise_solution(v, t, x).value


@dataclass
class SigmaConvergence:
    t: float
    x: float
    limit: float
    sigmas: list
    u_hats: list
    errors: list
    fitted_order: float | None
    monotone: bool

    def rows(self):
        return list(zip(self.sigmas, self.u_hats, self.errors))

    def to_dict(self):
        return asdict(self)


def sigma_convergence(f: DensityProfile, v: VelocityProfile, t, x, sigma_seq=None,
                      floor=QUAD_FLOOR) -> SigmaConvergence:
    """|u_hat(sigma) - v| along a decreasing sigma sequence.

    Monotonicity is judged after the first term and ignores changes below
    ``floor``; the order is a log-log fit over errors above the floor.
    """
    if sigma_seq is None:
        sigma_seq = [2.0**-j for j in range(0, 11)]
    sig = [float(s) for s in sigma_seq]
    if any(b >= a for a, b in zip(sig, sig[1:])):
        raise ValueError("sigma sequence must be strictly decreasing")
    limit = vanishing_noise_mean(v, t, x)
    u_hats = [conditional_mean(t, x, f, v, NoiseModel(s)).u_hat for s in sig]
    errs = [abs(u - limit) for u in u_hats]
    tail = errs[1:]
    monotone = all(b <= a + floor for a, b in zip(tail, tail[1:]))
    use = [(s, e) for s, e in zip(sig, errs) if e > 10 * floor]
    order = None
    if len(use) >= 2:
        ls = np.log([s for s, _ in use])
        le = np.log([e for _, e in use])
        order = float(np.polyfit(ls, le, 1)[0])
    return SigmaConvergence(t, x, limit, sig, u_hats, errs, order, monotone)


# ---------------------------------------------------------------------------
# fluid moments and the relaxation term
# ---------------------------------------------------------------------------


def _mean_field(t, x, f, v, noise, L):
    if L is not None:
        from .condmean import _ratio

        return _ratio(t, x, f, v, noise.sigma, L)[0]
    if f.normalizable:
        return conditional_mean(t, x, f, v, noise).u_hat
    return conditional_mean_renormalized(t, x, f, v, noise).u_hat


def lambda_term(t, x, f: DensityProfile, v: VelocityProfile, noise: NoiseModel, L=None,
                epsrel=1e-12, u_hat=None):
    """Lambda(t, x) = -int P_x (u - u_hat)^2 du with P normalized by the mass of f.

    Per start point s, with z = x - s - u0 t, phi the Gaussian position
    marginal and m(s) the conditional velocity mean,

        int d_x K (u - u_hat)^2 du = phi [-(z / var_x)(cv + (m - u_hat)^2) + (3/t)(m - u_hat)].

    Non-normalizable f needs a truncation ``L``.
    """
    if not t > 0:
        raise ValueError("Lambda needs t > 0")
    p = GaussianKernelParams(t, noise.sigma)
    if u_hat is None:
        u_hat = _mean_field(t, x, f, v, noise, L)
    mass = _mass(f, L)
    cv = p.cond_var_u
    norm = 1.0 / math.sqrt(2.0 * math.pi * p.var_x)
    edges, lt, rt = _layout.window(t, x, f, v, noise.sigma, L)

    def integrand(s):
        u0 = v.eval(s)
        z = x - v.flow(s, t)
        phi = norm * np.exp(-0.5 * z * z / p.var_x)
        dm = u0 + 1.5 * z / t - u_hat
        return f.pdf(s) * phi * (-(z / p.var_x) * (cv + dm * dm) + (3.0 / t) * dm)

    val, _, _, _ = _layout.integrate_line(integrand, edges, lt, rt, epsrel=epsrel)
    return -float(val[0]) / mass


def momentum_flux(t, x, f, v, noise, L=None):
    """(rho, rho u_hat, rho u_hat^2) at (t, x)."""
    rho = marginal_density(t, x, f, v, noise, L)
    u = _mean_field(t, x, f, v, noise, L)
    return rho, rho * u, rho * u * u


def _steps(t, x):
    return FD_REL * t, FD_REL * max(1.0, abs(x))


def _normalized(parts, noise=0.0):
    """|sum| / max(|part|), floored by RESIDUAL_FLOOR and the round-off level ``noise``.

    Where every term vanishes identically (e.g. at a symmetry point) only
    round-off divided by the step remains; ``noise`` keeps that from being
    reported as an O(1) residual.
    """
    total = sum(parts)
    scale = max(max(abs(p) for p in parts), RESIDUAL_FLOOR, noise)
    return abs(total) / scale


def _velocity_scale(t, u_hat, noise):
    return abs(u_hat) + noise.sigma * math.sqrt(t)


@dataclass
class Residual:
    """A finite-difference balance: ``terms`` should sum to zero."""

    t: float
    x: float
    terms: dict
    normalized: float
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def continuity_residual(t, x, f, v, noise, L=None) -> Residual:
    """d_t rho + d_x (rho u_hat), normalized by the larger of the two terms."""
    ht, hx = _steps(t, x)
    drho_dt = (marginal_density(t + ht, x, f, v, noise, L)
               - marginal_density(t - ht, x, f, v, noise, L)) / (2.0 * ht)
    jp = momentum_flux(t, x + hx, f, v, noise, L)[1]
    jm = momentum_flux(t, x - hx, f, v, noise, L)[1]
    dflux = (jp - jm) / (2.0 * hx)
    terms = {"d_t rho": drho_dt, "d_x (rho u_hat)": dflux}
    rho, j, _ = momentum_flux(t, x, f, v, noise, L)
    c = _velocity_scale(t, j / rho if rho > 0 else 0.0, noise)
    eps = ROUNDOFF * rho * (1.0 / ht + c / hx)
    return Residual(t, x, terms, _normalized(list(terms.values()), eps))


def momentum_residual(t, x, f, v, noise, L=None) -> Residual:
    """d_t (rho u_hat) + d_x (rho u_hat^2) - Lambda, normalized."""
    ht, hx = _steps(t, x)
    dj_dt = (momentum_flux(t + ht, x, f, v, noise, L)[1]
             - momentum_flux(t - ht, x, f, v, noise, L)[1]) / (2.0 * ht)
    dq_dx = (momentum_flux(t, x + hx, f, v, noise, L)[2]
             - momentum_flux(t, x - hx, f, v, noise, L)[2]) / (2.0 * hx)
    lam = lambda_term(t, x, f, v, noise, L)
    terms = {"d_t (rho u_hat)": dj_dt, "d_x (rho u_hat^2)": dq_dx, "-Lambda": -lam}
    rho, j, _ = momentum_flux(t, x, f, v, noise, L)
    c = _velocity_scale(t, j / rho if rho > 0 else 0.0, noise)
    eps = ROUNDOFF * rho * c * (1.0 / ht + c / hx)
    return Residual(t, x, terms, _normalized(list(terms.values()), eps), {"Lambda": lam})


def fokker_planck_residual(t, x, u, f, v, noise, L=None) -> Residual:
    """d_t P + u d_x P - (sigma^2 / 2) d_uu P by central differences."""
    ht, hx = _steps(t, x)
    hu = 1e-3 * math.sqrt(GaussianKernelParams(t, noise.sigma).var_u)

    def P(tt, xx, uu):
        return phase_density(tt, PhasePoint(xx, uu), f, v, noise, L)

    p0 = P(t, x, u)
    dt = (P(t + ht, x, u) - P(t - ht, x, u)) / (2.0 * ht)
    dx = (P(t, x + hx, u) - P(t, x - hx, u)) / (2.0 * hx)
    duu = (P(t, x, u + hu) - 2.0 * p0 + P(t, x, u - hu)) / (hu * hu)
    terms = {"d_t P": dt, "u d_x P": u * dx, "-(sigma^2/2) d_uu P": -0.5 * noise.sigma**2 * duu}
    return Residual(t, x, terms, _normalized(list(terms.values())), {"u": u, "P": p0})


ORIENTATIONS = ("printed", "reversed", "conditional")


def kinetic_acceleration_check(t, x, u, f, v, noise, L=None, orientation="printed") -> Residual:
    """Residual of d_t P + u d_x P + d_u (a P) for a candidate acceleration a.

    ``orientation`` selects a:

    * ``"printed"``:     a = (2/t)(u_hat - u)
    * ``"reversed"``:    a = (2/t)(u - u_hat)
    * ``"conditional"``: a = sigma^2 / (2 V) (u - u_hat), V = Var(U | X = x)

    Rewriting the diffusion as a flux, -(sigma^2/2) d_u P = a P, holds
    exactly when P is Gaussian in u at fixed x, with a as in
    ``"conditional"``. For a single launch point V = sigma^2 t / 4 and that
    reduces to ``"reversed"``.
    """
    if orientation not in ORIENTATIONS:
        raise ValueError(f"orientation must be one of {ORIENTATIONS}")
    ht, hx = _steps(t, x)
    hu = 1e-3 * math.sqrt(GaussianKernelParams(t, noise.sigma).var_u)
    uh = _mean_field(t, x, f, v, noise, L)

    def P(tt, xx, uu):
        return phase_density(tt, PhasePoint(xx, uu), f, v, noise, L)

    if orientation == "printed":
        coef = -2.0 / t
    elif orientation == "reversed":
        coef = 2.0 / t
    else:
        coef = noise.sigma**2 / (2.0 * conditional_velocity_variance(t, x, f, v, noise, L, uh))

    def flux(uu):
        return coef * (uu - uh) * P(t, x, uu)

    dt = (P(t + ht, x, u) - P(t - ht, x, u)) / (2.0 * ht)
    dx = (P(t, x + hx, u) - P(t, x - hx, u)) / (2.0 * hx)
    du = (flux(u + hu) - flux(u - hu)) / (2.0 * hu)
    terms = {"d_t P": dt, "u d_x P": u * dx, "d_u (a P)": du}
    return Residual(t, x, terms, _normalized(list(terms.values())),
                    {"u": u, "u_hat": uh, "coefficient": coef, "orientation": orientation})


def conditional_velocity_variance(t, x, f, v, noise, L=None, u_hat=None, epsrel=1e-12):
    """Var(U | X = x) = sigma^2 t / 4 + spread of the per-launch means m(s)."""
    p = GaussianKernelParams(t, noise.sigma)
    if u_hat is None:
        u_hat = _mean_field(t, x, f, v, noise, L)
    edges, lt, rt = _layout.window(t, x, f, v, noise.sigma, L)
    a = 0.5 / p.var_x

    def integrand(s):
        z = x - v.flow(s, t)
        w = f.pdf(s) * np.exp(-a * z * z)
        dm = v.eval(s) + 1.5 * z / t - u_hat
        return np.vstack([w, w * dm * dm])

    (den, num), _, _, _ = _layout.integrate_line(integrand, edges, lt, rt, epsrel=epsrel)
    return p.cond_var_u + float(num / den)


def burgers_residual(v: VelocityProfile, t, x) -> Residual:
    """v_t + v v_x for the vanishing-noise limit, by central differences."""
    ht, hx = _steps(t, x)
    vt = (vanishing_noise_mean(v, t + ht, x) - vanishing_noise_mean(v, t - ht, x)) / (2.0 * ht)
    v0 = vanishing_noise_mean(v, t, x)
    vx = (vanishing_noise_mean(v, t, x + hx) - vanishing_noise_mean(v, t, x - hx)) / (2.0 * hx)
    terms = {"v_t": vt, "v v_x": v0 * vx}
    return Residual(t, x, terms, _normalized(list(terms.values())))


def total_mass(t, f, v, noise, L=None, epsrel=1e-12):
    """int rho(t, x) dx over the whole line."""
    from scipy.integrate import quad

    # rho is a smoothed push-forward of f; integrate in pieces around its bulk
    spread = math.sqrt(GaussianKernelParams(t, noise.sigma).var_x) if t > 0 else 0.0
    scale = max(f.scale, 1.0) * (1.0 + t * _speed_scale(v)) + 10.0 * spread
    pts = [-50 * scale, -10 * scale, -3 * scale, 0.0, 3 * scale, 10 * scale, 50 * scale]

    def rho(x):
        return marginal_density(t, x, f, v, noise, L)

    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        total += quad(rho, lo, hi, epsabs=0, epsrel=epsrel, limit=200)[0]
    total += quad(rho, pts[-1], np.inf, epsabs=0, epsrel=epsrel, limit=200)[0]
    total += quad(rho, -np.inf, pts[0], epsabs=0, epsrel=epsrel, limit=200)[0]
    return total


def _speed_scale(v):
    if isinstance(v, Linear):
        return abs(v.alpha)
    return float(np.max(np.abs(v.deriv(np.linspace(-10, 10, 201)))))
