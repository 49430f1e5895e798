"""Conditional-mean velocity u_hat(t, x) = E[U_t | X_t = x] by quadrature.

With position weight w(s) = exp(-3 (u0(s) t + s - x)^2 / (2 sigma^2 t^3)),

    u_hat = (1 / 2t) * int (-u0(s) t - 3 (s - x)) f w ds / int f w ds.

Densities that cannot be normalized (uniform, heavy power laws) are handled
by truncating f to [-L, L] and letting L grow until the ratio settles.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _layout
from .errors import DivergentIntegral, GradstormError, LimitNotReached
from .profiles import (DensityProfile, Linear, NoiseModel, PowerLaw, VelocityProfile,
                       blowup_time)

T_MIN = 1e-8
EPSREL = 1e-11
L_SCHEDULE = tuple(2.0**j for j in range(4, 41))
L_RTOL = 1e-8


@dataclass
class MeanFieldSample:
    t: float
    x: float
    u_hat: float
    du_hat_dx: float
    quadrature_error: float
    renormalized: bool = False
    L_used: float | None = None
    diagnostics: dict = field(default_factory=dict)

    CSV_FIELDS = ("t", "x", "u_hat", "du_hat_dx", "quadrature_error", "renormalized", "L_used")

    def row(self):
        return [getattr(self, k) for k in self.CSV_FIELDS]

    def to_dict(self):
        d = {k: getattr(self, k) for k in self.CSV_FIELDS}
        d["diagnostics"] = dict(self.diagnostics)
        return d


@dataclass
class BlowupScanResult:
    k: float
    alpha: float
    sigma: float
    epsilon_grid: list
    slope_at_origin: list
    fitted_exponent: float
    fitted_prefactor: float
    fit_window: tuple = ()
    log_model_prefactor: float | None = None
    log_model_residual: float | None = None
    linear_rate_prefactor: float | None = None
    failures: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "k": self.k,
            "alpha": self.alpha,
            "sigma": self.sigma,
            "epsilon_grid": list(self.epsilon_grid),
            "slope_at_origin": list(self.slope_at_origin),
            "fitted_exponent": self.fitted_exponent,
            "fitted_prefactor": self.fitted_prefactor,
            "fit_window": list(self.fit_window),
            "log_model_prefactor": self.log_model_prefactor,
            "log_model_residual": self.log_model_residual,
            "linear_rate_prefactor": self.linear_rate_prefactor,
            "failures": {repr(k): v for k, v in self.failures.items()},
        }


# ---------------------------------------------------------------------------
# weighted moments
# ---------------------------------------------------------------------------


def _moments(t, x, f: DensityProfile, v: VelocityProfile, sigma, L=None, epsrel=EPSREL):
    """(D, N, D', N') up to a common positive factor, with error estimates.

    D = int f w, N = int g f w with g = -u0 t - 3(s - x); primes are x-derivatives,
    taken under the integral (d/dx log w = 2a (u0 t + s - x)).
    """
    a = 3.0 / (2.0 * sigma**2 * t**3)
    edges, lt, rt = _layout.window(t, x, f, v, sigma, L)

    def logpart(s):
        z = v.flow(s, t) - x
        return f.logpdf(s) - a * z * z

    probe = np.concatenate([edges, 0.5 * (edges[1:] + edges[:-1])])
    with np.errstate(over="ignore", invalid="ignore"):
        lp = logpart(probe)
    lp = lp[np.isfinite(lp)]
    shift = float(np.max(lp)) if lp.size else 0.0

    def integrand(s):
        u0 = v.eval(s)
        z = v.flow(s, t) - x
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            e = np.exp(f.logpdf(s) - a * z * z - shift)
        g = -u0 * t - 3.0 * (s - x)
        h = 2.0 * a * z
        return np.vstack([e, g * e, h * e, (3.0 + g * h) * e])

    val, err, l1, n_evals = _layout.integrate_line(integrand, edges, lt, rt, epsrel=epsrel)
    return val, err, l1, {"shift": shift, "n_evals": n_evals, "n_edges": int(edges.size)}


def _ratio(t, x, f, v, sigma, L=None, epsrel=EPSREL):
    """u_hat, du_hat/dx and the propagated quadrature error."""
    (D, N, Dp, Np), err, l1, info = _moments(t, x, f, v, sigma, L, epsrel)
    if not D > 0:
        raise DivergentIntegral(f"vanishing weight integral at t={t}, x={x}")
    u = N / (2.0 * t * D)
    du = (Np * D - N * Dp) / (2.0 * t * D * D)
    u_err = (err[1] + abs(N / D) * err[0]) / (2.0 * t * D)
    du_err = (err[3] + abs(du) * 2.0 * t * err[0] + abs(u) * 2.0 * t * err[2]) / (2.0 * t * D)
    info["du_error"] = float(du_err)
    info["l1_numerator"] = float(l1[1])
    return float(u), float(du), float(u_err), info


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def _initial_sample(t, x, v):
    xa = np.array([x], dtype=float)
    return MeanFieldSample(t, x, float(v.eval(xa)[0]), float(v.deriv(xa)[0]), 0.0,
                           diagnostics={"route": "initial"})


def conditional_mean(t, x, f: DensityProfile, v: VelocityProfile, noise: NoiseModel,
                     epsrel=EPSREL, L_schedule=None) -> MeanFieldSample:
    """u_hat(t, x) and its x-derivative.

    Non-normalizable densities go through :func:`conditional_mean_renormalized`.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if t < T_MIN:
        return _initial_sample(t, x, v)
    if not f.normalizable:
        return conditional_mean_renormalized(t, x, f, v, noise, L_schedule, epsrel=epsrel)
    u, du, err, info = _ratio(t, x, f, v, noise.sigma, None, epsrel)
    info["route"] = "direct"
    return MeanFieldSample(t, x, u, du, err, False, None, info)


def _agree(a, b, scale):
    return abs(a - b) <= L_RTOL * max(abs(a), abs(b)) or abs(a - b) <= 1e-12 * scale


def conditional_mean_renormalized(t, x, f: DensityProfile, v: VelocityProfile,
                                  noise: NoiseModel, L_schedule=None,
                                  epsrel=EPSREL) -> MeanFieldSample:
    """Limit L -> infinity of the ratio with f truncated to [-L, L].

    Agreement only counts once L has passed the extent of the position
    weight: for smaller L the weight is flat across [-L, L] and successive
    values agree long before the limit is reached.
    """
    if t < T_MIN:
        return _initial_sample(t, x, v)
    schedule = tuple(L_schedule) if L_schedule is not None else L_SCHEDULE
    extent = _layout.resolve_extent(t, x, v, noise.sigma)
    history = []
    streak = 0
    for L in schedule:
        u, du, err, info = _ratio(t, x, f, v, noise.sigma, L, epsrel)
        if history and L > extent:
            pu, pdu = history[-1][1], history[-1][2]
            scale = max(abs(u), abs(du) * max(1.0, abs(x)))
            if _agree(u, pu, scale) and _agree(du, pdu, abs(du) + 1e-300):
                streak += 1
            else:
                streak = 0
        history.append((L, u, du, err))
        if streak >= 2:
            info["route"] = "renormalized"
            info["extent"] = extent
            return MeanFieldSample(t, x, u, du, err, True, L, info)
    raise LimitNotReached(
        f"truncated ratio did not settle by L={schedule[-1]:g} (t={t}, x={x})",
        [h[1] for h in history[-3:]],
    )


def spatial_derivative(t, x, f, v, noise, fd=False, **kw):
    """d u_hat / dx; analytic by default, central difference when ``fd``."""
    if not fd:
        return conditional_mean(t, x, f, v, noise, **kw).du_hat_dx
    h = 1e-4 * max(1.0, abs(x))
    up = conditional_mean(t, x + h, f, v, noise, **kw).u_hat
    um = conditional_mean(t, x - h, f, v, noise, **kw).u_hat
    return (up - um) / (2.0 * h)


def direct_ratio(t, x, f, v, noise, epsrel=EPSREL):
    """The untruncated ratio, even for non-normalizable f (valid while w decays)."""
    u, du, err, info = _ratio(t, x, f, v, noise.sigma, None, epsrel)
    return MeanFieldSample(t, x, u, du, err, False, None, info)


# ---------------------------------------------------------------------------
# blowup scans at the critical time of linear data
# ---------------------------------------------------------------------------


def default_epsilon_grid(m1=4, m2=28):
    return [-(10.0 ** (-m / 4.0)) for m in range(m1, m2 + 1)]


def worker_count():
    try:
        n = int(os.environ.get("GRADSTORM_THREADS", "0"))
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return max(1, n)


def fit_power(eps, slopes):
    """Fit |slope| = C |eps|^(-p) by least squares in log-log; returns (p, C)."""
    le = np.log(np.abs(np.asarray(eps)))
    ls = np.log(np.abs(np.asarray(slopes)))
    p, c = np.polyfit(le, ls, 1)
    return float(-p), float(math.exp(c))


def fit_log_model(eps, slopes):
    """Fit slope = c * (-1 / (eps ln(-eps))); returns (c, rms relative residual)."""
    eps = np.asarray(eps)
    slopes = np.asarray(slopes)
    basis = -1.0 / (eps * np.log(-eps))
    # least squares in relative terms: minimise sum ((c b - y) / y)^2
    r = basis / slopes
    c = float(np.sum(r) / np.sum(r * r))
    rel = (c * basis - slopes) / slopes
    return c, float(np.sqrt(np.mean(rel**2)))


def fit_linear_rate(eps, slopes):
    """Prefactor B of slope ~ B / eps (exponent pinned to 1), geometric mean."""
    eps = np.asarray(eps)
    prod = np.asarray(slopes) * eps
    sign = float(np.sign(np.median(prod)))
    return sign * float(np.exp(np.mean(np.log(np.abs(prod)))))


def blowup_scan(k, alpha, noise: NoiseModel, epsilon_grid=None, workers=None) -> BlowupScanResult:
    """d u_hat/dx at x = 0 for t = T + eps, f = (1 + x^2)^k, u0 = alpha x.

    The exponent is fitted over the last decade of |eps|.
    """
    if not alpha < 0:
        raise ValueError("blowup scans need alpha < 0")
    eps = sorted(float(e) for e in (epsilon_grid or default_epsilon_grid()))
    if any(e >= 0 for e in eps):
        raise ValueError("epsilon values must be negative")
    f = PowerLaw(k)
    v = Linear(alpha)
    T = blowup_time(v)

    def one(e):
        try:
            return conditional_mean(T + e, 0.0, f, v, noise).du_hat_dx
        except GradstormError as exc:
            return exc

    n = workers or worker_count()
    if n > 1:
        with ThreadPoolExecutor(n) as pool:
            raw = list(pool.map(one, eps))
    else:
        raw = [one(e) for e in eps]
    failures = {e: repr(r) for e, r in zip(eps, raw) if isinstance(r, Exception)}
    good = [(e, r) for e, r in zip(eps, raw) if not isinstance(r, Exception)]
    ge = [e for e, _ in good]
    gs = [s for _, s in good]
    emin = max(ge)  # closest to zero
    window = [(e, s) for e, s in good if abs(e) <= 10.0 * abs(emin) * (1 + 1e-9)]
    we = [e for e, _ in window]
    ws = [s for _, s in window]
    p, C = fit_power(we, ws)
    sign = float(np.sign(np.median(ws)))
    c_log, res_log = fit_log_model(we, ws)
    return BlowupScanResult(
        k=k, alpha=alpha, sigma=noise.sigma,
        epsilon_grid=ge, slope_at_origin=gs,
        fitted_exponent=p, fitted_prefactor=sign * C,
        fit_window=(min(we), max(we)),
        log_model_prefactor=c_log, log_model_residual=res_log,
        linear_rate_prefactor=fit_linear_rate(we, ws),
        failures=failures,
    )
