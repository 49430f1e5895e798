"""Closed-form and cross-oracle checks, shared by ``gradstorm validate`` and the scripts.

Every check returns a :class:`Check`; a run is a list of them. Checks are
deterministic (the Monte Carlo one is seeded) so a report can be compared
byte for byte between runs.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import asymptotics, closedform, gaslimit, sde
from .burgers import solve_characteristics
from .condmean import conditional_mean, conditional_mean_renormalized
from .profiles import Gaussian, Linear, NoiseModel, PowerLaw, Uniform, blowup_time


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.name}: {self.value:.3e} (threshold {self.threshold:.1e})"


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def uniform_linear(alpha=-1.0, sigmas=(0.5, 1.0, 2.0), tol=1e-8):
    """Renormalized quadrature vs alpha x / (1 + alpha t) on a 5x5 grid, t <= 0.9 T."""
    T = blowup_time(Linear(alpha))
    ts = np.linspace(0.1, 0.9, 5) * T
    xs = np.linspace(-2.0, 2.0, 5)
    v = Linear(alpha)
    worst = 0.0
    spread = 0.0
    for t in ts:
        for x in xs:
            vals = []
            for s in sigmas:
                u = conditional_mean_renormalized(float(t), float(x), Uniform(), v,
                                                  NoiseModel(s)).u_hat
                exact = closedform.uniform_mean(alpha, t, x)
                err = abs(u - exact) / max(abs(exact), 1.0)
                worst = max(worst, err)
                vals.append(u)
            spread = max(spread, (max(vals) - min(vals)) / max(abs(vals[0]), 1.0))
    value = max(worst, spread)
    return Check("uniform/linear exactness and sigma-independence", value <= tol, value, tol,
                 {"max_relative_error": worst, "max_sigma_spread": spread})


def gaussian_closed_form(alpha=-1.0, r=1.0, sigma=1.0, tol=1e-8, slope_tol=1e-6):
    """Quadrature vs the Gaussian closed form, including t = T; slope at (T, 0)."""
    v = Linear(alpha)
    T = blowup_time(v)
    f = Gaussian(r)
    n = NoiseModel(sigma)
    worst = 0.0
    for t in (0.25 * T, 0.5 * T, T, 1.5 * T):
        for x in (-2.0, -0.5, 0.5, 2.0):
            u = conditional_mean(t, x, f, v, n).u_hat
            exact = closedform.gaussian_mean(alpha, r, sigma, t, x)
            worst = max(worst, abs(u - exact) / max(abs(exact), 1.0))
    slope = conditional_mean(T, 0.0, f, v, n).du_hat_dx
    slope_err = abs(slope - (-1.5 * alpha))
    ok = worst <= tol and slope_err <= slope_tol
    return Check("gaussian closed form", ok, worst, tol,
                 {"slope_at_T": slope, "expected_slope": -1.5 * alpha, "slope_error": slope_err})


def mc_crosscheck(n_samples=1_000_000, seed=20240917, min_fraction=0.95):
    """Monte Carlo bin means vs rho-weighted quadrature for both linear configurations."""
    v = Linear(-1.0)
    noise = NoiseModel(1.0)
    grid = np.linspace(-2.0, 2.0, 21)
    out = {}
    ok = True
    worst = 1.0
    for name, f, t in (("uniform", Uniform(), 0.5), ("gaussian", Gaussian(1.0), 1.0)):
        est = sde.mc_conditional_mean(t, grid, f, v, noise,
                                      sde.McConfig(n_samples=n_samples, seed=seed))
        summary = sde.mc_summary(est)
        out[name] = summary
        ok = ok and summary["fraction"] >= min_fraction
        worst = min(worst, summary["fraction"])
    return Check("monte carlo vs quadrature (fraction within 3 SE)", ok, worst, min_fraction, out)


def suppressed_limit(alpha=-1.0, sigma=1.0, eps=-1e-6, tol=0.10):
    """Slope at x = 0, t = T + eps for f = 1/(1+x^2) vs the printed B4."""
    v = Linear(alpha)
    T = blowup_time(v)
    slope = conditional_mean(T + eps, 0.0, PowerLaw(-1.0), v, NoiseModel(sigma)).du_hat_dx
    b4 = asymptotics.b4(alpha, sigma)
    rel = _rel(slope, b4)
    return Check("k = -1 terminal slope vs B4", rel <= tol, rel, tol, {"slope": slope, "B4": b4})


def theorem1_consistency(alpha=-1.0, betas=(-2.0, -0.5), tol=1e-4):
    v = Linear(alpha)
    f = Gaussian(1.0)
    worst = 0.0
    detail = {}
    for beta in betas:
        pred = asymptotics.theorem1_slope(beta, v, f, 1.0).value
        got = conditional_mean(-1.0 / beta, 0.0, f, v, NoiseModel(1.0)).du_hat_dx
        detail[repr(beta)] = {"theorem1": pred, "quadrature": got}
        worst = max(worst, _rel(pred, got))
    return Check("bounded-slope formula vs quadrature", worst <= tol, worst, tol, detail)


def regime_table(alpha=-1.0, sigma=1.0):
    expected = {-2.0: asymptotics.SUPPRESSED, -1.0: asymptotics.SUPPRESSED,
                -0.75: asymptotics.ALGEBRAIC, -0.5: asymptotics.LOG_CORRECTED,
                0.25: asymptotics.LINEAR_RATE}
    got = {k: asymptotics.classify_regime(k, alpha, sigma).regime for k in expected}
    wrong = sum(1 for k in expected if got[k] != expected[k])
    b3 = asymptotics.classify_regime(0.25, alpha, sigma).B3
    ok = wrong == 0 and b3 == 1.5
    return Check("regime partition in k", ok, float(wrong), 0.0,
                 {repr(k): r for k, r in got.items()} | {"B3(0.25)": b3})


def sigma_limit(tol_gap=1e-8, tol_residual=1e-3):
    """sigma -> 0 convergence, exact Gaussian gap, continuity and Fokker-Planck residuals."""
    f = Gaussian(1.0)
    v = Linear(-1.0)
    t, x = 0.5, 1.0
    conv = gaslimit.sigma_convergence(f, v, t, x)
    gap_err = max(abs(e - abs(closedform.gaussian_gap(-1.0, 1.0, s, t, x)))
                  for s, e in zip(conv.sigmas, conv.errors))
    noise = NoiseModel(1.0)
    residuals = []
    for tt in (0.4, 0.7, 1.2):
        for xx in (-0.8, 0.3, 1.1):
            c = gaslimit.continuity_residual(tt, xx, f, v, noise).normalized
            p = gaslimit.fokker_planck_residual(tt, xx, 0.25, f, v, noise).normalized
            residuals.append((c, p))
    worst_c = max(c for c, _ in residuals)
    worst_p = max(p for _, p in residuals)
    ok = conv.monotone and gap_err <= tol_gap and worst_c < tol_residual and worst_p < tol_residual
    return Check("vanishing-noise limit and fluid residuals", ok, gap_err, tol_gap,
                 {"monotone": conv.monotone, "fitted_order": conv.fitted_order,
                  "continuity_max": worst_c, "fokker_planck_max": worst_p,
                  "errors": conv.errors})


def burgers_example():
    out = solve_characteristics(Linear(-1.0), 0.5, 1.0)
    past = solve_characteristics(Linear(-1.0), 1.5, 0.0)
    err = abs(out.u - (-2.0)) if out.u is not None else math.inf
    ok = out.kind == "unique" and err < 1e-12 and past.kind == "multiroot"
    return Check("characteristics: unique before T, multivalued after", ok, err, 1e-12,
                 {"before": out.kind, "after": past.kind})


CHECKS = {
    "uniform": uniform_linear,
    "gaussian": gaussian_closed_form,
    "montecarlo": mc_crosscheck,
    "suppressed": suppressed_limit,
    "theorem1": theorem1_consistency,
    "regimes": regime_table,
    "limit": sigma_limit,
    "burgers": burgers_example,
}


def run_all(seed=20240917, n_samples=1_000_000, only=None):
    results = []
    for key, fn in CHECKS.items():
        if only and key not in only:
            continue
        if key == "montecarlo":
            results.append(fn(n_samples=n_samples, seed=seed))
        else:
            results.append(fn())
    return results
