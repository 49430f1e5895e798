"""Slope of u_hat at the origin near and at the critical time.

Two pieces:

* ``theorem1_slope``: the x-coefficient of u_hat at t0 = -1/beta for data
  whose characteristics do not all focus at t0, computed from the
  closed-form moment expression by independent quadrature (scipy's QUADPACK,
  not the package's own Gauss-Kronrod engine, so it can cross-check
  :mod:`gradstorm.condmean`).
* the power-law table: coefficients A1..A5 as printed for
  f = (1 + x^2)^k, u0 = alpha x, the rates B1..B4, and the regime partition
  in k.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate

from .errors import DivergentIntegral, PoleError
from .profiles import DensityProfile, Linear, VelocityProfile, separation_gap
from .special import gamma, laguerre_at_zero

LIMIT_STEP = 1e-6

SUPPRESSED = "suppressed"
ALGEBRAIC = "algebraic"
LOG_CORRECTED = "log-corrected"
LINEAR_RATE = "linear-rate"


# ---------------------------------------------------------------------------
# coefficients A1..A5
# ---------------------------------------------------------------------------


@dataclass
class CoefficientSet:
    k: float
    alpha: float
    sigma: float
    A1: float
    A2: float
    A3: float
    A4: float
    A1_bar: float
    A5: float
    limit_used: bool = False
    poles: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def _raw_coefficients(k, alpha, sigma):
    a = abs(alpha)
    cos = math.cos(math.pi * k)
    tan = math.tan(math.pi * k)
    lag1 = laguerre_at_zero(k, -k + 0.5)
    lag2 = laguerre_at_zero(0.5, k + 0.5)
    A1 = (math.pi**2 * 2.0 ** (k + 2) * sigma ** (2 * k) * (4 * k * k - 1)
          / (3.0**k * a ** (5 * k + 1) * cos) * gamma(k + 1) * lag1)
    A2 = 3.0 * math.sqrt(6.0) * (math.pi * a) ** 2.5 / (2.0 * sigma * (k + 1)) * tan * lag2
    A3 = (math.pi**2 * 2.0 ** (k + 1) * sigma ** (2 * k) * (2 * k - 1)
          / (3.0**k * a ** (5 * k + 1) * (k + 1) * (k + 2) * cos) * gamma(k + 3) * lag1)
    A4 = (math.sqrt(6.0) * math.pi**2 * a**1.5 * (2 * k + 3) * gamma(k + 3)
          / (sigma * (k + 1) * (k + 2) * gamma(k + 2.5)) * tan)
    return A1, A2, A3, A4


def singular_factors(k):
    """Names of the factors that vanish or blow up at this k."""
    out = []
    if (2 * k) == math.floor(2 * k):
        if k == math.floor(k):
            out.append("tan(pi k) = 0")
        else:
            out.append("cos(pi k) = 0")
    for name, arg in (("Gamma(k+1)", k + 1), ("Gamma(k+3)", k + 3), ("Gamma(k+5/2)", k + 2.5),
                      ("1/(k+1)", k + 1), ("1/(k+2)", k + 2)):
        if arg <= 0 and arg == math.floor(arg):
            out.append(name)
    return out


def coefficients(k, alpha, sigma, allow_limit=True) -> CoefficientSet:
    """Printed A1..A4 plus A1_bar and A5 = -A1_bar.

    At half-integer and integer k some factors sit on poles or zeros; the
    values are then taken as the average of k +- 1e-6 and ``limit_used`` is
    set.
    """
    if not alpha < 0:
        raise ValueError("coefficients need alpha < 0")
    if not sigma > 0:
        raise ValueError("coefficients need sigma > 0")
    a = abs(alpha)
    A1_bar = 4.0 * math.sqrt(6.0) * (math.pi * a) ** 1.5 / sigma
    poles = singular_factors(k)
    if poles:
        if not allow_limit:
            raise PoleError(poles[0], k)
        lo = _raw_coefficients(k - LIMIT_STEP, alpha, sigma)
        hi = _raw_coefficients(k + LIMIT_STEP, alpha, sigma)
        vals = tuple(0.5 * (p + q) for p, q in zip(lo, hi))
        return CoefficientSet(k, alpha, sigma, *vals, A1_bar, -A1_bar, True, poles)
    return CoefficientSet(k, alpha, sigma, *_raw_coefficients(k, alpha, sigma), A1_bar, -A1_bar)


def _limit_ratio(num, den, k, alpha, sigma):
    """num/den of coefficient names, with the k +- step average near singular k."""
    if singular_factors(k):
        vals = []
        for kk in (k - LIMIT_STEP, k + LIMIT_STEP):
            c = _raw_coefficients(kk, alpha, sigma)
            d = dict(zip(("A1", "A2", "A3", "A4"), c))
            vals.append(sum(d[n] for n in num) / d[den])
        return 0.5 * (vals[0] + vals[1])
    d = dict(zip(("A1", "A2", "A3", "A4"), _raw_coefficients(k, alpha, sigma)))
    return sum(d[n] for n in num) / d[den]


def b4(alpha, sigma):
    a = abs(alpha)
    return 1.5 * a - math.sqrt(6.0) * a**2.5 / (sigma * math.sqrt(math.pi))


# leading-order asymptotics of the quadrature itself, for side-by-side reporting


def leading_slope_suppressed(alpha):
    """Limit of d u_hat/dx(T+eps, 0) for k < -1: 3|alpha|/2."""
    return 1.5 * abs(alpha)


def leading_prefactor_algebraic(k, alpha, sigma):
    """C in d u_hat/dx ~ C |eps|^-(2k+2) for -1 < k < -1/2."""
    a = abs(alpha)
    weight_rate = 3.0 * a**3 / (2.0 * sigma**2)
    mass = math.sqrt(math.pi) * gamma(-k - 0.5) / gamma(-k)
    return -2.0 * a ** (-2 * k - 1) * weight_rate ** (-k - 0.5) * gamma(k + 1.5) / mass


@dataclass
class RegimeReport:
    k: float
    alpha: float
    sigma: float
    regime: str
    exponent: float | None
    predicted_rate_description: str
    B1: float | None = None
    B2: float | None = None
    B3: float | None = None
    B4: float | None = None
    A1_over_A3: float | None = None
    leading_order: dict = field(default_factory=dict)
    coefficients: dict = field(default_factory=dict)
    limit_used: bool = False

    def to_dict(self):
        return asdict(self)


def classify_regime(k, alpha, sigma) -> RegimeReport:
    """Blowup behaviour of d u_hat/dx(t, 0) as t -> T for f = (1+x^2)^k, u0 = alpha x."""
    if not alpha < 0:
        raise ValueError("classify_regime needs alpha < 0")
    coeffs = coefficients(k, alpha, sigma)
    rep = RegimeReport(k, alpha, sigma, "", None, "", coefficients=coeffs.to_dict(),
                       limit_used=coeffs.limit_used)
    rep.A1_over_A3 = _limit_ratio(("A1",), "A3", k, alpha, sigma)
    if k < -1:
        rep.regime = SUPPRESSED
        rep.exponent = 0.0
        rep.B1 = _limit_ratio(("A2",), "A4", k, alpha, sigma)
        rep.leading_order = {"limit_slope": leading_slope_suppressed(alpha)}
        rep.predicted_rate_description = "slope tends to the finite limit B1 = A2/A4"
    elif k == -1:
        rep.regime = SUPPRESSED
        rep.exponent = 0.0
        rep.B4 = b4(alpha, sigma)
        rep.predicted_rate_description = (
            "slope tends to B4 = 3|alpha|/2 - sqrt(6)|alpha|^(5/2)/(sigma sqrt(pi))")
    elif k < -0.5:
        rep.regime = ALGEBRAIC
        rep.exponent = 2 * k + 2
        rep.B2 = _limit_ratio(("A1",), "A4", k, alpha, sigma)
        rep.leading_order = {"prefactor": leading_prefactor_algebraic(k, alpha, sigma)}
        rep.predicted_rate_description = f"slope ~ B2 |eps|^-{2 * k + 2:g}"
    elif k == -0.5:
        rep.regime = LOG_CORRECTED
        rep.exponent = 1.0
        rep.leading_order = {"prefactor": 1.0}
        rep.predicted_rate_description = "slope ~ -1 / (eps ln(-eps))"
    else:
        rep.regime = LINEAR_RATE
        rep.exponent = 1.0
        rep.B3 = 2 * k + 1
        rep.leading_order = {"prefactor": 2 * k + 1}
        rep.predicted_rate_description = "slope ~ B3 / eps with B3 = 2k + 1"
    return rep


# ---------------------------------------------------------------------------
# bounded slope away from the focusing time
# ---------------------------------------------------------------------------


@dataclass
class Theorem1Slope:
    value: float
    constant_term: float
    t0: float
    separation: float | None = None  # profiles.separation_gap(v, beta); diagnostic only


def _breakpoints(beta, v, f, sigma):
    jac = abs(1.0 - float(v.deriv(np.array([0.0]))[0]) / beta)
    pts = [f.scale * m for m in (0.5, 1, 2, 4, 8, 16)]
    if jac > 1e-12:
        width = sigma / math.sqrt(3.0 * abs(beta) ** 3) / jac
        pts += [width * m for m in (0.5, 1, 2, 4, 8, 16)]
    return sorted(set(p for p in pts if 0 < p < 1e8 * f.scale))


def _check_decay(fn, scale):
    s = scale * 10.0 ** np.arange(2, 9)
    with np.errstate(over="ignore", under="ignore"):
        vals = np.array([abs(fn(si)) * si for si in s] + [abs(fn(-si)) * si for si in s])
    n = s.size
    right, left = vals[:n], vals[n:]
    for tail in (right, left):
        peak = max(tail[0], 1e-300)
        if tail[-1] > 1e-8 * peak and tail[-1] > 1e-300 and tail[-1] >= 0.5 * tail[-3]:
            raise DivergentIntegral("integrand does not decay: moment condition fails")


def _quad(fn, lo, hi, limit=200, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        with np.errstate(over="ignore", under="ignore"):
            return integrate.quad(fn, lo, hi, limit=limit, **kw)


def _line(fn, pts):
    """int over R of fn, split at +-pts and mapped to infinity beyond the last one."""
    edges = [-p for p in reversed(pts)] + [0.0] + list(pts)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += _quad(fn, lo, hi, limit=200, epsabs=0, epsrel=1e-12)[0]
    total += _quad(fn, edges[-1], np.inf, limit=400, epsabs=0, epsrel=1e-12)[0]
    total += _quad(fn, -np.inf, edges[0], limit=400, epsabs=0, epsrel=1e-12)[0]
    return total


def theorem1_slope(beta, v: VelocityProfile, f: DensityProfile, sigma) -> Theorem1Slope:
    """x-coefficient and constant term of u_hat(-1/beta, x) near x = 0.

    With weight W(s) = f(s) exp(3 beta^3 (u0(s)/beta - s)^2 / (2 sigma^2)) and
    <.> its normalized average,

        u_hat(t0, 0)      = <3 beta s - u0> / 2
        d u_hat/dx(t0, 0) = -(3 beta / (2 sigma^2)) * ( <sigma^2 - 4 beta^2 s u0
                              + 3 beta^3 s^2 + beta u0^2>
                              - beta <beta s - u0> <3 beta s - u0> ).

    The kernel equals sigma^2 + beta (beta s - u0)(3 beta s - u0), so the
    bracket is sigma^2 + beta Cov(beta s - u0, 3 beta s - u0). The product
    term vanishes for even f and odd u0, where the half-line form is used.
    """
    if not beta < 0:
        raise ValueError("theorem1_slope needs beta < 0")
    c = 3.0 * beta**3 / (2.0 * sigma**2)

    def u0(s):
        return float(v.eval(np.array([s]))[0])

    def fs(s):
        return float(f.pdf(np.array([s]))[0])

    def weight(s):
        d = u0(s) / beta - s
        return fs(s) * math.exp(c * d * d)

    def slope_kernel(s):
        u = u0(s)
        return sigma**2 - 4 * beta**2 * s * u + 3 * beta**3 * s * s + beta * u * u

    scale = max(f.scale, 1.0)
    _check_decay(lambda s: weight(s) * (1.0 + s * s), scale)
    pts = _breakpoints(beta, v, f, sigma)
    symmetric = f.even and v.odd
    if symmetric:
        def half(fn):
            total = 0.0
            edges = [0.0] + list(pts)
            for lo, hi in zip(edges[:-1], edges[1:]):
                total += _quad(fn, lo, hi, limit=200, epsabs=0, epsrel=1e-12)[0]
            total += _quad(fn, edges[-1], np.inf, limit=400, epsabs=0, epsrel=1e-12)[0]
            return total

        den = half(weight)
        num = half(lambda s: slope_kernel(s) * weight(s))
        value = -3.0 * beta / (2.0 * sigma**2) * num / den
        const = 0.0
    else:
        den = _line(weight, pts)
        m_slope = _line(lambda s: slope_kernel(s) * weight(s), pts) / den
        m_a = _line(lambda s: (beta * s - u0(s)) * weight(s), pts) / den
        m_b = _line(lambda s: (3 * beta * s - u0(s)) * weight(s), pts) / den
        value = -3.0 * beta / (2.0 * sigma**2) * (m_slope - beta * m_a * m_b)
        const = 0.5 * m_b
    if not (den > 0 and math.isfinite(value)):
        raise DivergentIntegral("weighted moments are not finite")
    sep = separation_gap(v, beta)
    return Theorem1Slope(value, const, -1.0 / beta, sep)


def lambda_linear(beta, alpha, f: DensityProfile, sigma):
    """Slope Lambda(beta) for u0 = alpha x and even f, from its own half-line form."""
    if not beta < 0:
        raise ValueError("lambda_linear needs beta < 0")
    c = 3.0 * beta * (beta - alpha) ** 2 / (2.0 * sigma**2)

    def w(s):
        return float(f.pdf(np.array([s]))[0]) * math.exp(c * s * s)

    _check_decay(lambda s: w(s) * (1.0 + s * s), max(f.scale, 1.0))
    pts = _breakpoints(beta, Linear(alpha), f, sigma)
    edges = [0.0] + pts

    def half(fn):
        tot = sum(_quad(fn, lo, hi, limit=200, epsabs=0, epsrel=1e-12)[0]
                  for lo, hi in zip(edges[:-1], edges[1:]))
        return tot + _quad(fn, edges[-1], np.inf, limit=400, epsabs=0, epsrel=1e-12)[0]

    num = half(lambda s: (sigma**2 + beta * s * s * (alpha - beta) * (alpha - 3 * beta)) * w(s))
    return -3.0 * beta / (2.0 * sigma**2) * num / half(w)
