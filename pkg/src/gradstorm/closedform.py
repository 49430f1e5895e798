"""Exact conditional means for linear initial velocity u0 = alpha x.

All formulas are scalar; in n dimensions each applies componentwise with
|x|^2 replacing x^2 in the Gaussian density, so the 1-D forms suffice.
"""

from __future__ import annotations

from .errors import SingularTime


def burgers_linear(alpha, t, x):
    """Inviscid Burgers solution alpha x / (1 + alpha t)."""
    den = 1.0 + alpha * t
    if den == 0.0:
        raise SingularTime(f"1 + alpha t = 0 at t = {t}")
    return alpha * x / den


def burgers_linear_slope(alpha, t):
    return burgers_linear(alpha, t, 1.0)


def uniform_mean(alpha, t, x, sigma=None):
    """Conditional mean for a uniform initial density.

    Identical to :func:`burgers_linear`; ``sigma`` is accepted and ignored
    because the noise drops out of the ratio exactly.
    """
    return burgers_linear(alpha, t, x)


def gaussian_slope(alpha, r, sigma, t):
    """d u_hat/dx for f = (r/sqrt(pi)) exp(-r^2 x^2); u_hat is linear in x.

    The denominator 3 (alpha t + 1)^2 + 2 r^2 sigma^2 t^3 is positive for t > 0.
    """
    rs2 = (r * sigma) ** 2
    c = alpha * t + 1.0
    return 3.0 * (alpha * c + rs2 * t * t) / (3.0 * c * c + 2.0 * rs2 * t**3)


def gaussian_mean(alpha, r, sigma, t, x):
    if not (r > 0 and sigma > 0 and t >= 0):
        raise ValueError("gaussian_mean needs r > 0, sigma > 0, t >= 0")
    return gaussian_slope(alpha, r, sigma, t) * x


def gaussian_gap(alpha, r, sigma, t, x):
    """gaussian_mean - burgers_linear, evaluated without cancellation.

    Subtracting the two fractions over a common denominator gives
        x r^2 sigma^2 t^2 (3 + alpha t) / ((1 + alpha t)(3 (1 + alpha t)^2 + 2 r^2 sigma^2 t^3)).
    """
    rs2 = (r * sigma) ** 2
    c = alpha * t + 1.0
    if c == 0.0:
        raise SingularTime("Burgers reference is singular at the critical time")
    return x * rs2 * t * t * (3.0 + alpha * t) / (c * (3.0 * c * c + 2.0 * rs2 * t**3))
