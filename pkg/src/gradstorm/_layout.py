"""Breakpoint placement for integrals over initial positions s.

The Gaussian position weight exp(-3 (u0(s) t + s - x)^2 / (2 sigma^2 t^3))
peaks at the roots of s + t u0(s) = x with local width
sigma t^{3/2} / (sqrt(3) |1 + t u0'(s)|). Near the critical time that width
runs to 1e7 and more while f still has unit-scale structure near the
origin, so panels are laid out geometrically around both.
"""

from __future__ import annotations

import math

import numpy as np

from .burgers import characteristic_roots
from .errors import DivergentIntegral
from .quadrature import integrate

# exp(-y^2/2) underflows to ~1e-314 at y = 38
WINDOW = 38.0
_OFFSETS = np.array([0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, WINDOW])
_OFFSETS = np.concatenate([-_OFFSETS[:0:-1], _OFFSETS])


def weight_width(t, sigma):
    """Standard deviation of the weight in the variable s + t u0(s)."""
    return sigma * t**1.5 / math.sqrt(3.0)


def weight_peaks(t, x, v, sigma):
    """(roots, widths) of the position weight; empty when it is flat in s."""
    roots = np.asarray(characteristic_roots(v, t, x), dtype=float)
    if roots.size == 0:
        return roots, roots
    jac = np.abs(1.0 + t * v.deriv(roots))
    with np.errstate(divide="ignore"):
        widths = weight_width(t, sigma) / jac
    ok = np.isfinite(widths)
    return roots[ok], widths[ok]


def resolve_extent(t, x, v, sigma, nsd=12.0):
    """Half-width beyond which truncating f cannot change the weighted integrals."""
    roots, widths = weight_peaks(t, x, v, sigma)
    if roots.size == 0:
        return 0.0
    return float(np.max(np.abs(roots) + nsd * widths))


def build_edges(f, centers, widths, lo, hi):
    """Sorted breakpoints on [lo, hi] (either end may be infinite)."""
    pts = [np.asarray([0.0])]
    for c, w in zip(centers, widths):
        pts.append(c + w * _OFFSETS)
    fin_lo = lo if math.isfinite(lo) else None
    fin_hi = hi if math.isfinite(hi) else None
    reach = max(abs(p).max() for p in pts)
    for b in (fin_lo, fin_hi):
        if b is not None:
            reach = max(reach, abs(b))
    scale = f.scale
    geo = scale * 2.0 ** np.arange(-2, 2 + max(0, math.ceil(math.log2(max(reach, scale) / scale))))
    pts.append(geo)
    pts.append(-geo)
    e = np.concatenate(pts)
    if fin_lo is not None:
        e = np.append(e, fin_lo)
    if fin_hi is not None:
        e = np.append(e, fin_hi)
    e = e[(e >= lo) & (e <= hi)]
    e = np.unique(e)
    return e


def window(t, x, f, v, sigma, L=None, extra=()):
    """Integration interval and panel edges for the position integrals.

    Returns ``(edges, left_tail, right_tail)``; tails are set when the
    integrand must be followed to infinity.
    """
    roots, widths = weight_peaks(t, x, v, sigma)
    centers = list(roots)
    ws = list(widths)
    for c, w in extra:
        centers.append(c)
        ws.append(w)
    if roots.size:
        lo = float(np.min(roots - WINDOW * widths))
        hi = float(np.max(roots + WINDOW * widths))
    else:
        lo, hi = -math.inf, math.inf
    if L is not None:
        lo, hi = max(lo, -L), min(hi, L)
    sup = f.support()
    if sup is not None:
        nlo, nhi = max(lo, sup[0]), min(hi, sup[1])
        if nlo < nhi:
            lo, hi = nlo, nhi
    if not lo < hi:
        raise DivergentIntegral("empty integration window")
    left_tail = not math.isfinite(lo)
    right_tail = not math.isfinite(hi)
    if (left_tail or right_tail) and not f.normalizable:
        raise DivergentIntegral(
            "position weight is flat and the density is not normalizable; "
            "use the truncated (renormalized) path"
        )
    edges = build_edges(f, centers, ws, lo, hi)
    if left_tail or right_tail:
        reach = max(8.0 * f.scale, float(np.max(np.abs(edges))) if edges.size else 0.0)
        edges = edges[np.abs(edges) <= reach]
        edges = np.unique(np.concatenate([edges, [-reach, reach]]))
    return edges, left_tail, right_tail


def _tail_rate(fn, r, direction):
    s = direction * abs(r) * 10.0 ** np.arange(1, 9)
    vals = np.max(np.abs(np.atleast_2d(fn(s))), axis=0) * np.abs(s)
    with np.errstate(divide="ignore"):
        logv = np.log(vals)
    if not np.all(np.isfinite(logv[-3:])):
        return -np.inf
    return float(np.polyfit(np.log(np.abs(s[-4:])), logv[-4:], 1)[0])


def integrate_line(fn, edges, left_tail=False, right_tail=False, epsrel=1e-11, **kw):
    """Integrate over the panels plus optional tails mapped by s = R e^y."""
    res = integrate(fn, edges, epsrel=epsrel, **kw)
    value, error, l1 = res.value, res.error, res.l1
    n_evals = res.n_evals
    for flag, r, direction in ((left_tail, edges[0], -1.0), (right_tail, edges[-1], 1.0)):
        if not flag:
            continue
        rate = _tail_rate(fn, r, direction)
        if rate > -1e-3:
            raise DivergentIntegral(f"integrand tail decays too slowly (|s|^{rate:+.3f} * ds)")
        ymax = min(700.0, 40.0 / -rate) if math.isfinite(rate) else 60.0
        ymax = min(ymax, 700.0 - math.log(abs(r)))
        R = abs(r)

        def mapped(y, _d=direction, _R=R):
            s = _d * _R * np.exp(y)
            return np.atleast_2d(fn(s)) * np.abs(s)

        ys = np.unique(np.concatenate([np.linspace(0, min(ymax, 10), 11), np.linspace(0, ymax, 25)]))
        t = integrate(mapped, ys, epsrel=epsrel, **kw)
        value = value + t.value
        error = error + t.error
        l1 = l1 + t.l1
        n_evals += t.n_evals
    return value, error, l1, n_evals
