"""Unperturbed inviscid Burgers flow by characteristics.

Before shocks form, u(t, x) = u0(s) where s solves s + t u0(s) = x.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .profiles import PROBE_INTERVAL, PROBE_POINTS, Linear, VelocityProfile

N_BRACKETS = 4096


@dataclass
class CharacteristicsOutcome:
    """Result of inverting the characteristic map at one (t, x).

    ``kind`` is ``"unique"``, ``"multiroot"`` or ``"noroot"``. ``crossed``
    marks a root whose characteristic has already run through its
    neighbours (1 + t u0'(s) < 0), which happens for linear data past T
    even though the root itself is unique.
    """

    kind: str
    roots: list = field(default_factory=list)
    u: float | None = None
    crossed: bool = False

    @property
    def count(self):
        return len(self.roots)


def _max_speed(v: VelocityProfile, probe=PROBE_INTERVAL, n=PROBE_POINTS):
    grid = np.linspace(probe[0], probe[1], n)
    return float(np.max(np.abs(v.eval(grid))))


def characteristic_roots(v: VelocityProfile, t, x, n_brackets=N_BRACKETS, bracket=None):
    """All s with s + t u0(s) = x inside the search bracket."""
    if isinstance(v, Linear):
        c = 1.0 + v.alpha * t
        if c == 0.0:
            return []
        return [x / c]
    if bracket is None:
        umax = _max_speed(v)
        half = 10.0 * (1.0 + abs(x)) + 10.0 * t * umax
        bracket = (x - half, x + half)
    grid = np.linspace(bracket[0], bracket[1], n_brackets + 1)
    # the bracket scales with t max|u0|, which for fast-growing u0 makes the
    # uniform cells far wider than the root spacing near x; add a dense
    # sub-grid around x so neighbouring roots land in different cells
    near = 10.0 * (1.0 + abs(x))
    lo, hi = max(bracket[0], x - near), min(bracket[1], x + near)
    if hi > lo:
        grid = np.union1d(grid, np.linspace(lo, hi, n_brackets + 1))
    g = v.flow(grid, t) - x
    roots = []
    exact = np.flatnonzero(g == 0.0)
    roots.extend(grid[exact].tolist())
    change = np.flatnonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)

    def F(s):
        return float(v.flow(np.array([s]), t)[0] - x)

    for i in change:
        roots.append(brentq(F, grid[i], grid[i + 1], xtol=1e-14, rtol=4 * np.finfo(float).eps))
    roots.sort()
    return roots


def solve_characteristics(v: VelocityProfile, t, x, **kw) -> CharacteristicsOutcome:
    """Invert the characteristic map at (t, x)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return CharacteristicsOutcome("unique", [float(x)], float(v.eval(np.array([x]))[0]))
    roots = characteristic_roots(v, t, x, **kw)
    if not roots:
        return CharacteristicsOutcome("noroot")
    jac = 1.0 + t * v.deriv(np.asarray(roots))
    crossed = bool(np.any(jac < 0))
    if len(roots) > 1 or crossed:
        return CharacteristicsOutcome("multiroot", roots, None, crossed)
    return CharacteristicsOutcome("unique", roots, float(v.eval(np.asarray(roots))[0]))


def first_multiroot_time(v: VelocityProfile, x_grid, t_grid):
    """Earliest t in ``t_grid`` at which some x in ``x_grid`` is multi-valued."""
    for t in t_grid:
        for x in x_grid:
            if solve_characteristics(v, t, x).kind == "multiroot":
                return float(t)
    return float("inf")
