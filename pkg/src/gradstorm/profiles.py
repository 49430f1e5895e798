"""Initial data for the Langevin-perturbed Burgers fluid.

Two families of objects live here: the initial velocity ``u0(x)`` and the
initial particle density ``f(x)``. Both evaluate vectorized over numpy
arrays. Densities are stored *unnormalized* where the normalization is
irrelevant (it cancels in every conditional mean); :meth:`norm` returns
the total mass when it exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from .errors import ConfigError

ArrayFn = Callable[[np.ndarray], np.ndarray]

PROBE_INTERVAL = (-50.0, 50.0)
PROBE_POINTS = 4096


# ---------------------------------------------------------------------------
# velocity profiles
# ---------------------------------------------------------------------------


class VelocityProfile:
    """Initial velocity u0 together with its derivative."""

    odd: bool = False

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        raise NotImplementedError

    def deriv(self, x):
        raise NotImplementedError

    def flow(self, s, t):
        """Characteristic position s + t u0(s)."""
        s = np.asarray(s, dtype=float)
        return s + t * self.eval(s)

    def spec(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Linear(VelocityProfile):
    alpha: float
    odd: bool = field(default=True, init=False)

    def eval(self, x):
        return self.alpha * np.asarray(x, dtype=float)

    def deriv(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.alpha)

    def flow(self, s, t):
        # (1 + alpha t) s keeps full relative precision near the critical time
        return (1.0 + self.alpha * t) * np.asarray(s, dtype=float)

    def spec(self):
        return f"linear:{self.alpha!r}"


@dataclass(frozen=True, eq=False)
class CustomVelocity(VelocityProfile):
    """Arbitrary smooth u0 with a caller-supplied derivative.

    The derivative is not checked on construction; see
    :func:`check_derivative` for the consistency probe.
    """

    u0: ArrayFn
    du0: ArrayFn
    odd: bool = False
    name: str = "custom"

    def eval(self, x):
        return np.asarray(self.u0(np.asarray(x, dtype=float)), dtype=float)

    def deriv(self, x):
        return np.asarray(self.du0(np.asarray(x, dtype=float)), dtype=float)

    def spec(self):
        return self.name


def _sech(y):
    e = np.exp(-np.abs(y))
    return 2.0 * e / (1.0 + e * e)


def tanh_velocity(amplitude=1.0, width=1.0) -> CustomVelocity:
    """u0(x) = -amplitude * tanh(x / width): a compressive front."""
    a, w = float(amplitude), float(width)
    return CustomVelocity(
        lambda x: -a * np.tanh(x / w),
        lambda x: -a / w * _sech(x / w) ** 2,
        odd=True,
        name=f"tanh:{a!r},{w!r}",
    )


def cubic_velocity(c=-1.0) -> CustomVelocity:
    """u0(x) = c * x**3."""
    c = float(c)
    return CustomVelocity(
        lambda x: c * x**3, lambda x: 3.0 * c * x**2, odd=True, name=f"cubic:{c!r}"
    )


def constant_velocity(c) -> CustomVelocity:
    c = float(c)
    return CustomVelocity(
        lambda x: np.full_like(x, c),
        lambda x: np.zeros_like(x),
        odd=(c == 0.0),
        name=f"constant:{c!r}",
    )


def check_derivative(v: VelocityProfile, grid, rel=1e-6) -> bool:
    """True when ``v.deriv`` agrees with a central difference of ``v.eval``."""
    grid = np.asarray(grid, dtype=float)
    h = 1e-5 * np.maximum(1.0, np.abs(grid))
    fd = (v.eval(grid + h) - v.eval(grid - h)) / (2 * h)
    d = v.deriv(grid)
    scale = np.maximum(np.abs(d), np.max(np.abs(d)) * 1e-3 + 1e-300)
    return bool(np.all(np.abs(fd - d) <= rel * scale + 1e-9))


def blowup_time(v: VelocityProfile, probe=PROBE_INTERVAL, n=PROBE_POINTS) -> float:
    """Gradient catastrophe time of the unperturbed flow, -1/min u0'.

    Exact for :class:`Linear`. For custom profiles the minimum is taken on
    a uniform probe grid, so the answer depends on ``probe``.
    """
    if isinstance(v, Linear):
        return -1.0 / v.alpha if v.alpha < 0 else math.inf
    grid = np.linspace(probe[0], probe[1], n)
    m = float(np.min(v.deriv(grid)))
    return -1.0 / m if m < 0 else math.inf


def separation_gap(v: VelocityProfile, beta, probe=PROBE_INTERVAL, n=PROBE_POINTS,
                   exclude=1.0) -> float:
    """min |u0(x) - beta x| over the probe grid outside ``|x| <= exclude``.

    A diagnostic for the bounded-slope theorem's hypothesis; nothing
    is gated on it.
    """
    grid = np.linspace(probe[0], probe[1], n)
    grid = grid[np.abs(grid) > exclude]
    return float(np.min(np.abs(v.eval(grid) - beta * grid)))


# ---------------------------------------------------------------------------
# density profiles
# ---------------------------------------------------------------------------


class DensityProfile:
    """Initial particle density f(x) >= 0.

    ``scale`` is the length over which f has structure; quadrature uses it
    to place breakpoints. ``support`` is a finite interval outside which f
    is negligible (``None`` for heavy tails).
    """

    even: bool = True
    normalizable: bool = True
    scale: float = 1.0

    def __call__(self, x):
        return self.pdf(x)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def logpdf(self, x):
        raise NotImplementedError

    def norm(self) -> float:
        """Total mass of ``pdf``; infinite when not normalizable."""
        raise NotImplementedError

    def support(self):
        return None

    def spec(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Uniform(DensityProfile):
    even: bool = field(default=True, init=False)
    normalizable: bool = field(default=False, init=False)

    def logpdf(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def norm(self):
        return math.inf

    def spec(self):
        return "uniform"


@dataclass(frozen=True)
class Gaussian(DensityProfile):
    """f(x) = (r / sqrt(pi)) exp(-r^2 x^2), normalized; variance 1/(2 r^2)."""

    r: float

    even: bool = field(default=True, init=False)
    normalizable: bool = field(default=True, init=False)

    def __post_init__(self):
        if not self.r > 0:
            raise ConfigError(f"gaussian density needs r > 0, got {self.r}")

    @property
    def scale(self):
        return 1.0 / self.r

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return math.log(self.r / math.sqrt(math.pi)) - (self.r * x) ** 2

    def norm(self):
        return 1.0

    def support(self):
        half = 40.0 / self.r
        return (-half, half)

    def spec(self):
        return f"gaussian:{self.r!r}"


@dataclass(frozen=True)
class PowerLaw(DensityProfile):
    """f(x) = (1 + x^2)^k, unnormalized."""

    k: float

    even: bool = field(default=True, init=False)

    @property
    def normalizable(self):
        return self.k < -0.5

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return self.k * np.log1p(x * x)

    def norm(self):
        if not self.normalizable:
            return math.inf
        # int (1+x^2)^k dx = sqrt(pi) Gamma(-k-1/2) / Gamma(-k)
        return math.exp(
            0.5 * math.log(math.pi) + special.gammaln(-self.k - 0.5) - special.gammaln(-self.k)
        )

    def spec(self):
        return f"powerlaw:{self.k!r}"


@dataclass(frozen=True, eq=False)
class CustomDensity(DensityProfile):
    """User density; ``f`` must be vectorized and nonnegative."""

    f: ArrayFn
    even: bool = False
    normalizable: bool = True
    scale: float = 1.0
    bounds: tuple | None = None
    name: str = "custom"

    def pdf(self, x):
        return np.asarray(self.f(np.asarray(x, dtype=float)), dtype=float)

    def logpdf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.pdf(x))

    def norm(self):
        if not self.normalizable:
            return math.inf
        from scipy.integrate import quad

        lo, hi = self.bounds if self.bounds else (-np.inf, np.inf)
        return quad(lambda s: float(self.pdf(np.array([s]))[0]), lo, hi, limit=200)[0]

    def support(self):
        return self.bounds

    def spec(self):
        return self.name


@dataclass(frozen=True)
class NoiseModel:
    """Diffusion coefficient of the velocity Brownian forcing."""

    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ConfigError(f"sigma must be > 0, got {self.sigma}")


# ---------------------------------------------------------------------------
# config strings: <name>[:<param>[,<param>]]
# ---------------------------------------------------------------------------


def _split_spec(text: str):
    text = text.strip()
    name, _, rest = text.partition(":")
    params = []
    if rest:
        for tok in rest.split(","):
            try:
                params.append(float(tok))
            except ValueError:
                raise ConfigError(f"bad number {tok!r} in profile spec {text!r}") from None
    return name.strip().lower(), params


def _expect(name, params, n_min, n_max, text):
    if not n_min <= len(params) <= n_max:
        raise ConfigError(f"profile {name!r} takes {n_min}..{n_max} parameters: {text!r}")


def parse_velocity(text: str) -> VelocityProfile:
    name, p = _split_spec(text)
    if name == "linear":
        _expect(name, p, 1, 1, text)
        return Linear(p[0])
    if name == "tanh":
        _expect(name, p, 0, 2, text)
        return tanh_velocity(*p)
    if name == "cubic":
        _expect(name, p, 0, 1, text)
        return cubic_velocity(*p)
    if name == "constant":
        _expect(name, p, 1, 1, text)
        return constant_velocity(p[0])
    raise ConfigError(f"unknown velocity profile {text!r}")


def parse_density(text: str) -> DensityProfile:
    name, p = _split_spec(text)
    if name == "uniform":
        _expect(name, p, 0, 0, text)
        return Uniform()
    if name == "gaussian":
        _expect(name, p, 1, 1, text)
        return Gaussian(p[0])
    if name == "powerlaw":
        _expect(name, p, 1, 1, text)
        return PowerLaw(p[0])
    raise ConfigError(f"unknown density profile {text!r}")
