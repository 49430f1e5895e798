"""Exact Monte Carlo for dX = U dt, dU = sigma dW started from (X0, u0(X0)).

The pair (X_t - X0 - u0 t, U_t - u0) = (sigma int_0^t W ds, sigma W_t) is a
centred Gaussian with covariance (sigma^2 t^3/3, sigma^2 t^2/2, sigma^2 t),
so terminal states are drawn in one step with no discretization bias:

    G2 = sigma sqrt(t) Z1,   G1 = (t/2) G2 + sigma t^{3/2} / sqrt(12) Z2.

Random numbers come from Philox streams keyed by (seed, block index). Work
is split into fixed-size blocks, each block is reduced to per-bin
(count, mean, M2) and blocks are merged in index order, so the estimates are
bit-identical whatever the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import condmean, kernel
from .errors import ConfigError, EnvelopeViolation
from .profiles import (CustomDensity, DensityProfile, Gaussian, Linear, NoiseModel, PowerLaw,
                       Uniform, VelocityProfile)
from .quadrature import gauss_legendre

BLOCK_SIZE = 1 << 16
MIN_COUNT = 30
_CDF_POINTS = 1 << 16


@dataclass
class McConfig:
    """Monte Carlo run settings.

    Attributes:
        n_samples: total number of particles.
        seed: 64-bit seed; together with the block index it keys every stream.
        bandwidth: bin width in x; ``None`` picks max(sigma t^1.5 / 2, range / 200).
        L: truncation half-width for densities that cannot be normalized
            (and optional truncation for the others). ``None`` selects the default.
        workers: thread count; ``None`` reads GRADSTORM_THREADS.
        envelope: upper bound on a custom density, for rejection sampling.
    """

    n_samples: int = 1_000_000
    seed: int = 20240917
    bandwidth: float | None = None
    L: float | None = None
    workers: int | None = None
    envelope: float | None = None

    def __post_init__(self):
        if self.n_samples < 1:
            raise ConfigError("n_samples must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 unsigned bits")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ConfigError("bandwidth must be positive")
        if self.L is not None and not self.L > 0:
            raise ConfigError("L must be positive")


@dataclass
class McEstimate:
    x_center: float
    u_hat_mc: float
    std_error: float
    count_in_bin: int
    u_hat_quad: float | None = None
    status: str = "ok"

    CSV_FIELDS = ("x_center", "u_hat_mc", "std_error", "count_in_bin", "u_hat_quad", "status")

    def row(self):
        return [getattr(self, k) for k in self.CSV_FIELDS]

    def to_dict(self):
        return asdict(self)

    @property
    def within(self):
        """|mc - quad| in units of the standard error (None without a comparison)."""
        if self.u_hat_quad is None or self.status != "ok" or not self.std_error > 0:
            return None
        return abs(self.u_hat_mc - self.u_hat_quad) / self.std_error


def stream(seed, block):
    """Independent generator for block ``block`` of a run seeded with ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def sample_terminal(t, x0, u0val, sigma, rng):
    """Exact (X_t, U_t) for particles started at (x0, u0val); arrays broadcast."""
    x0 = np.asarray(x0, dtype=float)
    u0val = np.asarray(u0val, dtype=float)
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return x0.copy(), u0val.copy()
    shape = np.broadcast(x0, u0val).shape
    z = rng.standard_normal((2,) + shape)
    g2 = sigma * math.sqrt(t) * z[0]
    g1 = 0.5 * t * g2 + sigma * t**1.5 / math.sqrt(12.0) * z[1]
    return x0 + u0val * t + g1, u0val + g2


def euler_maruyama(t, x0, u0val, sigma, n_steps, rng):
    """Fine-step path simulation of the same system (test oracle, biased O(dt))."""
    x = np.array(x0, dtype=float, copy=True)
    u = np.array(u0val, dtype=float, copy=True) * np.ones_like(x)
    dt = t / n_steps
    sq = sigma * math.sqrt(dt)
    for _ in range(n_steps):
        x += u * dt
        u += sq * rng.standard_normal(x.shape)
    return x, u


class _PowerLawTable:
    """Inverse CDF of (1 + x^2)^k on [-L, L] in the variable y = asinh(x).

    In y the density becomes cosh(y)^(2k+1), smooth for every k, so a
    uniform y-grid resolves both the core and the tails.
    """

    def __init__(self, k, L):
        if L is None:
            if not k < -0.5:
                raise ConfigError("power law with k >= -1/2 needs a truncation L")
            # tail mass beyond y is ~ exp((2k+1) y); cut where it is below 1e-16
            ymax = min(700.0, 37.0 / (-(2.0 * k + 1.0)) + 2.0)
        else:
            ymax = math.asinh(L)
        self.y = np.linspace(-ymax, ymax, _CDF_POINTS + 1)
        logd = (2.0 * k + 1.0) * (np.logaddexp(self.y, -self.y) - math.log(2.0))
        dens = np.exp(logd - logd.max())
        cdf = cumulative_trapezoid(dens, self.y, initial=0.0)
        self.cdf = cdf / cdf[-1]
        self.L = L

    def sample(self, u):
        x = np.sinh(np.interp(u, self.cdf, self.y))
        if self.L is not None:
            np.clip(x, -self.L, self.L, out=x)
        return x

    def cdf_at(self, x):
        return np.interp(np.arcsinh(x), self.y, self.cdf)


def _custom_bounds(f: CustomDensity, L):
    if L is not None:
        return -L, L
    if f.bounds is not None:
        return f.bounds
    raise ConfigError("custom density needs bounds or a truncation L for sampling")


def _envelope(f: CustomDensity, lo, hi, given):
    if given is not None:
        return float(given)
    grid = np.linspace(lo, hi, 8193)
    return 1.25 * float(np.max(f.pdf(grid)))


class InitialSampler:
    """Draws X0 ~ f (truncated to [-L, L] when L is set)."""

    def __init__(self, f: DensityProfile, L=None, envelope=None):
        self.f = f
        self.L = L
        self._table = None
        if isinstance(f, Uniform):
            if L is None:
                raise ConfigError("uniform density needs a truncation L")
        elif isinstance(f, PowerLaw):
            self._table = _PowerLawTable(f.k, L)
        elif isinstance(f, CustomDensity):
            self.lo, self.hi = _custom_bounds(f, L)
            self.envelope = _envelope(f, self.lo, self.hi, envelope)
        elif not isinstance(f, Gaussian):
            raise ConfigError(f"no sampler for density {type(f).__name__}")

    def __call__(self, n, rng):
        f = self.f
        if isinstance(f, Uniform):
            return rng.uniform(-self.L, self.L, n)
        if isinstance(f, Gaussian):
            sd = 1.0 / (f.r * math.sqrt(2.0))
            if self.L is None:
                return rng.normal(0.0, sd, n)
            out = np.empty(0)
            while out.size < n:
                d = rng.normal(0.0, sd, 2 * (n - out.size) + 16)
                out = np.concatenate([out, d[np.abs(d) <= self.L]])
            return out[:n]
        if self._table is not None:
            return self._table.sample(rng.random(n))
        return self._rejection(n, rng)

    def _rejection(self, n, rng):
        out = []
        have = 0
        while have < n:
            m = 2 * (n - have) + 64
            x = rng.uniform(self.lo, self.hi, m)
            fx = self.f.pdf(x)
            if np.any(fx > self.envelope):
                raise EnvelopeViolation(
                    f"density {float(fx.max()):.6g} exceeds envelope {self.envelope:.6g}")
            keep = x[rng.random(m) * self.envelope < fx]
            out.append(keep)
            have += keep.size
        return np.concatenate(out)[:n]


def draw_initial(f: DensityProfile, L, rng, n=None, envelope=None):
    """Initial positions; a scalar when ``n`` is None."""
    draws = InitialSampler(f, L, envelope)(1 if n is None else n, rng)
    return float(draws[0]) if n is None else draws


# ---------------------------------------------------------------------------
# conditional mean by binning
# ---------------------------------------------------------------------------


def default_truncation(f: DensityProfile, v: VelocityProfile, t, x_grid):
    """Truncation half-width used when the config leaves L unset."""
    if f.normalizable:
        return None
    slope = abs(v.alpha) if isinstance(v, Linear) else 0.0
    xmax = float(np.max(np.abs(x_grid)))
    return 50.0 * max(1.0, xmax * (1.0 + slope * t))


def default_bandwidth(t, sigma, x_grid):
    span = float(np.max(x_grid) - np.min(x_grid)) if len(x_grid) > 1 else 0.0
    return max(sigma * t**1.5 / 2.0, span / 200.0)


def _block_stats(args):
    t, centers, half, f_sampler, v, sigma, seed, block, size = args
    rng = stream(seed, block)
    x0 = f_sampler(size, rng)
    x, u = sample_terminal(t, x0, v.eval(x0), sigma, rng)
    nb = centers.size
    count = np.zeros(nb)
    mean = np.zeros(nb)
    m2 = np.zeros(nb)
    # bins may overlap, so each one takes every sample inside its own window
    order = np.argsort(x, kind="stable")
    xs, us = x[order], u[order]
    lo = np.searchsorted(xs, centers - half, side="left")
    hi = np.searchsorted(xs, centers + half, side="right")
    for i in range(nb):
        if hi[i] > lo[i]:
            # restore sample-index order so the reduction order is fixed
            sel = np.sort(order[lo[i]:hi[i]])
            ub = u[sel]
            count[i] = ub.size
            mean[i] = ub.mean()
            d = ub - mean[i]
            m2[i] = float(d @ d)
    return count, mean, m2


def _merge(acc, part):
    """Chan et al. pairwise combination of (count, mean, M2)."""
    n_a, m_a, s_a = acc
    n_b, m_b, s_b = part
    n = n_a + n_b
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(n > 0, n_b / np.maximum(n, 1), 0.0)
    delta = m_b - m_a
    mean = m_a + delta * frac
    m2 = s_a + s_b + delta * delta * n_a * frac
    return n, mean, m2


def mc_conditional_mean(t, x_grid, f: DensityProfile, v: VelocityProfile, noise: NoiseModel,
                        cfg: McConfig | None = None, compare=True):
    """Bin terminal particles by position and average their velocities.

    Each x in ``x_grid`` is the centre of a bin of width ``cfg.bandwidth``.
    With ``compare`` the quadrature value averaged over the same bin with
    weight rho (the exact target of the bin mean) is attached.
    """
    cfg = cfg or McConfig()
    centers = np.sort(np.asarray(x_grid, dtype=float))
    if centers.size == 0:
        return []
    L = cfg.L if cfg.L is not None else default_truncation(f, v, t, centers)
    width = cfg.bandwidth or default_bandwidth(t, noise.sigma, centers)
    half = 0.5 * width
    sampler = InitialSampler(f, L, cfg.envelope)

    n_blocks = -(-cfg.n_samples // BLOCK_SIZE)
    jobs = []
    for b in range(n_blocks):
        size = min(BLOCK_SIZE, cfg.n_samples - b * BLOCK_SIZE)
        jobs.append((t, centers, half, sampler, v, noise.sigma, cfg.seed, b, size))
    workers = cfg.workers or condmean.worker_count()
    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(_block_stats, jobs))
    else:
        parts = [_block_stats(j) for j in jobs]

    zero = np.zeros(centers.size)
    acc = (zero, zero, zero)
    for p in parts:
        acc = _merge(acc, p)
    count, mean, m2 = acc

    out = []
    for i, xc in enumerate(centers):
        n = int(count[i])
        if n <= MIN_COUNT:
            out.append(McEstimate(float(xc), math.nan, math.nan, n, status="empty"))
            continue
        sd = math.sqrt(m2[i] / (n - 1))
        est = McEstimate(float(xc), float(mean[i]), sd / math.sqrt(n), n)
        if compare and t > 0:
            est.u_hat_quad = bin_average_mean(t, float(xc), width, f, v, noise, L)
        out.append(est)
    return out


def bin_average_mean(t, xc, width, f, v, noise, L=None, n_nodes=12):
    """int_bin rho u_hat dx / int_bin rho dx with f truncated to [-L, L] if L is set."""
    sigma = noise.sigma

    def parts(xs):
        out = np.empty((2, np.size(xs)))
        for j, x in enumerate(np.atleast_1d(xs)):
            (D, N, _, _), _, _, info = condmean._moments(t, float(x), f, v, sigma, L)
            # the moments carry a per-x shift exp(-shift); restore it so the
            # weights are comparable across the bin (common factors cancel)
            scale = math.exp(info["shift"])
            out[0, j] = D * scale
            out[1, j] = N * scale / (2.0 * t)
        return out

    lo, hi = xc - 0.5 * width, xc + 0.5 * width
    val = gauss_legendre(parts, lo, hi, n_nodes)
    return float(val[1] / val[0])


def mc_summary(estimates):
    """Fraction of reportable bins within 3 standard errors of quadrature."""
    scored = [e.within for e in estimates if e.within is not None]
    if not scored:
        return {"bins": 0, "within_3se": 0, "fraction": math.nan}
    good = sum(1 for s in scored if s < 3.0)
    return {"bins": len(scored), "within_3se": good, "fraction": good / len(scored)}


@dataclass
class MomentCheck:
    """Sample moments of exact terminal draws against the Gaussian covariance."""

    n: int
    var_x: float
    cov_xu: float
    var_u: float
    expected: dict = field(default_factory=dict)
    z_scores: dict = field(default_factory=dict)


def moment_check(t, sigma, n, seed=0):
    rng = stream(seed, 0)
    x, u = sample_terminal(t, np.zeros(n), np.zeros(n), sigma, rng)
    p = kernel.GaussianKernelParams(t, sigma)
    vx, vu, c = float(np.mean(x * x)), float(np.mean(u * u)), float(np.mean(x * u))
    # standard errors of second moments of a centred bivariate normal
    se = {
        "var_x": math.sqrt(2.0 / n) * p.var_x,
        "var_u": math.sqrt(2.0 / n) * p.var_u,
        "cov_xu": math.sqrt((p.var_x * p.var_u + p.cov_xu**2) / n),
    }
    exp = {"var_x": p.var_x, "cov_xu": p.cov_xu, "var_u": p.var_u}
    got = {"var_x": vx, "cov_xu": c, "var_u": vu}
    z = {k: (got[k] - exp[k]) / se[k] for k in exp}
    return MomentCheck(n, vx, c, vu, exp, z)
