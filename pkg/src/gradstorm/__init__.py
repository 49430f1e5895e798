"""Conditional-mean velocity of a Langevin-perturbed inviscid Burgers fluid.

The main entry points:

* :func:`gradstorm.condmean.conditional_mean` -- u_hat(t, x) and d u_hat/dx by quadrature
* :func:`gradstorm.condmean.blowup_scan` -- slope at the origin near the critical time
* :func:`gradstorm.sde.mc_conditional_mean` -- exact Monte Carlo cross-check
* :func:`gradstorm.asymptotics.classify_regime` -- predicted blowup regime for power-law data
* :mod:`gradstorm.gaslimit` -- sigma -> 0 limit and fluid-equation residuals
"""

__version__ = "0.1.0"

from .condmean import MeanFieldSample, blowup_scan, conditional_mean, spatial_derivative
from .errors import (ConfigError, DivergentIntegral, GradstormError, LimitNotReached,
                     NonConvergent, PoleError)
from .profiles import (CustomDensity, CustomVelocity, Gaussian, Linear, NoiseModel, PowerLaw,
                       Uniform, blowup_time, parse_density, parse_velocity)

__all__ = [
    "__version__",
    "MeanFieldSample", "blowup_scan", "conditional_mean", "spatial_derivative",
    "ConfigError", "DivergentIntegral", "GradstormError", "LimitNotReached", "NonConvergent",
    "PoleError",
    "CustomDensity", "CustomVelocity", "Gaussian", "Linear", "NoiseModel", "PowerLaw", "Uniform",
    "blowup_time", "parse_density", "parse_velocity",
]
