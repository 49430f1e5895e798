"""Exception types raised by the numerical routines."""


class GradstormError(Exception):
    """Base class for all package errors."""


class ConfigError(GradstormError, ValueError):
    """Malformed profile spec, flag or config file."""


class NonConvergent(GradstormError):
    """Adaptive quadrature hit its interval budget before reaching tolerance."""

    def __init__(self, message, achieved=float("nan")):
        super().__init__(f"{message} (achieved error {achieved:.3g})")
        self.achieved = achieved


class DivergentIntegral(GradstormError):
    """An integrand does not decay in the tails, so the integral does not exist."""


class LimitNotReached(GradstormError):
    """The truncation sequence L -> infinity did not settle before L_max."""

    def __init__(self, message, last_values=()):
        super().__init__(message)
        self.last_values = tuple(last_values)


class SingularTime(GradstormError):
    """Evaluation requested exactly at a blowup time."""


class PoleError(GradstormError, ArithmeticError):
    """A Gamma / trig factor sits on a pole."""

    def __init__(self, factor, value):
        super().__init__(f"pole of {factor} at argument {value!r}")
        self.factor = factor
        self.value = value


class MultiRoot(GradstormError):
    """Characteristics have crossed: the implicit equation has no unique root."""


class EmptyBin(GradstormError):
    """A Monte Carlo bin received too few samples to report."""


class EnvelopeViolation(GradstormError):
    """Rejection sampling found the density above its declared envelope."""
