"""Exception types shared across the package."""

from __future__ import annotations


class SlowblowError(Exception):
    """Base class for errors raised by this package."""


class BlowUpPassed(SlowblowError):
    """The evolution stepped past the f = 0 singularity.

    Carries the index of the offending step; the previous time level is the
    last valid one.
    """

    def __init__(self, step_index: int, message: str | None = None):
        self.step_index = step_index
        super().__init__(message or f"singularity passed at step {step_index}")


class DomainError(SlowblowError):
    """An argument lies outside the mathematical domain of an operation."""


class OutOfRangeError(SlowblowError):
    """A requested time exceeds the reachable collapse horizon."""

    def __init__(self, t: float, t_max: float):
        self.t = t
        self.t_max = t_max
        super().__init__(f"t = {t:g} is beyond the maximum predictable time {t_max:g}")


class QuadratureError(SlowblowError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class InsufficientDataError(SlowblowError):
    """Too few samples for the requested fit or differentiation."""


class SingularFitError(SlowblowError):
    """Least-squares system is degenerate (e.g. all abscissae equal)."""


class ExtractionUndefinedError(SlowblowError):
    """The trace is not in the collapsing regime (fitted slope is not negative)."""

    def __init__(self, slope: float):
        self.slope = slope
        super().__init__(
            f"cutoff extraction undefined: fitted slope {slope:g} is not negative"
        )


class FitFailedError(SlowblowError):
    """Iterative curve fit did not converge; carries the last iterate."""

    def __init__(self, message: str, last_params=None, residual: float | None = None):
        self.last_params = last_params
        self.residual = residual
        super().__init__(message)
