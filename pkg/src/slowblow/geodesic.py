"""Cutoff-Lagrangian prediction for the collapse of the origin.

Restricting the kinetic energy to a ball of radius R and holding it constant
gives a conserved speed law for the soliton height f:

    df/dt = -c / sqrt( ln(1 + R^2/f^2) - R^2/(f^2 + R^2) )

(the shrinking branch).  Integrating the reciprocal speed from f down to f0
yields the time to reach f; inverting that map by bisection yields the
predicted trajectory f(t).  The bracketed quantity is strictly positive for
all f, R > 0 because ln(1 + x) > x/(1 + x) for x > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, OutOfRangeError
from .quadrature import adaptive_simpson

QUAD_TOL = 1e-10
ROOT_TOL = 1e-9
FLOOR_FRAC = 1e-6


@dataclass(frozen=True)
class GeodesicModel:
    """Kinetic constant c, cutoff radius R, and starting height f0."""

    c: float
    cutoff: float
    f0: float

    def __post_init__(self):
        if not (self.c > 0 and self.cutoff > 0 and self.f0 > 0):
            raise ValueError("c, cutoff and f0 must all be positive")

    @property
    def f_floor(self) -> float:
        return FLOOR_FRAC * self.f0


def collapse_integrand(f: float, cutoff: float) -> float:
    """sqrt(ln(1 + R^2/f^2) - R^2/(f^2 + R^2)); the reciprocal shrink speed."""
    if not f > 0:
        raise DomainError(f"integrand requires f > 0, got {f}")
    if not cutoff > 0:
        raise DomainError(f"integrand requires cutoff > 0, got {cutoff}")
    x = (cutoff / f) ** 2
    return math.sqrt(math.log1p(x) - x / (1.0 + x))


def collapse_time(f_target: float, model: GeodesicModel) -> float:
    """Time for the origin to reach f_target, starting from f0 at t = 0."""
    if not f_target > 0:
        raise DomainError(f"f_target must be positive, got {f_target}")
    if f_target > model.f0:
        raise DomainError(f"f_target {f_target} exceeds f0 {model.f0}")
    integral = adaptive_simpson(
        lambda f: collapse_integrand(f, model.cutoff), f_target, model.f0, QUAD_TOL
    )
    return integral / model.c


def max_time(model: GeodesicModel) -> float:
    """Collapse time down to the quadrature floor; the prediction horizon."""
    return collapse_time(model.f_floor, model)


def predict_height(t: float, model: GeodesicModel, t_max: float | None = None) -> float:
    """Invert collapse_time by bisection on [f_floor, f0]."""
    if t_max is None:
        t_max = max_time(model)
    if t < 0 or t > t_max:
        raise OutOfRangeError(t, t_max)
    if t == 0.0:
        return model.f0
    lo, hi = model.f_floor, model.f0
    while hi - lo > ROOT_TOL:
        mid = 0.5 * (lo + hi)
        if collapse_time(mid, model) > t:
            lo = mid  # reached later than t: target height is above mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def predict_trajectory(model: GeodesicModel, times) -> list[tuple[float, float]]:
    """Predicted (t, f) pairs for the given times, all within the horizon."""
    t_max = max_time(model)
    return [(float(t), predict_height(float(t), model, t_max)) for t in times]


def shrink_velocity(f: float, model: GeodesicModel) -> float:
    """df/dt on the shrinking branch; negative for all f > 0."""
    return -model.c / collapse_integrand(f, model.cutoff)
