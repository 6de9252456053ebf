"""Adaptive Simpson quadrature with Richardson extrapolation."""

from __future__ import annotations

from typing import Callable

from .errors import QuadratureError


def adaptive_simpson(fn: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-10, max_depth: int = 60) -> float:
    """Integrate fn over [a, b] to absolute tolerance tol.

    Intervals split until the Simpson error estimate |S2 - S1|/15 falls below
    the (halved per split) tolerance; raises QuadratureError if the depth cap
    is hit while the estimate is still too large.
    """
    if a == b:
        return 0.0
    if a > b:
        return -adaptive_simpson(fn, b, a, tol, max_depth)
    fa, fb = fn(a), fn(b)
    m = 0.5 * (a + b)
    fm = fn(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _split(fn, a, b, fa, fm, fb, whole, tol, max_depth)


def _split(fn, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = fn(lm), fn(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth <= 0:
        raise QuadratureError(
            f"interval [{a:g}, {b:g}] not converged at depth cap; "
            f"error estimate {abs(delta) / 15.0:.3e} > tol {tol:.3e}"
        )
    return (_split(fn, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + _split(fn, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1))
