"""Independent reference implementations used only by the tests.

These are deliberately plain, loop-based transcriptions of the update rules
and quadrature, kept free of any imports from the package under test so the
two routes cannot share a bug.
"""

from __future__ import annotations

import math


def reference_step(f_prev, f_cur, dr, dt, iters):
    """One leapfrog step, written straight from the update formulas.

    Guess g = 2 f(t) - f(t-dt); then `iters` times: fdot = (g - f_prev)/(2 dt),
    g_j = 2 f_j - fprev_j + dt^2 * rhs_j(f, fdot) on interior points, origin
    g_0 = (4 g_1 - g_2)/3, outer g_{n-1} = g_{n-2}.  Returns the new level as
    a plain list.
    """
    n = len(f_cur)
    g = [2.0 * f_cur[j] - f_prev[j] for j in range(n)]
    for _ in range(iters):
        fdot = [(g[j] - f_prev[j]) / (2.0 * dt) for j in range(n)]
        new = list(g)
        for j in range(1, n - 1):
            r = j * dr
            lap = (
                (r + dr / 2.0) ** 3 * (f_cur[j + 1] - f_cur[j]) / dr
                - (r - dr / 2.0) ** 3 * (f_cur[j] - f_cur[j - 1]) / dr
            ) / dr / r**3
            grad = (f_cur[j + 1] - f_cur[j - 1]) / (2.0 * dr)
            denom = f_cur[j] ** 2 + r**2
            rhs = (
                lap
                - 4.0 * r * grad / denom
                + (2.0 * f_cur[j] / denom) * (fdot[j] ** 2 - grad**2)
            )
            new[j] = 2.0 * f_cur[j] - f_prev[j] + dt * dt * rhs
        new[0] = (4.0 * new[1] - new[2]) / 3.0
        new[-1] = new[-2]
        g = new
    return g


def simpson_composite(fn, a, b, panels):
    """Composite Simpson rule with `panels` panels (must be even)."""
    assert panels % 2 == 0
    h = (b - a) / panels
    total = fn(a) + fn(b)
    for i in range(1, panels):
        total += (4.0 if i % 2 else 2.0) * fn(a + i * h)
    return total * h / 3.0


def bracket_exact(f, cutoff):
    """ln(1 + R^2/f^2) - R^2/(f^2 + R^2), written without log1p."""
    x = (cutoff / f) ** 2
    return math.log(1.0 + x) - x / (1.0 + x)
