from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from slowblow import (
    BlowUpPassed,
    RadialGrid,
    acceleration,
    radial_gradient,
    radial_laplacian,
)


@pytest.fixture
def grid():
    return RadialGrid.from_extent(dr=0.1, r_max=2.0)


def test_grid_extent_invariant(grid):
    assert grid.n_points == 21
    assert grid.r_max == (grid.n_points - 1) * grid.dr
    assert_allclose(grid.r[10], 1.0, rtol=1e-15)


def test_grid_validation():
    with pytest.raises(ValueError):
        RadialGrid(dr=-0.1, n_points=10)
    with pytest.raises(ValueError):
        RadialGrid(dr=0.1, n_points=4)


def test_length_mismatch_rejected(grid):
    short = np.zeros(grid.n_points - 1)
    with pytest.raises(ValueError):
        radial_laplacian(short, grid)
    with pytest.raises(ValueError):
        radial_gradient(short, grid)


@given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
def test_constant_fields_are_annihilated(c):
    grid = RadialGrid.from_extent(dr=0.1, r_max=1.0)
    f = np.full(grid.n_points, c)
    assert np.all(radial_laplacian(f, grid) == 0.0)
    assert np.all(radial_gradient(f, grid) == 0.0)
    if c != 0.0:  # rhs denominator needs f != 0 or r != 0; holds everywhere here
        assert np.all(acceleration(f, np.zeros_like(f), grid) == 0.0)


def test_laplacian_quadratic_exact_expansion(grid):
    # stencil on f = r^2 equals 8 + 2 h^2 / r^2 identically (sympy expansion)
    f = grid.r**2
    out = radial_laplacian(f, grid)
    assert_allclose(out[10], 8.02, rtol=1e-13)
    assert_allclose(out[1:-1], 8.0 + 2.0 * grid.dr**2 / grid.r[1:-1] ** 2, rtol=1e-11)


def test_laplacian_linear_exact_expansion(grid):
    # stencil on f = r equals 3/r + h^2/(4 r^3) identically
    f = grid.r.copy()
    out = radial_laplacian(f, grid)
    assert_allclose(out[10], 3.0025, rtol=1e-13)
    assert_allclose(out[1:-1], 3.0 / grid.r[1:-1] + grid.dr**2 / (4.0 * grid.r[1:-1] ** 3),
                    rtol=1e-11)


def test_gradient_exact_on_linear(grid):
    out = radial_gradient(grid.r.copy(), grid)
    assert_allclose(out[1:-1], 1.0, rtol=0, atol=5e-15)


def test_gradient_cubic_expansion(grid):
    # ((r+h)^3 - (r-h)^3) / 2h = 3 r^2 + h^2
    out = radial_gradient(grid.r**3, grid)
    assert_allclose(out[10], 3.01, rtol=1e-13)


def test_boundary_entries_zero(grid):
    f = np.sin(grid.r)
    for op in (radial_laplacian, radial_gradient):
        out = op(f, grid)
        assert out[0] == 0.0 and out[-1] == 0.0


@pytest.mark.parametrize("func,exact", [
    (lambda r: r**2, lambda r: 8.0 + 0.0 * r),
    (lambda r: r**3, lambda r: 15.0 * r),
    (np.sin, lambda r: -np.sin(r) + 3.0 * np.cos(r) / r),
])
def test_laplacian_second_order_convergence(func, exact):
    errs = []
    for dr in (0.1, 0.05, 0.025, 0.0125):
        grid = RadialGrid.from_extent(dr=dr, r_max=2.0)
        j = int(round(1.0 / dr))
        out = radial_laplacian(func(grid.r), grid)
        errs.append(abs(out[j] - exact(grid.r[j])))
    rates = [np.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
    assert min(rates) > 1.8
    assert max(rates) < 2.2


def test_flux_sum_telescopes_to_boundary(grid):
    # sum_j r_j^3 (Lf)_j dr collapses to the two end fluxes
    rng = np.random.default_rng(7)
    f = np.cos(grid.r) + 0.1 * rng.standard_normal(grid.n_points)
    out = radial_laplacian(f, grid)
    total = float(np.sum(grid.r[1:-1] ** 3 * out[1:-1] * grid.dr))
    h = grid.dr
    flux_hi = grid.flux_plus[-2] * (f[-1] - f[-2]) / h
    flux_lo = grid.flux_minus[1] * (f[1] - f[0]) / h
    expected = flux_hi - flux_lo
    scale = max(1.0, np.max(np.abs(grid.r[1:-1] ** 3 * out[1:-1] * grid.dr)))
    assert abs(total - expected) <= 200 * np.finfo(float).eps * scale * grid.n_points


def test_acceleration_static_line_is_static(grid):
    f = np.full(grid.n_points, 2.5)
    out = acceleration(f, np.zeros_like(f), grid)
    assert np.all(out == 0.0)


def test_acceleration_velocity_source_term(grid):
    # flat f = 1 moving at fdot = 0.01: rhs = 2 f fdot^2/(f^2+r^2) = 1e-4 at r = 1
    f = np.ones(grid.n_points)
    dtf = np.full(grid.n_points, 0.01)
    out = acceleration(f, dtf, grid)
    assert_allclose(out[10], 1.0e-4, rtol=1e-12)


def test_acceleration_rejects_nonfinite(grid):
    f = np.ones(grid.n_points)
    bad = f.copy()
    bad[3] = np.nan
    with pytest.raises(BlowUpPassed):
        acceleration(bad, np.zeros_like(f), grid)
    with pytest.raises(BlowUpPassed):
        acceleration(f, bad, grid)
