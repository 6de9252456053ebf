from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from slowblow import (
    HALT_BLOWUP,
    HALT_MAX_STEPS,
    HALT_STOP,
    BlowUpPassed,
    FieldState,
    SimConfig,
    apply_boundaries,
    initialize,
    run,
    step,
)
from oracles import reference_step


def small_cfg(**kw):
    base = dict(f0=1.0, v0=-0.01, dr=0.01, dt=0.001, r_max=1.0, max_steps=100)
    base.update(kw)
    return SimConfig(**base)


# --------------------------------------------------------------------------
# boundaries

def test_boundaries_fix_constants():
    grid = small_cfg().make_grid()
    f = np.full(grid.n_points, 3.7)
    out = apply_boundaries(f, grid)
    assert out[0] == pytest.approx(3.7, rel=1e-15)
    assert out[-1] == 3.7


def test_boundaries_exact_for_even_quadratic():
    grid = small_cfg().make_grid()
    a, b = 2.0, -0.3
    f = a + b * grid.r**2
    out = apply_boundaries(f, grid)
    assert out[0] == pytest.approx(a, rel=1e-14)


def test_boundary_arithmetic():
    grid = small_cfg().make_grid()
    f = np.zeros(grid.n_points)
    f[1], f[2] = 1.0, 0.7
    out = apply_boundaries(f, grid)
    assert out[0] == pytest.approx(1.1, rel=1e-15)
    assert out[-1] == out[-2]


def test_boundaries_do_not_touch_interior():
    grid = small_cfg().make_grid()
    f = np.sin(grid.r)
    out = apply_boundaries(f, grid)
    assert np.all(out[1:-1] == f[1:-1])


# --------------------------------------------------------------------------
# initialization

def test_initialize_zero_velocity():
    state = initialize(small_cfg(v0=0.0))
    assert np.all(state.f_prev == 1.0)
    assert np.all(state.f_cur == 1.0)
    assert state.t == 0.0


def test_initialize_virtual_level():
    state = initialize(small_cfg())
    assert_allclose(state.f_prev, 1.00001, rtol=1e-15)
    guess = 2.0 * state.f_cur - state.f_prev
    assert_allclose(guess, 0.99999, rtol=1e-15)
    # centered velocity at t = 0 equals v0 up to the ulp(f0)/(2 dt) float floor
    v = (guess - state.f_prev) / (2.0 * 0.001)
    assert_allclose(v, -0.01, atol=4 * np.finfo(float).eps / 0.002)


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(f0=-1.0, v0=0.0)
    with pytest.raises(ValueError):
        SimConfig(f0=1.0, v0=0.0, dt=0.1, dr=0.01)  # dt > dr
    with pytest.raises(ValueError):
        SimConfig(f0=1.0, v0=0.0, stop_height=2.0)
    with pytest.raises(ValueError):
        SimConfig(f0=1.0, v0=0.0, r_max=0.01, dr=0.01)  # too few points
    assert SimConfig(f0=2.0, v0=0.0).stop_height == pytest.approx(0.1)


# --------------------------------------------------------------------------
# single steps against the straight-line oracle

def test_step_constant_state_is_fixed_point():
    cfg = small_cfg(v0=0.0)
    grid = cfg.make_grid()
    state = initialize(cfg, grid)
    new = step(state, cfg, grid)
    assert np.all(new.f_cur == 1.0)
    assert new.t == pytest.approx(0.001)


def test_first_step_matches_reference():
    cfg = small_cfg(corrector_iters=4)
    grid = cfg.make_grid()
    state = initialize(cfg, grid)
    new = step(state, cfg, grid)
    expected = reference_step(list(state.f_prev), list(state.f_cur),
                              cfg.dr, cfg.dt, cfg.corrector_iters)
    assert np.max(np.abs(new.f_cur - np.array(expected))) <= 1e-13


def test_step_matches_reference_from_curved_state():
    cfg = small_cfg(corrector_iters=4)
    grid = cfg.make_grid()
    f_cur = 1.0 + 0.1 * np.exp(-grid.r**2)
    f_cur = apply_boundaries(f_cur, grid)
    f_prev = f_cur + 0.001 * np.cos(grid.r)
    f_prev = apply_boundaries(f_prev, grid)
    state = FieldState(f_prev, f_cur, t=0.0, step_index=0)
    new = step(state, cfg, grid)
    expected = reference_step(list(f_prev), list(f_cur), cfg.dr, cfg.dt,
                              cfg.corrector_iters)
    assert np.max(np.abs(new.f_cur - np.array(expected))) <= 1e-13


def test_corrector_delta_contracts():
    # difference between 3 and 4 corrector passes is the pass-4 update
    cfg3 = small_cfg(corrector_iters=3)
    cfg4 = small_cfg(corrector_iters=4)
    grid = cfg3.make_grid()
    f_cur = 1.0 + 0.05 * np.exp(-grid.r**2)
    f_cur = apply_boundaries(f_cur, grid)
    f_prev = f_cur + cfg3.v0 * cfg3.dt
    state = FieldState(f_prev, f_cur, 0.0, 0)
    g3 = step(state, cfg3, grid).f_cur
    g4 = step(state, cfg4, grid).f_cur
    assert np.max(np.abs(g4 - g3)) <= 1e-10 * cfg3.f0


def test_step_time_reversal():
    cfg = small_cfg(corrector_iters=40)
    grid = cfg.make_grid()
    f_cur = 1.0 + 0.1 * np.exp(-grid.r**2)
    f_cur = apply_boundaries(f_cur, grid)
    f_prev = apply_boundaries(f_cur + 0.001 * np.cos(grid.r), grid)
    state = FieldState(f_prev.copy(), f_cur.copy(), 0.0, 0)
    fwd = step(state, cfg, grid)
    back = step(FieldState(fwd.f_cur, fwd.f_prev, 0.0, 0), cfg, grid)
    assert np.max(np.abs(back.f_cur[1:-1] - f_prev[1:-1])) <= 1e-12


def test_step_raises_on_nonfinite():
    cfg = small_cfg()
    grid = cfg.make_grid()
    bad = np.ones(grid.n_points)
    bad[5] = np.inf
    state = FieldState(np.ones(grid.n_points), bad, 0.0, 0)
    with pytest.raises(BlowUpPassed):
        step(state, cfg, grid)


# --------------------------------------------------------------------------
# full runs

def test_stationary_run_stays_put():
    cfg = small_cfg(v0=0.0, r_max=2.0, max_steps=2000)
    result = run(cfg)
    assert result.halt_reason == HALT_MAX_STEPS
    assert np.max(np.abs(result.final_state.f_cur - cfg.f0)) <= 1e-10
    assert np.all(result.trace.f_origin == cfg.f0)


def test_collapse_run_monotone_and_halts():
    cfg = SimConfig(f0=0.5, v0=-0.05, dr=0.02, dt=0.002, r_max=4.0,
                    stop_height=0.1, max_steps=20000)
    result = run(cfg)
    assert result.halt_reason == HALT_STOP
    f = result.trace.f_origin
    skip = max(1, len(f) // 100)
    assert np.all(np.diff(f[skip:]) <= 1e-12)
    assert f[-1] <= cfg.stop_height
    # boundary relations hold on the final level
    fc = result.final_state.f_cur
    assert fc[0] == pytest.approx((4.0 * fc[1] - fc[2]) / 3.0, abs=1e-14)
    assert fc[-1] == fc[-2]


def test_blowup_detected_and_reported():
    cfg = SimConfig(f0=0.01, v0=-0.2, dr=0.01, dt=0.005, r_max=1.0,
                    stop_height=1e-6, max_steps=10000)
    result = run(cfg)
    assert result.halt_reason == HALT_BLOWUP
    assert np.all(result.trace.f_origin > 0.0)
    assert np.all(np.isfinite(result.trace.f_origin))


def test_backends_agree():
    cfg = small_cfg(max_steps=50, r_max=1.0)
    ra = run(cfg, backend="numba")
    rb = run(cfg, backend="numpy")
    assert ra.halt_reason == rb.halt_reason
    assert ra.steps == rb.steps
    assert np.max(np.abs(ra.trace.f_origin - rb.trace.f_origin)) <= 1e-13
    assert np.max(np.abs(ra.final_state.f_cur - rb.final_state.f_cur)) <= 1e-13


def test_trace_decimation_and_final_sample():
    cfg = small_cfg(max_steps=47, sample_every=10)
    result = run(cfg)
    # samples at steps 0, 10, 20, 30, 40 plus the final step 47
    assert_allclose(result.trace.t,
                    [0.0, 0.01, 0.02, 0.03, 0.04, 0.047], rtol=1e-12)


def test_slices_at_requested_times():
    cfg = small_cfg(max_steps=100, slice_times=(0.0, 0.05, 0.0751, 9.9))
    result = run(cfg)
    times = [sl.t for sl in result.slices]
    assert_allclose(times, [0.0, 0.05, 0.075], rtol=1e-12)  # 9.9 unreachable
    assert result.slices[0].values[0] == cfg.f0
    for sl in result.slices:
        assert sl.values.size == result.grid.n_points


def test_run_rejects_unknown_backend():
    with pytest.raises(ValueError):
        run(small_cfg(), backend="cuda")
