"""Time evolution of the radial soliton profile f(r, t).

Second-order leapfrog with an iterated corrector: each step starts from the
extrapolated guess 2 f(t) - f(t - dt) (first step: f + v0 dt), recomputes the
centered time derivative from the current guess, and re-solves the update a
fixed number of times.  Spatial terms depend only on f(t), so they are
evaluated once per step.

Boundary formulas: f(0) = (4 f(dr) - f(2 dr)) / 3 (evenness at the origin)
and f(r_max) = f(r_max - dr) (horizontal at the outer edge), re-applied after
every corrector pass.

Long runs go through a fused numba kernel; a pure-numpy path with identical
arithmetic is kept both as a fallback and as a cross-check target.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np

from .errors import BlowUpPassed
from .grid import RadialGrid, acceleration

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

HALT_STOP = "reached_stop_height"
HALT_MAX_STEPS = "max_steps"
HALT_BLOWUP = "blow_up_passed"

_OK, _STOP, _BLOWUP = 0, 1, 2


@dataclass(frozen=True)
class SimConfig:
    """Run parameters: initial data, mesh, stepping and halting controls."""

    f0: float
    v0: float
    dr: float = 0.01
    dt: float = 0.001
    r_max: float = 100.0
    corrector_iters: int = 4
    stop_height: float | None = None
    max_steps: int = 2_000_000
    sample_every: int = 1
    slice_times: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.f0 > 0:
            raise ValueError(f"f0 must be positive, got {self.f0}")
        if not self.dr > 0 or not self.dt > 0:
            raise ValueError("dr and dt must be positive")
        if self.dt > self.dr:
            raise ValueError(f"dt = {self.dt} exceeds dr = {self.dr}")
        if self.stop_height is None:
            object.__setattr__(self, "stop_height", 0.05 * self.f0)
        if not 0 < self.stop_height < self.f0:
            raise ValueError(f"stop_height must lie in (0, f0), got {self.stop_height}")
        if self.corrector_iters < 1:
            raise ValueError("corrector_iters must be >= 1")
        if self.max_steps < 1 or self.sample_every < 1:
            raise ValueError("max_steps and sample_every must be >= 1")
        n = int(round(self.r_max / self.dr)) + 1
        if n < 5:
            raise ValueError(f"grid has only {n} points; need >= 5")
        object.__setattr__(self, "slice_times", tuple(float(t) for t in self.slice_times))
        for t in self.slice_times:
            if not (np.isfinite(t) and t >= 0):
                raise ValueError(f"slice times must be finite and >= 0, got {t}")

    def make_grid(self) -> RadialGrid:
        return RadialGrid.from_extent(self.dr, self.r_max)


@dataclass
class FieldState:
    """Two consecutive time levels of f plus the time of the newer one."""

    f_prev: np.ndarray
    f_cur: np.ndarray
    t: float
    step_index: int


@dataclass
class OriginTrace:
    """Time series of the origin value f(0, t)."""

    t: np.ndarray
    f_origin: np.ndarray

    def __len__(self) -> int:
        return self.t.size


@dataclass
class TimeSlice:
    """Snapshot of the full profile at a fixed time."""

    t: float
    values: np.ndarray


@dataclass
class RunResult:
    config: SimConfig
    grid: RadialGrid
    trace: OriginTrace
    slices: list[TimeSlice]
    halt_reason: str
    steps: int
    final_state: FieldState = field(repr=False, default=None)


def apply_boundaries(f: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """Return a copy of f with the origin and outer-edge formulas applied."""
    if f.shape != (grid.n_points,):
        raise ValueError("field length does not match grid")
    out = f.copy()
    out[0] = (4.0 * out[1] - out[2]) / 3.0
    out[-1] = out[-2]
    return out


def initialize(cfg: SimConfig, grid: RadialGrid | None = None) -> FieldState:
    """Initial state: f = f0 at t = 0 and a virtual level at t = -dt.

    f_prev = f0 - v0 dt makes the centered time derivative at t = 0 equal v0
    exactly, and the extrapolated guess 2 f_cur - f_prev reproduces the
    first-step guess f + v0 dt.
    """
    grid = grid if grid is not None else cfg.make_grid()
    f_cur = np.full(grid.n_points, cfg.f0, dtype=np.float64)
    f_prev = np.full(grid.n_points, cfg.f0 - cfg.v0 * cfg.dt, dtype=np.float64)
    return FieldState(f_prev=f_prev, f_cur=f_cur, t=0.0, step_index=0)


def step(state: FieldState, cfg: SimConfig, grid: RadialGrid) -> FieldState:
    """One leapfrog step with the iterated corrector.

    Raises BlowUpPassed if the corrected field is non-finite.
    """
    fm, fc = state.f_prev, state.f_cur
    inv_2dt = 1.0 / (2.0 * cfg.dt)
    dt2 = cfg.dt * cfg.dt
    g = 2.0 * fc - fm
    for _ in range(cfg.corrector_iters):
        dtf = (g - fm) * inv_2dt
        acc = acceleration(fc, dtf, grid)
        g = 2.0 * fc - fm + dt2 * acc
        g = apply_boundaries(g, grid)
    if not np.all(np.isfinite(g)):
        raise BlowUpPassed(state.step_index + 1)
    return FieldState(
        f_prev=fc,
        f_cur=g,
        t=(state.step_index + 1) * cfg.dt,
        step_index=state.step_index + 1,
    )


if njit is not None:

    @njit(cache=True, nogil=True)
    def _advance_kernel(fm, fc, flux_p, flux_m, inv_r3, r, dr, dt, iters,
                        stop_height, n_steps, origin_out):
        """Advance up to n_steps; returns (steps_done, status).

        Mirrors step() arithmetic exactly, with the f(t)-only spatial terms
        hoisted out of the corrector loop.  fm/fc are updated in place to the
        last valid levels; origin_out[s] holds f(0) after each completed step.
        """
        n = fc.size
        inv_h2 = 1.0 / (dr * dr)
        inv_2h = 1.0 / (2.0 * dr)
        inv_2dt = 1.0 / (2.0 * dt)
        dt2 = dt * dt

        a = fm.copy()
        b = fc.copy()
        c = np.empty(n)
        lap = np.empty(n)
        drag = np.empty(n)
        coef = np.empty(n)
        grad2 = np.empty(n)

        done = 0
        status = _OK
        for s in range(n_steps):
            for j in range(1, n - 1):
                gj = (b[j + 1] - b[j - 1]) * inv_2h
                denom = b[j] * b[j] + r[j] * r[j]
                lap[j] = (flux_p[j] * (b[j + 1] - b[j])
                          - flux_m[j] * (b[j] - b[j - 1])) * inv_h2 * inv_r3[j]
                drag[j] = -4.0 * r[j] * gj / denom
                coef[j] = 2.0 * b[j] / denom
                grad2[j] = gj * gj
            for j in range(n):
                c[j] = 2.0 * b[j] - a[j]
            for _ in range(iters):
                for j in range(1, n - 1):
                    dti = (c[j] - a[j]) * inv_2dt
                    acc = lap[j] + (drag[j] + coef[j] * (dti * dti - grad2[j]))
                    c[j] = 2.0 * b[j] - a[j] + dt2 * acc
                c[0] = (4.0 * c[1] - c[2]) / 3.0
                c[n - 1] = c[n - 2]
            ok = True
            for j in range(n):
                if not np.isfinite(c[j]):
                    ok = False
                    break
            if not ok or c[0] <= 0.0:
                status = _BLOWUP
                break
            tmp = a
            a = b
            b = c
            c = tmp
            origin_out[s] = b[0]
            done = s + 1
            if b[0] <= stop_height:
                status = _STOP
                break

        for j in range(n):
            fm[j] = a[j]
            fc[j] = b[j]
        return done, status

else:  # pragma: no cover
    _advance_kernel = None


def _advance_numpy(fm, fc, grid, cfg, n_steps, start_step, origin_out):
    """step()-based segment driver with the same bookkeeping as the kernel."""
    state = FieldState(fm.copy(), fc.copy(), start_step * cfg.dt, start_step)
    done = 0
    status = _OK
    for i in range(n_steps):
        try:
            new = step(state, cfg, grid)
        except BlowUpPassed:
            status = _BLOWUP
            break
        if new.f_cur[0] <= 0.0:
            status = _BLOWUP
            break
        state = new
        origin_out[i] = state.f_cur[0]
        done = i + 1
        if state.f_cur[0] <= cfg.stop_height:
            status = _STOP
            break
    fm[:] = state.f_prev
    fc[:] = state.f_cur
    return done, status


def _resolve_backend(backend: str) -> str:
    if backend == "auto":
        return "numba" if _advance_kernel is not None else "numpy"
    if backend == "numba" and _advance_kernel is None:
        raise RuntimeError("numba backend requested but numba is unavailable")
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    return backend


def run(cfg: SimConfig, backend: str = "auto") -> RunResult:
    """Evolve from the initial line until stop height, max_steps, or blow-up.

    The origin is sampled every cfg.sample_every steps (plus t = 0 and the
    halting step); profiles are snapshotted at the step nearest each
    requested slice time.  Crossing the singularity is reported through
    halt_reason, never raised.
    """
    backend = _resolve_backend(backend)
    grid = cfg.make_grid()
    state = initialize(cfg, grid)
    fm = state.f_prev.copy()
    fc = state.f_cur.copy()

    slice_steps = sorted({int(round(t / cfg.dt)) for t in cfg.slice_times
                          if int(round(t / cfg.dt)) <= cfg.max_steps})
    slices: list[TimeSlice] = []
    if slice_steps and slice_steps[0] == 0:
        slices.append(TimeSlice(0.0, fc.copy()))
        slice_steps = slice_steps[1:]

    targets = list(slice_steps)
    if not targets or targets[-1] != cfg.max_steps:
        targets.append(cfg.max_steps)

    chunks: list[np.ndarray] = []
    steps = 0
    halt = None
    for target in targets:
        n_seg = target - steps
        if n_seg > 0:
            out = np.empty(n_seg, dtype=np.float64)
            if backend == "numba":
                done, status = _advance_kernel(
                    fm, fc, grid.flux_plus, grid.flux_minus, grid.inv_r3, grid.r,
                    cfg.dr, cfg.dt, cfg.corrector_iters, cfg.stop_height, n_seg, out,
                )
            else:
                done, status = _advance_numpy(fm, fc, grid, cfg, n_seg, steps, out)
            chunks.append(out[:done])
            steps += done
            if status == _BLOWUP:
                halt = HALT_BLOWUP
                break
            if status == _STOP:
                halt = HALT_STOP
                break
        if target in slice_steps:
            slices.append(TimeSlice(steps * cfg.dt, fc.copy()))
    if halt is None:
        halt = HALT_MAX_STEPS

    origin = np.concatenate(chunks) if chunks else np.empty(0)
    sample_idx = np.arange(cfg.sample_every, steps + 1, cfg.sample_every)
    ts = [0.0]
    fs = [cfg.f0]
    ts.extend(sample_idx * cfg.dt)
    fs.extend(origin[sample_idx - 1])
    if steps > 0 and steps % cfg.sample_every != 0:
        ts.append(steps * cfg.dt)
        fs.append(origin[steps - 1])
    trace = OriginTrace(np.asarray(ts), np.asarray(fs))

    final = FieldState(fm, fc, steps * cfg.dt, steps)
    return RunResult(cfg, grid, trace, slices, halt, steps, final)
