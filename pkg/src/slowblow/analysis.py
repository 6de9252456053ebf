"""Fits and parameter extraction from simulated traces and profiles.

The key chain: differentiate the origin trace, plot ln f against 1/fdot^2
(a straight line in the large-cutoff regime, slope -2/c^2 and intercept
(2 ln R - 1)/c^2), least-squares fit it, and read off

    c = sqrt(-2/m),    R = exp(-b/m + 1/2).

Also provides the per-profile hyperbola fit y = k + b sqrt(1 + r^2/a^2)
(one branch of (y-k)^2/b^2 - x^2/a^2 = 1, sign of b free) via damped
Gauss-Newton, sweep orchestration over many runs, and the overlay of the
cutoff-Lagrangian prediction against a measured trace.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    ExtractionUndefinedError,
    FitFailedError,
    InsufficientDataError,
    SingularFitError,
)
from .geodesic import GeodesicModel, max_time, predict_height
from .solver import OriginTrace, SimConfig, TimeSlice, run

WINDOW_SKIP_FRAC = 0.05          # drop the initial transient: t < 5% of the run
WINDOW_STOP_FACTOR = 1.5         # drop samples with f below 1.5 * stop_height
DEFAULT_HYPERBOLA_ITERS = 200
HYPERBOLA_STEP_TOL = 1e-10


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    rms_residual: float
    n_points: int

    def predict(self, x):
        return self.slope * np.asarray(x) + self.intercept


@dataclass(frozen=True)
class CutoffExtraction:
    """Kinetic constant and cutoff radius recovered from a collapse trace."""

    c: float
    cutoff: float
    fit: LinearFit
    window: tuple[float, float]


@dataclass
class HyperbolaFit:
    a: float
    b: float
    k: float
    rms_residual: float
    window_r: float
    history: tuple[float, ...] = ()

    @property
    def minus_b_over_a(self) -> float:
        return -self.b / self.a


def trace_velocity(trace: OriginTrace) -> tuple[np.ndarray, np.ndarray]:
    """Centered-difference df/dt at interior samples; endpoints dropped."""
    if len(trace) < 3:
        raise InsufficientDataError(
            f"need at least 3 samples to differentiate, got {len(trace)}"
        )
    t, f = trace.t, trace.f_origin
    dfdt = (f[2:] - f[:-2]) / (t[2:] - t[:-2])
    return t[1:-1], dfdt


def first_crossing_time(trace: OriginTrace, level: float) -> float:
    """Time at which f(0, t) first reaches `level`, linearly interpolated."""
    f = trace.f_origin
    below = np.nonzero(f <= level)[0]
    if below.size == 0:
        raise InsufficientDataError(f"trace never reaches level {level:g}")
    i = int(below[0])
    if i == 0:
        return float(trace.t[0])
    t0, t1 = trace.t[i - 1], trace.t[i]
    f0, f1 = f[i - 1], f[i]
    return float(t0 + (level - f0) * (t1 - t0) / (f1 - f0))


def linear_fit(x, y) -> LinearFit:
    """Ordinary least squares y = m x + b."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2 or x.size != y.size:
        raise InsufficientDataError(f"need >= 2 paired points, got {x.size}/{y.size}")
    xm = x.mean()
    ym = y.mean()
    sxx = float(((x - xm) ** 2).sum())
    if sxx <= 0.0 or not np.isfinite(sxx):
        raise SingularFitError("abscissae are all equal; slope undefined")
    m = float(((x - xm) * (y - ym)).sum() / sxx)
    b = ym - m * xm
    resid = y - (m * x + b)
    return LinearFit(m, float(b), float(np.sqrt(np.mean(resid * resid))), int(x.size))


def default_window(trace: OriginTrace, stop_height: float | None = None) -> tuple[float, float]:
    """Fit window: skip the early transient and the tail near the stop height."""
    if stop_height is None:
        stop_height = float(trace.f_origin.min())
    t_lo = WINDOW_SKIP_FRAC * float(trace.t[-1])
    keep = trace.f_origin >= WINDOW_STOP_FACTOR * stop_height
    if not keep.any():
        raise InsufficientDataError("no samples above the stop-height cut")
    t_hi = float(trace.t[keep].max())
    return t_lo, t_hi


def cutoff_from_line(slope: float, intercept: float) -> tuple[float, float]:
    """(c, R) from the fitted line y = m x + b with x = ln f, y = 1/fdot^2.

    The speed law gives y = (2 ln R - 1)/c^2 - (2/c^2) x in the large-cutoff
    regime, so m = -2/c^2 must be negative.
    """
    if slope >= 0.0:
        raise ExtractionUndefinedError(slope)
    c = math.sqrt(-2.0 / slope)
    cutoff = math.exp(-intercept / slope + 0.5)
    return c, cutoff


def extract_cutoff(trace: OriginTrace, window: tuple[float, float] | None = None,
                   stop_height: float | None = None) -> CutoffExtraction:
    """Fit (ln f, 1/fdot^2) over the window and convert slope/intercept to (c, R)."""
    if window is None:
        window = default_window(trace, stop_height)
    t_lo, t_hi = window
    t_mid, dfdt = trace_velocity(trace)
    f_mid = trace.f_origin[1:-1]
    keep = (t_mid >= t_lo) & (t_mid <= t_hi) & (dfdt != 0.0) & (f_mid > 0.0)
    if keep.sum() < 2:
        raise InsufficientDataError(
            f"window [{t_lo:g}, {t_hi:g}] leaves {int(keep.sum())} usable samples"
        )
    x = np.log(f_mid[keep])
    y = 1.0 / (dfdt[keep] ** 2)
    fit = linear_fit(x, y)
    c, cutoff = cutoff_from_line(fit.slope, fit.intercept)
    return CutoffExtraction(c=c, cutoff=cutoff, fit=fit, window=(t_lo, t_hi))


# ---------------------------------------------------------------------------
# hyperbola fits to time slices

def _hyperbola_model(params, r):
    a, b, k = params
    s = np.sqrt(1.0 + (r / a) ** 2)
    return k + b * s, s


def hyperbola_fit(r: np.ndarray, values: np.ndarray, window_r: float,
                  init: tuple[float, float, float] | None = None) -> HyperbolaFit:
    """Fit y = k + b sqrt(1 + r^2/a^2) to the profile for r <= window_r.

    Damped Gauss-Newton: full steps are halved until the residual does not
    increase; converged when the parameter update norm drops below 1e-10.
    """
    r = np.asarray(r, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    mask = r <= window_r * (1.0 + 1e-12)
    rw = r[mask]
    yw = values[mask]
    if rw.size < 10:
        raise InsufficientDataError(
            f"window r <= {window_r:g} holds {rw.size} samples; need >= 10"
        )
    if init is None:
        # a from the window scale; then (b, k), in which the model is linear,
        # from the exact least-squares solve at that a.  (The cruder guess
        # b = f(0) - f(edge) can start in the wrong-sign basin.)
        a0 = 0.5 * window_r
        s0 = np.sqrt(1.0 + (rw / a0) ** 2)
        design = np.column_stack([s0, np.ones_like(s0)])
        (b0, k0), *_ = np.linalg.lstsq(design, yw, rcond=None)
        if b0 == 0.0:
            b0 = 1e-3 * max(1.0, abs(k0))
        params = np.array([a0, b0, k0])
    else:
        params = np.array(init, dtype=np.float64)

    def sse(p):
        model, _ = _hyperbola_model(p, rw)
        e = model - yw
        return float(e @ e)

    current = sse(params)
    history = [math.sqrt(current / rw.size)]
    a_floor = 1e-12 * max(window_r, 1.0)

    def finished(p):
        a, b, k = p
        return HyperbolaFit(a=float(abs(a)), b=float(b), k=float(k),
                            rms_residual=history[-1], window_r=float(window_r),
                            history=tuple(history))

    for _ in range(DEFAULT_HYPERBOLA_ITERS):
        a, b, k = params
        model, s = _hyperbola_model(params, rw)
        e = model - yw
        J = np.empty((rw.size, 3))
        J[:, 0] = b * (-(rw * rw) / (a * a * a)) / s
        J[:, 1] = s
        J[:, 2] = 1.0
        jtj = J.T @ J
        rhs = -J.T @ e
        try:
            delta = np.linalg.solve(jtj, rhs)
        except np.linalg.LinAlgError:
            ridge = 1e-12 * np.trace(jtj)
            try:
                delta = np.linalg.solve(jtj + ridge * np.eye(3), rhs)
            except np.linalg.LinAlgError:
                raise FitFailedError("normal equations singular", tuple(params),
                                     history[-1]) from None
        if float(np.linalg.norm(delta)) <= HYPERBOLA_STEP_TOL:
            return finished(params)  # stationary point of the normal equations
        scale = 1.0
        trial = params + delta
        trial[0] = max(abs(trial[0]), a_floor)
        new = sse(trial)
        while new > current and scale > 1e-8:
            scale *= 0.5
            trial = params + scale * delta
            trial[0] = max(abs(trial[0]), a_floor)
            new = sse(trial)
        if new > current:
            # no descent left along the Gauss-Newton direction: we are at the
            # numerical floor of the objective
            return finished(params)
        params = trial
        current = new
        history.append(math.sqrt(current / rw.size))
        if float(np.linalg.norm(scale * delta)) <= HYPERBOLA_STEP_TOL:
            return finished(params)
    raise FitFailedError(
        f"no convergence in {DEFAULT_HYPERBOLA_ITERS} iterations",
        tuple(params), history[-1],
    )


@dataclass
class HyperbolaRow:
    t: float
    fit: HyperbolaFit | None
    error: str | None = None


def hyperbola_series(slices: list[TimeSlice], dr: float, window_r: float,
                     ) -> list[HyperbolaRow]:
    """Fit every slice; failures are recorded per row, not raised."""
    rows = []
    for sl in slices:
        r = np.arange(sl.values.size) * dr
        try:
            fit = hyperbola_fit(r, sl.values, window_r)
            rows.append(HyperbolaRow(t=sl.t, fit=fit))
        except (InsufficientDataError, FitFailedError) as exc:
            rows.append(HyperbolaRow(t=sl.t, fit=None, error=str(exc)))
    return rows


def minus_ba_trend(rows: list[HyperbolaRow]) -> LinearFit:
    """Line fit to the asymptote slope -b/a against slice time."""
    good = [(row.t, row.fit.minus_b_over_a) for row in rows if row.fit is not None]
    if len(good) < 2:
        raise InsufficientDataError("need >= 2 fitted slices for the trend")
    t, mba = zip(*good)
    return linear_fit(np.array(t), np.array(mba))


# ---------------------------------------------------------------------------
# sweeps

@dataclass
class SweepRow:
    config: SimConfig
    halt_reason: str | None
    extraction: CutoffExtraction | None
    trace: OriginTrace | None
    error: str | None = None


def _sweep_worker(args) -> SweepRow:
    cfg, window, backend = args
    try:
        result = run(cfg, backend=backend)
        extraction = extract_cutoff(result.trace, window=window,
                                    stop_height=cfg.stop_height)
        return SweepRow(cfg, result.halt_reason, extraction, result.trace)
    except Exception as exc:  # per-row isolation: one bad run must not kill the sweep
        return SweepRow(cfg, None, None, None, error=f"{type(exc).__name__}: {exc}")


def sweep_table(configs: list[SimConfig], jobs: int = 1,
                window: tuple[float, float] | None = None,
                backend: str = "auto") -> list[SweepRow]:
    """Run each config and extract (c, R); rows come back in input order."""
    work = [(cfg, window, backend) for cfg in configs]
    if jobs <= 1 or len(configs) <= 1:
        return [_sweep_worker(w) for w in work]
    with ProcessPoolExecutor(max_workers=min(jobs, len(configs))) as pool:
        return list(pool.map(_sweep_worker, work))


def rinv_points(rows: list[SweepRow]) -> tuple[np.ndarray, np.ndarray]:
    """(1/|v0|, R) pairs from the successful rows of a velocity sweep."""
    pairs = [(1.0 / abs(row.config.v0), row.extraction.cutoff)
             for row in rows if row.extraction is not None and row.config.v0 != 0.0]
    if not pairs:
        raise InsufficientDataError("no successful rows with v0 != 0")
    x, y = zip(*pairs)
    return np.array(x), np.array(y)


def format_sweep_text(rows: list[SweepRow]) -> str:
    """Aligned text table of the sweep results."""
    header = f"{'v0':>10} {'f0':>8} {'c':>10} {'R':>10} {'fit_rms':>12} {'status':>20}"
    lines = [header]
    for row in rows:
        cfg = row.config
        if row.extraction is not None:
            ex = row.extraction
            lines.append(f"{cfg.v0:>10.5g} {cfg.f0:>8.4g} {ex.c:>10.4g} "
                         f"{ex.cutoff:>10.4g} {ex.fit.rms_residual:>12.4g} "
                         f"{row.halt_reason:>20}")
        else:
            lines.append(f"{cfg.v0:>10.5g} {cfg.f0:>8.4g} {'-':>10} {'-':>10} "
                         f"{'-':>12} {(row.error or row.halt_reason or '-'):>20}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# prediction overlay

@dataclass
class Overlay:
    t: np.ndarray
    f_predicted: np.ndarray
    f_simulated: np.ndarray
    max_abs_gap: float


def overlay_trace(model: GeodesicModel, trace: OriginTrace,
                  t_lo: float | None = None, t_hi: float | None = None,
                  n_points: int = 201) -> Overlay:
    """Predicted vs simulated f(0, t) on an even time grid inside the window."""
    horizon = max_time(model)
    lo = 0.0 if t_lo is None else max(0.0, t_lo)
    hi = float(trace.t[-1]) if t_hi is None else t_hi
    hi = min(hi, horizon)
    if hi <= lo:
        raise InsufficientDataError(f"empty overlay window [{lo:g}, {hi:g}]")
    times = np.linspace(lo, hi, n_points)
    pred = np.array([predict_height(float(t), model, horizon) for t in times])
    sim = np.interp(times, trace.t, trace.f_origin)
    gap = float(np.max(np.abs(pred - sim)))
    return Overlay(times, pred, sim, gap)
