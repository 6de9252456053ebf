"""FastAPI service exposing runs, predictions, fits and sweeps.

All numerics live in the core modules; handlers translate between the wire
models and library calls and map library errors onto HTTP status codes with
machine-readable `code` fields.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, HTTPException

from . import __version__, analysis, geodesic
from .errors import (
    DomainError,
    ExtractionUndefinedError,
    FitFailedError,
    InsufficientDataError,
    OutOfRangeError,
    QuadratureError,
    SingularFitError,
)
from .schemas import (
    ExtractRequest,
    ExtractResponse,
    GridModel,
    HyperbolaRequest,
    HyperbolaResponse,
    HyperbolaRowModel,
    LinearFitModel,
    OverlayModel,
    PredictedPoint,
    PredictRequest,
    PredictResponse,
    RinvModel,
    RunRequest,
    RunResponse,
    SliceModel,
    SweepRequest,
    SweepResponse,
    SweepRowModel,
    TraceModel,
)
from .solver import OriginTrace, SimConfig, run

app = FastAPI(title="slowblow", version=__version__)


def _bad_request(code: str, exc: Exception, status: int = 400):
    return HTTPException(status_code=status,
                         detail={"code": code, "message": str(exc)})


def _trace_from_model(model: TraceModel) -> OriginTrace:
    return OriginTrace(np.asarray(model.t, dtype=float),
                       np.asarray(model.f_origin, dtype=float))


def _fit_model(fit: analysis.LinearFit) -> LinearFitModel:
    return LinearFitModel(slope=fit.slope, intercept=fit.intercept,
                          rms_residual=fit.rms_residual, n_points=fit.n_points)


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/run", response_model=RunResponse)
def run_endpoint(req: RunRequest) -> RunResponse:
    try:
        cfg = req.to_config()
    except ValueError as exc:
        raise _bad_request("invalid_config", exc) from exc
    result = run(cfg, backend=req.backend)
    return RunResponse(
        halt_reason=result.halt_reason,
        steps=result.steps,
        stop_height=cfg.stop_height,
        grid=GridModel(dr=result.grid.dr, n_points=result.grid.n_points,
                       r_max=result.grid.r_max),
        trace=TraceModel(t=result.trace.t.tolist(),
                         f_origin=result.trace.f_origin.tolist()),
        slices=[SliceModel(t=sl.t, values=sl.values.tolist())
                for sl in result.slices],
    )


@app.post("/predict", response_model=PredictResponse)
def predict_endpoint(req: PredictRequest) -> PredictResponse:
    model = geodesic.GeodesicModel(c=req.c, cutoff=req.cutoff, f0=req.f0)
    try:
        horizon = geodesic.max_time(model)
    except QuadratureError as exc:
        raise _bad_request("quadrature_failed", exc, status=500) from exc

    if req.times is not None:
        times = [float(t) for t in req.times]
    else:
        hi = req.t_max if req.t_max is not None else geodesic.collapse_time(
            0.05 * req.f0, model)
        hi = min(hi, horizon)
        times = np.linspace(0.0, hi, req.num_points).tolist()

    points: list[PredictedPoint] = []
    for t in times:
        try:
            f = geodesic.predict_height(t, model, horizon)
            points.append(PredictedPoint(t=t, f=f))
        except (OutOfRangeError, DomainError) as exc:
            points.append(PredictedPoint(t=t, error=str(exc)))

    overlay = None
    if req.compare is not None:
        trace = _trace_from_model(req.compare)
        try:
            ov = analysis.overlay_trace(model, trace, t_lo=req.window_lo,
                                        t_hi=req.window_hi,
                                        n_points=req.compare_points)
        except InsufficientDataError as exc:
            raise _bad_request("insufficient_data", exc) from exc
        overlay = OverlayModel(t=ov.t.tolist(), f_predicted=ov.f_predicted.tolist(),
                               f_simulated=ov.f_simulated.tolist(),
                               max_abs_gap=ov.max_abs_gap)
    return PredictResponse(horizon=horizon, points=points, overlay=overlay)


@app.post("/fit/extract", response_model=ExtractResponse)
def extract_endpoint(req: ExtractRequest) -> ExtractResponse:
    trace = _trace_from_model(req.trace)
    window = (req.t_lo, req.t_hi) if req.t_lo is not None else None
    try:
        ex = analysis.extract_cutoff(trace, window=window,
                                     stop_height=req.stop_height)
    except ExtractionUndefinedError as exc:
        raise _bad_request("extraction_undefined", exc, status=409) from exc
    except (InsufficientDataError, SingularFitError) as exc:
        raise _bad_request("insufficient_data", exc) from exc
    return ExtractResponse(
        c=ex.c, cutoff=ex.cutoff, slope=ex.fit.slope, intercept=ex.fit.intercept,
        rms_residual=ex.fit.rms_residual, n_points=ex.fit.n_points,
        window_lo=ex.window[0], window_hi=ex.window[1],
    )


@app.post("/fit/hyperbola", response_model=HyperbolaResponse)
def hyperbola_endpoint(req: HyperbolaRequest) -> HyperbolaResponse:
    window_r = req.window_r if req.window_r is not None else 2.0 * req.f0
    slices = [analysis.TimeSlice(sl.t, np.asarray(sl.values, dtype=float))
              for sl in req.slices]
    rows = analysis.hyperbola_series(slices, dr=req.dr, window_r=window_r)
    out = []
    for row in rows:
        if row.fit is None:
            out.append(HyperbolaRowModel(t=row.t, error=row.error))
        else:
            out.append(HyperbolaRowModel(
                t=row.t, a=row.fit.a, b=row.fit.b, k=row.fit.k,
                minus_b_over_a=row.fit.minus_b_over_a,
                rms_residual=row.fit.rms_residual,
            ))
    trend = None
    if sum(1 for row in rows if row.fit is not None) >= 2:
        trend = _fit_model(analysis.minus_ba_trend(rows))
    return HyperbolaResponse(window_r=window_r, rows=out, trend=trend)


@app.post("/sweep", response_model=SweepResponse)
def sweep_endpoint(req: SweepRequest) -> SweepResponse:
    configs = []
    errors = {}
    for i, value in enumerate(req.values):
        f0 = req.f0 if req.vary == "v0" else float(value)
        v0 = float(value) if req.vary == "v0" else req.v0
        r_max = req.r_max
        if req.rmax_scale == "sqrt_f0":
            r_max = req.r_max * math.sqrt(f0)
        try:
            configs.append(SimConfig(
                f0=f0, v0=v0, dr=req.dr, dt=req.dt, r_max=r_max,
                corrector_iters=req.corrector_iters, stop_height=req.stop_height,
                max_steps=req.max_steps, sample_every=req.sample_every,
            ))
        except ValueError as exc:
            errors[i] = f"invalid config: {exc}"
            configs.append(None)

    window = (req.t_lo, req.t_hi) if req.t_lo is not None else None
    valid = [cfg for cfg in configs if cfg is not None]
    results = analysis.sweep_table(valid, jobs=req.jobs, window=window,
                                   backend=req.backend)
    results_iter = iter(results)

    rows = []
    table_rows = []
    for i, cfg in enumerate(configs):
        if cfg is None:
            f0 = req.f0 if req.vary == "v0" else float(req.values[i])
            v0 = float(req.values[i]) if req.vary == "v0" else req.v0
            rows.append(SweepRowModel(
                f0=f0, v0=v0, dr=req.dr, dt=req.dt, r_max=req.r_max,
                stop_height=req.stop_height or 0.0, error=errors[i],
            ))
            continue
        res = next(results_iter)
        table_rows.append(res)
        trace = None
        if req.include_traces and res.trace is not None:
            trace = TraceModel(t=res.trace.t.tolist(),
                               f_origin=res.trace.f_origin.tolist())
        base = dict(f0=cfg.f0, v0=cfg.v0, dr=cfg.dr, dt=cfg.dt, r_max=cfg.r_max,
                    stop_height=cfg.stop_height, halt_reason=res.halt_reason,
                    error=res.error, trace=trace)
        if res.extraction is not None:
            ex = res.extraction
            base.update(c=ex.c, cutoff=ex.cutoff, fit_slope=ex.fit.slope,
                        fit_intercept=ex.fit.intercept,
                        fit_rms=ex.fit.rms_residual,
                        window_lo=ex.window[0], window_hi=ex.window[1])
        rows.append(SweepRowModel(**base))

    rinv = None
    if req.vary == "v0":
        try:
            x, y = analysis.rinv_points(table_rows)
            rinv = RinvModel(inv_abs_v0=x.tolist(), cutoff=y.tolist(),
                             fit=_fit_model(analysis.linear_fit(x, y)))
        except (InsufficientDataError, SingularFitError):
            rinv = None
    return SweepResponse(rows=rows, rinv=rinv)
