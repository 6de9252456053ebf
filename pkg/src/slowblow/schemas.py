"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

from .solver import SimConfig


class GridModel(BaseModel):
    dr: float
    n_points: int
    r_max: float


class TraceModel(BaseModel):
    t: list[float]
    f_origin: list[float]

    @model_validator(mode="after")
    def _lengths_match(self):
        if len(self.t) != len(self.f_origin):
            raise ValueError("t and f_origin must have equal length")
        return self


class SliceModel(BaseModel):
    t: float
    values: list[float]


class LinearFitModel(BaseModel):
    slope: float
    intercept: float
    rms_residual: float
    n_points: int


class RunRequest(BaseModel):
    f0: float = Field(gt=0)
    v0: float
    dr: float = Field(0.01, gt=0)
    dt: float = Field(0.001, gt=0)
    r_max: float = Field(100.0, gt=0)
    corrector_iters: int = Field(4, ge=1)
    stop_height: Optional[float] = Field(None, gt=0)
    max_steps: int = Field(2_000_000, ge=1)
    sample_every: int = Field(1, ge=1)
    slice_times: list[float] = []
    backend: Literal["auto", "numba", "numpy"] = "auto"

    def to_config(self) -> SimConfig:
        return SimConfig(
            f0=self.f0, v0=self.v0, dr=self.dr, dt=self.dt, r_max=self.r_max,
            corrector_iters=self.corrector_iters, stop_height=self.stop_height,
            max_steps=self.max_steps, sample_every=self.sample_every,
            slice_times=tuple(self.slice_times),
        )


class RunResponse(BaseModel):
    halt_reason: str
    steps: int
    stop_height: float
    grid: GridModel
    trace: TraceModel
    slices: list[SliceModel]


class PredictedPoint(BaseModel):
    t: float
    f: Optional[float] = None
    error: Optional[str] = None


class OverlayModel(BaseModel):
    t: list[float]
    f_predicted: list[float]
    f_simulated: list[float]
    max_abs_gap: float


class PredictRequest(BaseModel):
    c: float = Field(gt=0)
    cutoff: float = Field(gt=0)
    f0: float = Field(gt=0)
    times: Optional[list[float]] = None
    num_points: Optional[int] = Field(None, ge=2)
    t_max: Optional[float] = Field(None, gt=0)
    compare: Optional[TraceModel] = None
    compare_points: int = Field(201, ge=2)
    window_lo: Optional[float] = None
    window_hi: Optional[float] = None

    @model_validator(mode="after")
    def _times_or_count(self):
        if self.times is None and self.num_points is None:
            raise ValueError("provide either times or num_points")
        return self


class PredictResponse(BaseModel):
    horizon: float
    points: list[PredictedPoint]
    overlay: Optional[OverlayModel] = None


class ExtractRequest(BaseModel):
    trace: TraceModel
    t_lo: Optional[float] = None
    t_hi: Optional[float] = None
    stop_height: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _window_pairing(self):
        if (self.t_lo is None) != (self.t_hi is None):
            raise ValueError("t_lo and t_hi must be given together")
        return self


class ExtractResponse(BaseModel):
    c: float
    cutoff: float
    slope: float
    intercept: float
    rms_residual: float
    n_points: int
    window_lo: float
    window_hi: float


class HyperbolaRequest(BaseModel):
    dr: float = Field(gt=0)
    slices: list[SliceModel]
    window_r: Optional[float] = Field(None, gt=0)
    f0: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _window_resolvable(self):
        if self.window_r is None and self.f0 is None:
            raise ValueError("provide window_r or f0 (window defaults to 2 f0)")
        return self


class HyperbolaRowModel(BaseModel):
    t: float
    a: Optional[float] = None
    b: Optional[float] = None
    k: Optional[float] = None
    minus_b_over_a: Optional[float] = None
    rms_residual: Optional[float] = None
    error: Optional[str] = None


class HyperbolaResponse(BaseModel):
    window_r: float
    rows: list[HyperbolaRowModel]
    trend: Optional[LinearFitModel] = None


class SweepRequest(BaseModel):
    vary: Literal["v0", "f0"]
    values: list[float] = Field(min_length=1)
    f0: Optional[float] = Field(None, gt=0)
    v0: Optional[float] = None
    dr: float = Field(0.01, gt=0)
    dt: float = Field(0.001, gt=0)
    r_max: float = Field(100.0, gt=0)
    corrector_iters: int = Field(4, ge=1)
    stop_height: Optional[float] = Field(None, gt=0)
    max_steps: int = Field(2_000_000, ge=1)
    sample_every: int = Field(1, ge=1)
    jobs: int = Field(1, ge=1)
    rmax_scale: Literal["fixed", "sqrt_f0"] = "fixed"
    backend: Literal["auto", "numba", "numpy"] = "auto"
    include_traces: bool = True
    t_lo: Optional[float] = None
    t_hi: Optional[float] = None

    @model_validator(mode="after")
    def _fixed_parameter_present(self):
        if self.vary == "v0" and self.f0 is None:
            raise ValueError("sweeping v0 requires the fixed f0")
        if self.vary == "f0" and self.v0 is None:
            raise ValueError("sweeping f0 requires the fixed v0")
        if (self.t_lo is None) != (self.t_hi is None):
            raise ValueError("t_lo and t_hi must be given together")
        return self


class SweepRowModel(BaseModel):
    f0: float
    v0: float
    dr: float
    dt: float
    r_max: float
    stop_height: float
    halt_reason: Optional[str] = None
    c: Optional[float] = None
    cutoff: Optional[float] = None
    fit_slope: Optional[float] = None
    fit_intercept: Optional[float] = None
    fit_rms: Optional[float] = None
    window_lo: Optional[float] = None
    window_hi: Optional[float] = None
    error: Optional[str] = None
    trace: Optional[TraceModel] = None


class RinvModel(BaseModel):
    inv_abs_v0: list[float]
    cutoff: list[float]
    fit: LinearFitModel


class SweepResponse(BaseModel):
    rows: list[SweepRowModel]
    rinv: Optional[RinvModel] = None
