"""Collapse of charge-1 sigma-model solitons on a radial mesh.

Evolves the radial profile f(r, t) with a stabilized flux-form stencil,
predicts the origin trajectory from the cutoff-Lagrangian speed law, and
recovers the (c, R) parameters from simulated traces by least squares.
"""

__version__ = "0.1.0"

from .errors import (
    BlowUpPassed,
    DomainError,
    ExtractionUndefinedError,
    FitFailedError,
    InsufficientDataError,
    OutOfRangeError,
    QuadratureError,
    SingularFitError,
    SlowblowError,
)
from .grid import RadialGrid, acceleration, radial_gradient, radial_laplacian
from .solver import (
    HALT_BLOWUP,
    HALT_MAX_STEPS,
    HALT_STOP,
    FieldState,
    OriginTrace,
    RunResult,
    SimConfig,
    TimeSlice,
    apply_boundaries,
    initialize,
    run,
    step,
)
from .geodesic import (
    GeodesicModel,
    collapse_integrand,
    collapse_time,
    max_time,
    predict_height,
    predict_trajectory,
    shrink_velocity,
)
from .analysis import (
    CutoffExtraction,
    HyperbolaFit,
    HyperbolaRow,
    LinearFit,
    Overlay,
    SweepRow,
    cutoff_from_line,
    default_window,
    extract_cutoff,
    first_crossing_time,
    hyperbola_fit,
    hyperbola_series,
    linear_fit,
    minus_ba_trend,
    overlay_trace,
    rinv_points,
    sweep_table,
    trace_velocity,
)

__all__ = [name for name in dir() if not name.startswith("_")]
