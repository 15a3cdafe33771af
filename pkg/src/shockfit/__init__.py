"""Damped-oscillator shock models for index crashes: evaluation, fitting, analytics."""
from .model_core import (
    DoubleShockParams, LogPeriodicParams, Mode, ShockFitParams, Side, TwoModeParams,
    eval_double_shock, eval_log_periodic, eval_single_shock, eval_two_mode, log_periodic_time_map,
)
from .fitting import (
    DoubleShock, FitConfig, FitResult, SingleShock, TwoMode, fit_variant, initialize_stagewise,
    landscape_profile, refine_joint, scan_w, sse, sse_gradient,
)
from .io import (
    CrisisWindow, NormalizedSeries, PriceSeries, builtin_windows, extract_window, load_csv,
    load_fixture, synthesize,
)

__version__ = "0.1.0"
