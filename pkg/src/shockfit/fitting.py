"""Calibration of the shock models to a normalized series.

The procedure has three layers:

* ``initialize_stagewise`` peels the curve apart one term at a time
  (level, then the exponential shock, then the damped cosine), each on
  the residual of the previous stage;
* ``refine_joint`` polishes all parameters together with a projected
  Levenberg-Marquardt iteration driven by the analytic Jacobian;
* ``scan_w`` repeats both from a grid of frozen frequencies and collects
  the distinct basins, because the SSE surface in ``w`` has several.

Time is the trading-day index carried by the series (1..n by default).
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .model_core import (
    PARAM_NAMES,
    DoubleShockParams,
    Mode,
    ShockFitParams,
    TwoModeParams,
    evaluate,
)


class FitError(ValueError):
    pass


class InsufficientDataError(FitError):
    pass


class DegenerateSeriesWarning(UserWarning):
    pass


def default_w_grid() -> tuple:
    return tuple(round(0.2 * k, 10) for k in range(1, 21))  # 0.2 .. 4.0


@dataclass(frozen=True)
class FitConfig:
    """Knobs of the fitting procedure.

    ``fit_start`` is the first day index used, ``fit_horizon`` the number of
    samples from there (None means all). ``w_max`` bounds the released
    frequency; large frequencies can fit anything on daily data.
    """

    w_grid: tuple = field(default_factory=default_w_grid)
    enforce_nonneg_beta: bool = True
    enforce_nonneg_alpha: bool = False
    fit_horizon: Optional[int] = None
    fit_start: float = 1
    max_iterations: int = 400
    convergence_tol: float = 1e-10
    seed: int = 0
    restarts: int = 0
    w_max: float = 4.0
    rate_max: float = 5.0
    osc_amp_max: float = 2.0
    workers: int = 1

    def __post_init__(self):
        grid = tuple(float(w) for w in self.w_grid)
        object.__setattr__(self, "w_grid", grid)
        if self.fit_horizon is not None and self.fit_horizon < 1:
            raise FitError("fit_horizon must be positive")
        if any(not w > 0 for w in grid):
            raise FitError("w_grid values must be positive")
        if not (self.convergence_tol > 0 and self.max_iterations > 0):
            raise FitError("tolerances and iteration caps must be positive")

    def with_(self, **kw) -> "FitConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return {
            "w_grid": list(self.w_grid),
            "enforce_nonneg_beta": self.enforce_nonneg_beta,
            "enforce_nonneg_alpha": self.enforce_nonneg_alpha,
            "fit_horizon": self.fit_horizon,
            "fit_start": self.fit_start,
            "max_iterations": self.max_iterations,
            "convergence_tol": self.convergence_tol,
            "seed": self.seed,
            "restarts": self.restarts,
            "w_max": self.w_max,
            "rate_max": self.rate_max,
            "osc_amp_max": self.osc_amp_max,
        }


@dataclass(frozen=True)
class FitResult:
    params: Union[ShockFitParams, DoubleShockParams, TwoModeParams]
    sse: float
    n_points: int
    iterations: int
    converged: bool
    seed_w: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "sse": float(self.sse),
            "n_points": int(self.n_points),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "seed_w": None if self.seed_w is None else float(self.seed_w),
        }


# ---------------------------------------------------------------- data access


def series_arrays(series) -> tuple[np.ndarray, np.ndarray]:
    """(t, v) from a NormalizedSeries-like object or a plain sequence of values."""
    if isinstance(series, tuple) and len(series) == 2:
        t, v = series
        return np.asarray(t, dtype=float), np.asarray(v, dtype=float)
    if hasattr(series, "values"):
        v = np.asarray(series.values, dtype=float)
        t = getattr(series, "t", None)
        t = np.arange(1, v.size + 1, dtype=float) if t is None else np.asarray(t, dtype=float)
        return t, v
    v = np.asarray(series, dtype=float)
    return np.arange(1, v.size + 1, dtype=float), v


def select(series, horizon: Optional[int] = None, start: float = 1) -> tuple[np.ndarray, np.ndarray]:
    """Samples with t >= start, truncated to the first ``horizon`` of them."""
    t, v = series_arrays(series)
    if v.size == 0:
        raise InsufficientDataError("empty series")
    keep = t >= start
    t, v = t[keep], v[keep]
    if horizon is not None:
        if horizon > t.size:
            raise InsufficientDataError(f"horizon {horizon} exceeds the {t.size} available samples")
        t, v = t[:horizon], v[:horizon]
    if t.size == 0:
        raise InsufficientDataError("no samples at or after the fit start")
    return t, v


def _window(series, cfg: FitConfig):
    return select(series, cfg.fit_horizon, cfg.fit_start)


# ----------------------------------------------------- model values + Jacobian


def single_value_jac(x: np.ndarray, t: np.ndarray):
    A, B, a, C, b, w, ph = x
    ea = np.exp(-a * t)
    eb = np.exp(-b * t)
    arg = w * t - ph
    c, s = np.cos(arg), np.sin(arg)
    f = A + B * ea + C * eb * c
    J = np.empty((t.size, 7))
    J[:, 0] = 1.0
    J[:, 1] = ea
    J[:, 2] = -B * t * ea
    J[:, 3] = eb * c
    J[:, 4] = -C * t * eb * c
    J[:, 5] = -C * t * eb * s
    J[:, 6] = C * eb * s
    return f, J


def double_value_jac(x: np.ndarray, t: np.ndarray, t0: float):
    """Parameters: A, B, alpha, C, beta, w, phi, D, zeta, Eamp, eta."""
    f, J7 = single_value_jac(x[:7], t)
    b, w = x[4], x[5]
    D, z, E, eta = x[7:]
    s = t - t0
    on = s >= 0
    s = np.where(on, s, 0.0)
    ez = np.exp(-z * s)
    eb = np.exp(-b * s)
    arg = w * s - eta
    c, sn = np.cos(arg), np.sin(arg)
    J = np.zeros((t.size, 11))
    J[:, :7] = J7
    f = f + np.where(on, D * ez + E * eb * c, 0.0)
    J[:, 4] += np.where(on, -E * s * eb * c, 0.0)
    J[:, 5] += np.where(on, -E * s * eb * sn, 0.0)
    J[:, 7] = np.where(on, ez, 0.0)
    J[:, 8] = np.where(on, -D * s * ez, 0.0)
    J[:, 9] = np.where(on, eb * c, 0.0)
    J[:, 10] = np.where(on, E * eb * sn, 0.0)
    return f, J


def two_mode_value_jac(x: np.ndarray, t: np.ndarray):
    """Parameters: A, B, alpha, C1, beta1, w1, phi1, C2, beta2, w2, phi2."""
    f, J7 = single_value_jac(x[:7], t)
    C, b, w, ph = x[7:]
    eb = np.exp(-b * t)
    arg = w * t - ph
    c, s = np.cos(arg), np.sin(arg)
    J = np.empty((t.size, 11))
    J[:, :7] = J7
    J[:, 7] = eb * c
    J[:, 8] = -C * t * eb * c
    J[:, 9] = -C * t * eb * s
    J[:, 10] = C * eb * s
    return f + C * eb * c, J


def sse(model, series, horizon: Optional[int] = None, start: float = 1) -> float:
    """Sum of squared residuals over the selected samples.

    ``model`` is a params record or any callable of t.
    """
    t, v = select(series, horizon, start)
    pred = model(t) if callable(model) else evaluate(model, t)
    r = np.asarray(pred, dtype=float) - v
    return float(r @ r)


def sse_gradient(params: ShockFitParams, series, horizon: Optional[int] = None, start: float = 1) -> np.ndarray:
    """Analytic dSSE/dtheta in the order A, B, alpha, C, beta, w, phi."""
    t, v = select(series, horizon, start)
    f, J = single_value_jac(params.as_array(), t)
    return 2.0 * J.T @ (f - v)


# ------------------------------------------------ projected Levenberg-Marquardt


@dataclass
class _LMOutcome:
    x: np.ndarray
    sse: float
    iterations: int
    converged: bool
    history: list


def levenberg_marquardt(
    value_jac: Callable[[np.ndarray], tuple],
    y: np.ndarray,
    x0: np.ndarray,
    lower: Optional[np.ndarray] = None,
    upper: Optional[np.ndarray] = None,
    free: Optional[np.ndarray] = None,
    max_iter: int = 400,
    tol: float = 1e-10,
) -> _LMOutcome:
    """Minimize ||f(x) - y||^2 over a box by damped Gauss-Newton steps.

    Steps are clipped to the box; a coordinate sitting on a bound with the
    gradient pushing outward is frozen for that step. Only steps that lower
    the SSE are accepted, so the SSE history is non-increasing.
    """
    x = np.array(x0, dtype=float)
    n = x.size
    lower = np.full(n, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    upper = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
    free = np.ones(n, dtype=bool) if free is None else np.asarray(free, dtype=bool)
    x = np.clip(x, lower, upper)
    f, J = value_jac(x)
    r = f - y
    cur = float(r @ r)
    if not np.isfinite(cur):
        raise FitError("initial point gives a non-finite SSE")
    history = [cur]
    lam = None
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        g = J.T @ r
        H = J.T @ J
        active = free.copy()
        active &= ~((x <= lower) & (g > 0))
        active &= ~((x >= upper) & (g < 0))
        idx = np.flatnonzero(active)
        if idx.size == 0 or cur == 0.0:
            converged = True
            break
        Ha = H[np.ix_(idx, idx)]
        ga = g[idx]
        d = np.diag(Ha).copy()
        d[d <= 0] = 1e-12 * max(1.0, d.max(initial=0.0))
        if lam is None:
            lam = 1e-3
        accepted = False
        while lam < 1e16:
            try:
                step = np.linalg.solve(Ha + lam * np.diag(d), -ga)
            except np.linalg.LinAlgError:
                lam *= 4.0
                continue
            xn = x.copy()
            xn[idx] += step
            xn = np.clip(xn, lower, upper)
            with np.errstate(over="ignore", invalid="ignore"):
                fn, Jn = value_jac(xn)
                rn = fn - y
                new = float(rn @ rn)
            if np.isfinite(new) and new < cur:
                accepted = True
                break
            lam *= 4.0
        if not accepted:
            # no descent direction left at any damping: local minimum
            converged = True
            break
        rel = (cur - new) / max(cur, 1e-300)
        x, f, J, r, cur = xn, fn, Jn, rn, new
        history.append(cur)
        lam = max(lam / 5.0, 1e-12)
        if rel < tol:
            converged = True
            break
    return _LMOutcome(x=x, sse=cur, iterations=it, converged=converged, history=history)


# Internally every fit runs on tau = t - t_s, where t_s is the first fitted
# day. The model keeps its form; amplitudes become their values at t_s and
# phases absorb w * t_s. Amplitude caps are then plain box bounds.

_PAIRS_SINGLE = ((1, 2, None, None), (3, 4, 5, 6))
_PAIRS_TWO = _PAIRS_SINGLE + ((7, 8, 9, 10),)


def _shift(x: np.ndarray, ts: float, pairs, inverse: bool = False) -> np.ndarray:
    y = np.array(x, dtype=float)
    sgn = 1.0 if inverse else -1.0
    with np.errstate(over="ignore"):
        for amp, rate, w, ph in pairs:
            y[amp] = x[amp] * math.exp(sgn * x[rate] * ts)
            if w is not None:
                y[ph] = x[ph] + sgn * x[w] * ts
    return y


def _span(v: np.ndarray) -> float:
    return max(float(v.max() - v.min()), 1e-12)


def _bounds_single(cfg: FitConfig, v: np.ndarray):
    """Box in shifted coordinates: rates capped, w in (0, w_max], oscillation start amplitude capped."""
    R = cfg.rate_max
    K = cfg.osc_amp_max * _span(v)
    lo = np.array([-np.inf, -np.inf, 0.0 if cfg.enforce_nonneg_alpha else -R, -K, 0.0 if cfg.enforce_nonneg_beta else -R, 1e-6, -np.inf])
    hi = np.array([np.inf, np.inf, R, K, R, cfg.w_max, np.inf])
    return lo, hi


def _lm(vj, v, x0, lo, hi, free, cfg: FitConfig) -> _LMOutcome:
    return levenberg_marquardt(vj, v, np.clip(x0, lo, hi), lo, hi, free, cfg.max_iterations, cfg.convergence_tol)


def refine_joint(
    init: ShockFitParams,
    series,
    cfg: FitConfig = FitConfig(),
    fixed: Iterable[str] = (),
    history: Optional[list] = None,
) -> FitResult:
    """Joint local polish of the seven parameters.

    ``fixed`` names parameters held at their initial values. When
    ``history`` is a list, the accepted SSE sequence is appended to it.
    """
    x0 = init.as_array()
    if not np.all(np.isfinite(x0)):
        raise FitError("initial parameters must be finite")
    t, v = _window(series, cfg)
    ts = float(t[0])
    tau = t - ts
    lo, hi = _bounds_single(cfg, v)
    fixed = set(fixed)
    if "w" in fixed:
        # a frozen w outside the release bounds is still allowed
        lo[5], hi[5] = -np.inf, np.inf
    free = np.array([name not in fixed for name in PARAM_NAMES])
    y0 = _shift(x0, ts, _PAIRS_SINGLE)
    # frozen coordinates must not be moved by the projection either
    lo = np.where(free, lo, np.minimum(lo, y0))
    hi = np.where(free, hi, np.maximum(hi, y0))
    out = _lm(lambda y: single_value_jac(y, tau), v, y0, lo, hi, free, cfg)
    if history is not None:
        history.extend(out.history)
    x = _shift(out.x, ts, _PAIRS_SINGLE, inverse=True)
    return FitResult(ShockFitParams.from_array(x), out.sse, int(t.size), out.iterations, out.converged)


# --------------------------------------------------------------- stagewise


def _fit_exponential(tau, r, cfg: FitConfig):
    """Best (B, alpha) for r ~ B exp(-alpha tau): log grid on alpha, B linear, then polish."""
    grid = np.geomspace(1e-3, cfg.rate_max, 80)
    E = np.exp(-np.outer(grid, tau))
    num = E @ r
    den = np.einsum("ij,ij->i", E, E)
    B = num / den
    err = (r @ r) - B * num
    k = int(np.argmin(err))

    def vj(x):
        e = np.exp(-x[1] * tau)
        return x[0] * e, np.column_stack([e, -x[0] * tau * e])

    lo = np.array([-np.inf, 0.0 if cfg.enforce_nonneg_alpha else -cfg.rate_max])
    hi = np.array([np.inf, cfg.rate_max])
    return _lm(vj, r, np.array([B[k], grid[k]]), lo, hi, None, cfg).x


def _best_damped_cos(tau, r, w_values, beta_values, amp_max=np.inf):
    """Grid over (w, beta) with (C, phi) solved linearly; returns (C, beta, w, phi, err)."""
    rr = float(r @ r)
    best = (0.0, float(beta_values[0]), float(w_values[0]), 0.0, rr)
    arg = np.outer(w_values, tau)
    cos_, sin_ = np.cos(arg), np.sin(arg)
    for b in beta_values:
        eb = np.exp(-b * tau)
        X1 = cos_ * eb
        X2 = sin_ * eb
        a11 = np.einsum("ij,ij->i", X1, X1)
        a12 = np.einsum("ij,ij->i", X1, X2)
        a22 = np.einsum("ij,ij->i", X2, X2)
        b1 = X1 @ r
        b2 = X2 @ r
        det = a11 * a22 - a12 * a12
        ok = det > 1e-10 * np.maximum(a11 * a22, 1e-300)
        with np.errstate(divide="ignore", invalid="ignore"):
            ca = np.where(ok, (a22 * b1 - a12 * b2) / det, 0.0)
            cs = np.where(ok, (a11 * b2 - a12 * b1) / det, 0.0)
        amp = np.hypot(ca, cs)
        err = np.where(ok & (amp <= amp_max), rr - (ca * b1 + cs * b2), np.inf)
        k = int(np.argmin(err))
        if err[k] < best[4] - 1e-15:
            best = (float(amp[k]), float(b), float(w_values[k]), float(math.atan2(cs[k], ca[k])), float(err[k]))
    return best


def _stage_betas(cfg: FitConfig) -> np.ndarray:
    return np.linspace(0.0 if cfg.enforce_nonneg_beta else -0.2, min(1.0, cfg.rate_max), 41)


def _stage_ws(cfg: FitConfig) -> np.ndarray:
    return np.arange(0.05, cfg.w_max + 1e-9, 0.01)


def _fit_damped_cos(tau, r, cfg: FitConfig, w_fixed: Optional[float], amp_max: float):
    w_values = _stage_ws(cfg) if w_fixed is None else np.array([float(w_fixed)])
    C, b, w, ph, _ = _best_damped_cos(tau, r, w_values, _stage_betas(cfg), amp_max)

    def vj(x):
        C, b, w, ph = x
        eb = np.exp(-b * tau)
        arg = w * tau - ph
        c, s = np.cos(arg), np.sin(arg)
        return C * eb * c, np.column_stack([eb * c, -C * tau * eb * c, -C * tau * eb * s, C * eb * s])

    lo = np.array([-amp_max, 0.0 if cfg.enforce_nonneg_beta else -cfg.rate_max, 1e-6, -np.inf])
    hi = np.array([amp_max, cfg.rate_max, cfg.w_max, np.inf])
    free = np.array([True, True, w_fixed is None, True])
    if w_fixed is not None:
        lo[2], hi[2] = -np.inf, np.inf
    return _lm(vj, r, np.array([C, b, w, ph]), lo, hi, free, cfg).x


def initialize_stagewise(series, cfg: FitConfig = FitConfig(), w_fixed: Optional[float] = None) -> ShockFitParams:
    """Three sequential stages: level A, shock (B, alpha), damped cosine (C, beta, w, phi).

    Each stage is a coarse grid on its nonlinear rates with the amplitudes
    solved linearly, followed by a local polish of that stage alone.
    A constant series gives B = C = 0 and a DegenerateSeriesWarning.
    """
    t, v = _window(series, cfg)
    if t.size < 8:
        raise InsufficientDataError(f"stagewise initialization needs >= 8 samples, got {t.size}")
    ts = float(t[0])
    tau = t - ts
    # the level of a normalized series is its mean over the whole window
    A = float(np.mean(series_arrays(series)[1]))
    r1 = v - A
    scale = max(1.0, float(np.abs(v).max()))
    if float(np.abs(r1).max()) <= 1e-12 * scale:
        warnings.warn("constant series: shock and oscillation terms are undetermined", DegenerateSeriesWarning)
        return ShockFitParams(A, 0.0, 1.0, 0.0, 0.0 if cfg.enforce_nonneg_beta else 1.0, w_fixed or 1.0, 0.0)
    Bs, alpha = _fit_exponential(tau, r1, cfg)
    r2 = r1 - Bs * np.exp(-alpha * tau)
    Cs, beta, w, phis = _fit_damped_cos(tau, r2, cfg, w_fixed, cfg.osc_amp_max * _span(v))
    y = np.array([A, Bs, alpha, Cs, beta, w, phis])
    return ShockFitParams.from_array(_shift(y, ts, _PAIRS_SINGLE, inverse=True))


# ---------------------------------------------------------------- w scan


def _canonical(p: ShockFitParams) -> ShockFitParams:
    """Report C >= 0 (via the (-C, phi + pi) symmetry) and phi in [0, 2 pi)."""
    if p.C < 0:
        p = p.with_(C=-p.C, phi=p.phi + math.pi)
    return p.with_(phi=float(np.mod(p.phi, 2.0 * math.pi)))


def _scan_one(args):
    w0, series, cfg = args
    p0 = initialize_stagewise(series, cfg, w_fixed=w0)
    r1 = refine_joint(p0, series, cfg, fixed=("w",))
    r2 = refine_joint(r1.params, series, cfg)
    best = r2
    if cfg.restarts:
        rng = np.random.default_rng([cfg.seed, int(round(w0 * 1e6))])
        for _ in range(cfg.restarts):
            x = r2.params.as_array() * (1.0 + 0.05 * rng.standard_normal(7))
            x[5] = min(max(x[5], 1e-3), cfg.w_max)
            cand = refine_joint(ShockFitParams.from_array(x), series, cfg)
            if cand.sse < best.sse:
                best = cand
    return FitResult(_canonical(best.params), best.sse, best.n_points, r1.iterations + best.iterations, best.converged, w0)


def merge_basins(results: Sequence[FitResult], dw: float = 0.05, rel_sse: float = 0.01, abs_sse: float = 1e-20) -> list:
    """Sort by SSE (grid order breaks ties) and drop near-duplicates of a kept result.

    Two results are duplicates when their frequencies differ by less than
    ``dw`` and their SSEs by at most ``rel_sse`` relative (or ``abs_sse``
    absolute, which only matters for exact fits).
    """
    order = sorted(range(len(results)), key=lambda i: (results[i].sse, i))
    kept: list = []
    for i in order:
        r = results[i]
        if not any(abs(r.params.w - k.params.w) < dw and abs(r.sse - k.sse) <= max(rel_sse * k.sse, abs_sse) for k in kept):
            kept.append(r)
    return kept


def scan_w(series, cfg: FitConfig = FitConfig()) -> list:
    """Multi-start over the frequency grid; returns distinct basins ranked by SSE.

    Each grid value seeds a stagewise start with w frozen, a six-parameter
    refinement, and a final release of w. Runs that end with w on the box
    edge are dropped when any interior run exists. Results are gathered in
    grid order before ranking, so worker count never changes the output.
    """
    if len(cfg.w_grid) == 0:
        raise FitError("empty w grid")
    jobs = [(w, series, cfg) for w in cfg.w_grid]
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
            results = list(ex.map(_scan_one, jobs))
    else:
        results = [_scan_one(j) for j in jobs]
    # a frequency pinned at the box edge is a constraint artifact, not a basin
    interior = [r for r in results if 1e-6 + 1e-9 < r.params.w < cfg.w_max - 1e-9]
    return merge_basins(interior or results)


def landscape_profile(
    params: ShockFitParams,
    series,
    which: str,
    range_: tuple[float, float],
    steps: int,
    horizon: Optional[int] = None,
    start: float = 1,
) -> list:
    """SSE along one parameter with the other six frozen."""
    if which not in PARAM_NAMES:
        raise FitError(f"unknown parameter {which!r}; expected one of {', '.join(PARAM_NAMES)}")
    lo, hi = range_
    if steps < 2 or not lo < hi:
        raise FitError("need steps >= 2 and lo < hi")
    t, v = select(series, horizon, start)
    out = []
    for val in np.linspace(lo, hi, steps):
        r = evaluate(params.with_(**{which: float(val)}), t) - v
        out.append((float(val), float(r @ r)))
    return out


# ---------------------------------------------------------------- variants


@dataclass(frozen=True)
class SingleShock:
    pass


@dataclass(frozen=True)
class DoubleShock:
    t0_grid: tuple = ()


@dataclass(frozen=True)
class TwoMode:
    n_bases: int = 1


def _fit_double_at(base: ShockFitParams, t, v, t0: float, cfg: FitConfig) -> FitResult:
    """Second shock at a fixed onset: grid on zeta with amplitudes linear, then joint polish."""
    ts = float(t[0])
    tau = t - ts
    y_base = _shift(base.as_array(), ts, _PAIRS_SINGLE)
    r = v - evaluate(base, t)
    s = t - t0
    on = s >= 0
    R = cfg.rate_max
    K = cfg.osc_amp_max * _span(v)
    if on.sum() < 2:
        extra = np.array([0.0, 1.0, 0.0, 0.0])
    else:
        sp = np.where(on, s, 0.0)
        eb = np.where(on, np.exp(-base.beta * sp), 0.0)
        Xc = eb * np.cos(base.w * sp)
        Xs = eb * np.sin(base.w * sp)
        best = None
        for z in np.geomspace(1e-2, R, 40):
            X = np.column_stack([np.where(on, np.exp(-z * sp), 0.0), Xc, Xs])
            coef, *_ = np.linalg.lstsq(X, r, rcond=None)
            e = r - X @ coef
            err = float(e @ e)
            if best is None or err < best[0]:
                best = (err, z, coef)
        _, z, (D, a, b) = best
        extra = np.array([D, z, min(math.hypot(a, b), K), math.atan2(b, a)])
    lo7, hi7 = _bounds_single(cfg, v)
    lo = np.concatenate([lo7, [-np.inf, 0.0, -K, -np.inf]])
    hi = np.concatenate([hi7, [np.inf, R, K, np.inf]])
    t0s = t0 - ts

    def vj(y):
        return double_value_jac(y, tau, t0s)

    free = np.ones(11, dtype=bool)
    free[:7] = False
    y = np.concatenate([y_base, extra])
    lo_f = np.where(free, lo, np.minimum(lo, y))
    hi_f = np.where(free, hi, np.maximum(hi, y))
    y = _lm(vj, v, y, lo_f, hi_f, free, cfg).x
    out = _lm(vj, v, y, lo, hi, None, cfg)
    x = out.x.copy()
    x[:7] = _shift(out.x[:7], ts, _PAIRS_SINGLE, inverse=True)
    p = DoubleShockParams(_canonical(ShockFitParams.from_array(x[:7])), float(x[7]), float(x[8]), float(x[9]), float(x[10]), float(t0))
    return FitResult(p, out.sse, int(t.size), out.iterations, out.converged, base.w)


def _fit_two_mode_from(base: ShockFitParams, t, v, cfg: FitConfig) -> FitResult:
    """Second mode on the residual of a single-shock fit, then an eleven-parameter polish."""
    ts = float(t[0])
    tau = t - ts
    K = cfg.osc_amp_max * _span(v)
    y_base = _shift(base.as_array(), ts, _PAIRS_SINGLE)
    r = v - evaluate(base, t)
    C, b, w, ph, _ = _best_damped_cos(tau, r, _stage_ws(cfg), _stage_betas(cfg), K)
    y = np.concatenate([y_base, [C, b, w, ph]])
    lo7, hi7 = _bounds_single(cfg, v)
    lo = np.concatenate([lo7, lo7[3:]])
    hi = np.concatenate([hi7, hi7[3:]])

    def vj(y):
        return two_mode_value_jac(y, tau)

    free = np.ones(11, dtype=bool)
    free[:7] = False
    lo_f = np.where(free, lo, np.minimum(lo, y))
    hi_f = np.where(free, hi, np.maximum(hi, y))
    y = _lm(vj, v, y, lo_f, hi_f, free, cfg).x
    out = _lm(vj, v, y, lo, hi, None, cfg)
    x = _shift(out.x, ts, _PAIRS_TWO, inverse=True)
    m1 = _canonical(ShockFitParams.from_array(x[:7]))
    m2 = _canonical(ShockFitParams(0.0, 0.0, 0.0, *x[7:]))
    modes = [Mode(*(float(v) for v in (m.C, m.beta, m.w, m.phi))) for m in (m1, m2)]
    modes.sort(key=lambda m: (m.w, m.beta, m.C))
    p = TwoModeParams(m1.A, m1.B, m1.alpha, tuple(modes))
    return FitResult(p, out.sse, int(t.size), out.iterations, out.converged, base.w)


def fit_variant(series, variant=SingleShock(), cfg: FitConfig = FitConfig()) -> FitResult:
    """Fit one of the model variants and return the best result.

    SingleShock is the top basin of ``scan_w``. DoubleShock tries every onset
    in ``t0_grid`` (default: half-day steps inside the window) on top of the
    best single-shock fit. TwoMode fits a second mode on the residual of the
    best single-shock basin (or of each of the ``n_bases`` best), polishes
    all eleven parameters jointly, and orders the modes by frequency.
    """
    t, v = _window(series, cfg)
    if isinstance(variant, SingleShock):
        return scan_w(series, cfg)[0]
    if isinstance(variant, DoubleShock):
        if t.size < 12:
            raise InsufficientDataError(f"double shock needs >= 12 samples, got {t.size}")
        grid = tuple(variant.t0_grid) or tuple(float(x) for x in np.arange(t[0] + 2, t[-1] - 1, 0.5))
        base = scan_w(series, cfg)[0].params
        best = None
        for t0 in grid:
            r = _fit_double_at(base, t, v, float(t0), cfg)
            if best is None or r.sse < best.sse:
                best = r
        return best
    if isinstance(variant, TwoMode):
        if t.size < 11:
            raise InsufficientDataError(f"two-mode fit needs >= 11 samples, got {t.size}")
        best = None
        for b in scan_w(series, cfg)[: max(1, variant.n_bases)]:
            r = _fit_two_mode_from(b.params, t, v, cfg)
            if best is None or r.sse < best.sse:
                best = r
        return best
    raise FitError(f"unknown variant {variant!r}")
