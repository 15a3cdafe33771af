"""Command-line entry point.

Inputs are either ``date,close`` CSV files or bundled fixtures written as
``fixture:<name>``. ``fit``, ``scan-w``, ``corr``, ``mapback`` and
``ode-check`` print JSON; ``curve``, ``synth``, ``returns``, ``logdensity``
and ``profile`` print two-column TSV. ``--out`` writes the same text
atomically instead of printing it.

Exit codes: 0 success, 2 input error, 3 numerical error, 4 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings

import numpy as np

from . import __version__
from .analytics import AnalyticsError, ConvergenceError, log_density_histogram, log_returns, summarize
from .fitting import (
    DoubleShock, FitConfig, FitError, InsufficientDataError, SingleShock, TwoMode,
    fit_variant, landscape_profile, scan_w,
)
from .io import (
    InputError, NormalizedSeries, PriceSeries, atomic_write_text, extract_window, fixture_names,
    load_csv, load_fixture, load_fixture_prices, load_histogram_returns, parse_window, synthesize,
)
from .mapback import (
    DegeneratePhaseError, MassError, capitalization_mass, inverse_volatility_mass, map_back, read_cap_table,
)
from .market_dynamics import (
    InvalidParameterError, MarketDynamicsParams, OscillatorCoeffs, ResonanceError, classify_solution,
    closed_form_solution, derive_coefficients, discriminant, integrate_ode, shock_response_b,
)
from .model_core import DomainError, ShockFitParams, evaluate, params_from_dict

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_USAGE = 0, 2, 3, 4


class UsageError(Exception):
    pass


class NumericalError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- helpers


def _fmt(x) -> str:
    return repr(float(x))


def _dump_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _tsv(header, rows) -> str:
    lines = ["\t".join(header)]
    lines += ["\t".join(c if isinstance(c, str) else _fmt(c) for c in row) for row in rows]
    return "\n".join(lines) + "\n"


def _emit(text: str, out) -> None:
    if out:
        atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _range(spec: str, what: str) -> tuple:
    try:
        parts = [float(x) for x in spec.split(":")]
    except ValueError:
        raise UsageError(f"bad {what} {spec!r}") from None
    return tuple(parts)


def _w_grid(spec: str) -> tuple:
    parts = _range(spec, "--w-grid")
    if len(parts) != 3 or not (parts[0] > 0 and parts[1] >= parts[0] and parts[2] > 0):
        raise UsageError("--w-grid expects lo:hi:step with 0 < lo <= hi and step > 0")
    lo, hi, step = parts
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return tuple(round(lo + i * step, 12) for i in range(n))


def _is_fixture(src: str) -> bool:
    return src.startswith("fixture:")


def _fixture(src: str) -> str:
    name = src.split(":", 1)[1]
    if name not in fixture_names():
        raise InputError(f"unknown fixture {name!r}; available: {', '.join(fixture_names())}")
    return name


def _load_series(src: str, window) -> NormalizedSeries:
    """Normalized series from a CSV (window optional) or a bundled fixture."""
    if _is_fixture(src):
        name = _fixture(src)
        try:
            return load_fixture(name)
        except InputError:
            t, c = load_fixture_prices(name)
            return NormalizedSeries(name, c / c.mean(), t, mean_used=float(c.mean()))
    prices = load_csv(src)
    if window:
        return extract_window(prices, parse_window(window))
    if len(prices) < 8:
        raise InputError(f"{src}: need at least 8 trading days, got {len(prices)}")
    mean = float(prices.closes.mean())
    return NormalizedSeries(prices.label, prices.closes / mean, window=(prices.dates[0], prices.dates[-1]),
                            mean_used=mean, meta={"dates": prices.dates})


def _load_prices(src: str, window=None) -> PriceSeries:
    if _is_fixture(src):
        name = _fixture(src)
        t, c = load_fixture_prices(name)
        return PriceSeries(name, tuple(float(x) for x in t), c)
    p = load_csv(src)
    if window:
        w = parse_window(window)
        keep = [i for i, d in enumerate(p.dates) if w.start <= d <= w.end]
        if len(keep) < 2:
            raise InputError(f"{src}: fewer than two trading days inside window {w.name}")
        p = PriceSeries(p.label, tuple(p.dates[i] for i in keep), p.closes[keep])
    return p


def _read_json_arg(s: str):
    """Inline JSON or a path to a JSON file."""
    s = s.strip()
    if s.startswith("{") or s.startswith("["):
        text, where = s, "inline JSON"
    else:
        try:
            with open(s, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise InputError(f"cannot read {s}: {e.strerror}") from None
        where = s
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{where}: invalid JSON ({e.msg} at line {e.lineno})") from None


def _params(d):
    if isinstance(d, dict) and "params" in d and isinstance(d["params"], dict):
        d = d["params"]
    try:
        return params_from_dict(d)
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"incomplete model parameters: {e}") from None


def _config(a) -> FitConfig:
    kw = dict(
        fit_horizon=a.horizon,
        fit_start=a.start,
        enforce_nonneg_beta=not a.allow_negative_beta,
        seed=a.seed,
        restarts=a.restarts,
    )
    if a.w_grid:
        kw["w_grid"] = _w_grid(a.w_grid)
    try:
        return FitConfig(**kw)
    except FitError as e:
        raise UsageError(str(e)) from None


def _provenance(a, series: NormalizedSeries, cfg: FitConfig) -> dict:
    win = series.window
    return {
        "input": a.input,
        "label": series.label,
        "window": None if win is None else [str(win[0]), str(win[1])],
        "window_arg": getattr(a, "window", None),
        "n_samples": len(series),
        "mean_used": float(series.mean_used),
        "config": cfg.to_dict(),
        "version": __version__,
    }


# ---------------------------------------------------------------- commands


def cmd_fit(a) -> str:
    series = _load_series(a.input, a.window)
    cfg = _config(a)
    if a.variant == "single":
        variant = SingleShock()
    elif a.variant == "double":
        variant = DoubleShock(tuple(np.arange(*_range(a.t0_grid, "--t0-grid"))) if a.t0_grid else ())
    else:
        variant = TwoMode()
    res = fit_variant(series, variant, cfg)
    doc = res.to_dict()
    doc["variant"] = a.variant
    doc["provenance"] = _provenance(a, series, cfg)
    return _dump_json(doc)


def cmd_scan(a) -> str:
    series = _load_series(a.input, a.window)
    cfg = _config(a)
    basins = scan_w(series, cfg)
    doc = {"basins": [b.to_dict() for b in basins], "provenance": _provenance(a, series, cfg)}
    return _dump_json(doc)


def cmd_profile(a) -> str:
    series = _load_series(a.input, a.window)
    if a.params:
        p = _params(_read_json_arg(a.params))
    else:
        p = scan_w(series, _config(a))[0].params
    if not isinstance(p, ShockFitParams):
        raise InputError("profile works on single-shock parameters")
    lo_hi = _range(a.range, "--range")
    if len(lo_hi) != 2:
        raise UsageError("--range expects lo:hi")
    rows = landscape_profile(p, series, a.param, lo_hi, a.steps, a.horizon, a.start)
    return _tsv([a.param, "sse"], rows)


def cmd_curve(a) -> str:
    p = _params(_read_json_arg(a.params))
    lo, hi = a.t_from, a.t_to
    if not (hi > lo and a.step > 0):
        raise UsageError("need --to > --from and --step > 0")
    t = lo + a.step * np.arange(int(math.floor((hi - lo) / a.step + 1e-9)) + 1)
    return _tsv(["t", "value"], zip(t, evaluate(p, t)))


def cmd_synth(a) -> str:
    p = _params(_read_json_arg(a.params))
    s = synthesize(p, a.n, a.sigma, a.seed)
    return _tsv(["t", "value"], zip(s.t, s.values))


def cmd_returns(a) -> str:
    r = log_returns(_load_prices(a.input, a.window))
    return _tsv(["date", "return"], ((str(i), v) for i, v in zip(r.index, r.values)))


def cmd_logdensity(a) -> str:
    if a.input == "fixture:sp500_logdensity_bins":
        x = load_histogram_returns(bin_width=a.bin)
    else:
        x = log_returns(_load_prices(a.input, a.window)).values
    h = log_density_histogram(x, a.bin)
    return _tsv(["left_edge", "log_density"], h.bars)


def cmd_corr(a) -> str:
    if len(a.inputs) < 2:
        raise UsageError("corr needs at least two inputs")
    rs = [log_returns(_load_prices(src, a.window)) for src in a.inputs]
    s = summarize(rs)
    doc = {
        "labels": list(s.labels),
        "matrix": [[float(x) for x in row] for row in s.matrix],
        "avg_offdiag": s.avg_offdiag,
        "lambda_max": s.lambda_max,
        "n_obs": s.n_obs,
        "provenance": {"inputs": list(a.inputs), "window_arg": a.window, "version": __version__},
    }
    return _dump_json(doc)


def cmd_mapback(a) -> str:
    doc = _read_json_arg(a.fit)
    p = _params(doc)
    if not isinstance(p, ShockFitParams):
        raise InputError("mapback needs single-shock parameters")
    label = a.market
    if label is None and isinstance(doc, dict):
        label = (doc.get("provenance") or {}).get("label")
    method, _, arg = a.mass.partition(":")
    if method == "value":
        try:
            m = float(arg)
        except ValueError:
            raise UsageError(f"bad mass value {arg!r}") from None
        source = {"method": "value"}
    elif method == "cap":
        if not arg:
            raise UsageError("--mass cap:<table> needs a table path")
        try:
            caps = read_cap_table(arg)
        except OSError as e:
            raise InputError(f"cannot read {arg}: {e.strerror}") from None
        ma = capitalization_mass(caps, a.reference)
        if label not in ma.masses:
            raise InputError(f"market {label!r} not in capitalization table")
        m = ma.masses[label]
        source = {"method": "cap", "table": arg, "reference": a.reference}
    elif method == "invvol":
        if not (a.market_csv and a.reference_csv):
            raise UsageError("--mass invvol needs --market-csv and --reference-csv")
        r_mkt = log_returns(_load_prices(a.market_csv, a.window))
        r_ref = log_returns(_load_prices(a.reference_csv, a.window))
        m = inverse_volatility_mass({"market": r_mkt, "reference": r_ref}, "reference").masses["market"]
        source = {"method": "invvol", "market_csv": a.market_csv, "reference_csv": a.reference_csv}
    else:
        raise UsageError("--mass must be cap:<table>, invvol or value:<m>")
    mc = map_back(p, m, a.p0)
    return _dump_json({"market": label, "mass": source, "coefficients": mc.to_dict(), "version": __version__})


def _coeffs(d) -> OscillatorCoeffs:
    try:
        if "lam" in d:
            keys = ("lam",) + tuple(f"alpha{i}" for i in range(4)) + tuple(f"beta{i}" for i in range(4))
            mp = MarketDynamicsParams(*(float(d[k]) for k in keys))
            return derive_coefficients(mp, (float(d.get("delta", 0.0)), float(d.get("shock_alpha", 0.0))))
        return OscillatorCoeffs(float(d["m"]), float(d["gamma"]), float(d["k"]), float(d["Pstar"]),
                                float(d.get("delta", 0.0)), float(d.get("shock_alpha", 0.0)))
    except (KeyError, TypeError) as e:
        raise InputError(f"incomplete coefficients: {e}") from None


def cmd_ode_check(a) -> str:
    c = _coeffs(_read_json_arg(a.coeffs))
    if not c.m > 0:
        raise InputError("m must be positive")
    n = int(round(a.days / a.dt))
    if n < 1:
        raise UsageError("--days must exceed --dt")
    curve = closed_form_solution(c, (a.p0, a.v0))
    traj = integrate_ode(c, (a.p0, a.v0), a.dt, n)
    diff = float(np.max(np.abs(curve(traj.t) - traj.P)))
    if not math.isfinite(diff) or diff > a.tol:
        raise NumericalError(f"closed form and RK4 differ by {diff:.3g} (> {a.tol:g})")
    kind = classify_solution(c)
    doc = {
        "regime": type(kind).__name__.lower(),
        "discriminant": discriminant(c),
        "b": 0.0 if c.delta == 0 else shock_response_b(c),
        "max_abs_diff": diff,
        "dt": a.dt,
        "days": a.days,
        "init": [a.p0, a.v0],
        "version": __version__,
    }
    return _dump_json(doc)


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="shockfit", description="Damped-oscillator shock models for index crashes.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def out_opt(sp):
        sp.add_argument("--out", help="write to this file (atomically) instead of stdout")

    def fit_opts(sp):
        sp.add_argument("input", help="date,close CSV or fixture:<name>")
        sp.add_argument("--window", help="preset name (1987, 1998, 2001, 2008) or start:end")
        sp.add_argument("--w-grid", help="lo:hi:step (default 0.2:4.0:0.2)")
        sp.add_argument("--horizon", type=int, help="number of samples fitted")
        sp.add_argument("--start", type=float, default=1, help="first day index fitted (default 1)")
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--nonneg-beta", action="store_true", help="keep beta >= 0 (default)")
        g.add_argument("--allow-negative-beta", action="store_true")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--restarts", type=int, default=0, help="jittered restarts per grid point")
        out_opt(sp)

    sp = sub.add_parser("fit", help="fit a model variant; JSON")
    fit_opts(sp)
    sp.add_argument("--variant", choices=("single", "double", "twomode"), default="single")
    sp.add_argument("--t0-grid", help="lo:hi:step onsets tried by the double shock")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("scan-w", help="multi-start frequency scan; JSON list of basins")
    fit_opts(sp)
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("profile", help="SSE along one parameter; TSV")
    fit_opts(sp)
    sp.add_argument("--param", required=True, choices=("A", "B", "alpha", "C", "beta", "w", "phi"))
    sp.add_argument("--params", help="JSON (inline or file); default: best scan-w fit")
    sp.add_argument("--range", required=True, help="lo:hi")
    sp.add_argument("--steps", type=int, default=101)
    sp.set_defaults(func=cmd_profile)

    sp = sub.add_parser("curve", help="evaluate a model on a grid; TSV")
    sp.add_argument("--params", required=True, help="JSON (inline or file)")
    sp.add_argument("--from", dest="t_from", type=float, default=1.0)
    sp.add_argument("--to", dest="t_to", type=float, default=27.0)
    sp.add_argument("--step", type=float, default=0.1)
    out_opt(sp)
    sp.set_defaults(func=cmd_curve)

    sp = sub.add_parser("synth", help="model samples at t=1..n plus Gaussian noise; TSV")
    sp.add_argument("--params", required=True, help="JSON (inline or file)")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--sigma", type=float, default=0.0)
    sp.add_argument("--seed", type=int, default=0)
    out_opt(sp)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("returns", help="daily log-returns; TSV")
    sp.add_argument("input")
    sp.add_argument("--window")
    out_opt(sp)
    sp.set_defaults(func=cmd_returns)

    sp = sub.add_parser("logdensity", help="ln(1 + count) histogram of log-returns; TSV")
    sp.add_argument("input")
    sp.add_argument("--bin", type=float, default=0.004)
    sp.add_argument("--window")
    out_opt(sp)
    sp.set_defaults(func=cmd_logdensity)

    sp = sub.add_parser("corr", help="correlation matrix and market mode; JSON")
    sp.add_argument("inputs", nargs="+")
    sp.add_argument("--window")
    out_opt(sp)
    sp.set_defaults(func=cmd_corr)

    sp = sub.add_parser("mapback", help="oscillator coefficients from a fit; JSON")
    sp.add_argument("fit", help="fit JSON (output of `fit`) or parameter JSON")
    sp.add_argument("--mass", required=True, help="cap:<table>, invvol or value:<m>")
    sp.add_argument("--market", help="market label (default: label in the fit provenance)")
    sp.add_argument("--reference", default="NYSE")
    sp.add_argument("--market-csv")
    sp.add_argument("--reference-csv")
    sp.add_argument("--window")
    sp.add_argument("--p0", type=float, help="initial price, for the c1 residual")
    out_opt(sp)
    sp.set_defaults(func=cmd_mapback)

    sp = sub.add_parser("ode-check", help="closed form against RK4; JSON")
    sp.add_argument("--coeffs", required=True, help="JSON with m,gamma,k,Pstar[,delta,shock_alpha] or lam,alpha0..3,beta0..3")
    sp.add_argument("--p0", type=float, default=1.0)
    sp.add_argument("--v0", type=float, default=0.0)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--days", type=float, default=30.0)
    sp.add_argument("--tol", type=float, default=1e-6)
    out_opt(sp)
    sp.set_defaults(func=cmd_ode_check)
    return p


_INPUT_ERRORS = (InputError, InsufficientDataError, AnalyticsError, MassError, InvalidParameterError, DomainError)
_NUMERIC_ERRORS = (NumericalError, ResonanceError, ConvergenceError, DegeneratePhaseError, FitError,
                   FloatingPointError, OverflowError, np.linalg.LinAlgError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            text = a.func(a)
        _emit(text, getattr(a, "out", None))
    except UsageError as e:
        print(f"shockfit: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except _INPUT_ERRORS as e:
        print(f"shockfit: input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except _NUMERIC_ERRORS as e:
        print(f"shockfit: numerical error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        # remaining ValueErrors come from malformed numbers in parameter files
        print(f"shockfit: input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
