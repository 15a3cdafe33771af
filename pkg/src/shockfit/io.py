"""Series types, CSV ingestion, crisis windows, synthetic data and bundled fixtures."""
from __future__ import annotations

import csv
import datetime as dt
import os
import tempfile
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Sequence

import numpy as np

from .model_core import evaluate


class InputError(ValueError):
    """Bad or inconsistent input data."""


@dataclass(frozen=True)
class PriceSeries:
    label: str
    dates: tuple
    closes: np.ndarray

    def __post_init__(self):
        closes = np.asarray(self.closes, dtype=float)
        object.__setattr__(self, "closes", closes)
        object.__setattr__(self, "dates", tuple(self.dates))
        if len(self.dates) != closes.size:
            raise InputError("dates and closes differ in length")
        for i in range(1, len(self.dates)):
            if not self.dates[i] > self.dates[i - 1]:
                raise InputError(f"dates not strictly increasing at row {i + 1}: {self.dates[i]}")
        bad = np.flatnonzero(~(closes > 0))
        if bad.size:
            raise InputError(f"nonpositive close at row {bad[0] + 1}: {closes[bad[0]]}")

    def __len__(self):
        return self.closes.size


@dataclass(frozen=True)
class NormalizedSeries:
    label: str
    values: np.ndarray
    t: np.ndarray = None
    window: Optional[tuple] = None
    mean_used: float = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        t = np.arange(1, v.size + 1, dtype=float) if self.t is None else np.asarray(self.t, dtype=float)
        if t.size != v.size:
            raise InputError("t and values differ in length")
        object.__setattr__(self, "t", t)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class CrisisWindow:
    name: str
    start: dt.date
    end: dt.date

    def __post_init__(self):
        if not self.start < self.end:
            raise InputError(f"window {self.name}: start must precede end")


_WINDOWS = (
    ("1987", "1987-10-13", "1987-11-08"),
    ("1998", "1998-08-25", "1998-10-14"),
    ("2001", "2001-09-10", "2001-10-22"),
    ("2008", "2008-09-12", "2008-10-27"),
)


def builtin_windows() -> list:
    """The four crisis windows studied."""
    return [CrisisWindow(n, dt.date.fromisoformat(a), dt.date.fromisoformat(b)) for n, a, b in _WINDOWS]


def parse_window(spec: str) -> CrisisWindow:
    """A preset name or ``start:end`` in ISO dates."""
    for w in builtin_windows():
        if w.name == spec:
            return w
    if ":" in spec:
        a, b = spec.split(":", 1)
        try:
            return CrisisWindow(spec, dt.date.fromisoformat(a), dt.date.fromisoformat(b))
        except ValueError as e:
            raise InputError(f"bad window {spec!r}: {e}") from None
    names = ", ".join(w.name for w in builtin_windows())
    raise InputError(f"unknown window {spec!r}; use one of {names} or start:end")


def load_csv(path, label: Optional[str] = None) -> PriceSeries:
    """Read a ``date,close`` file; errors name the offending line."""
    dates, closes = [], []
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        header = None
        for lineno, row in enumerate(reader, start=1):
            if not row or row[0].startswith("#"):
                continue
            if header is None:
                header = [c.strip().lower() for c in row]
                if header[:2] != ["date", "close"]:
                    raise InputError(f"{path}:{lineno}: header must be 'date,close'")
                continue
            if len(row) < 2:
                raise InputError(f"{path}:{lineno}: expected two fields")
            try:
                d = dt.date.fromisoformat(row[0].strip())
            except ValueError:
                raise InputError(f"{path}:{lineno}: bad date {row[0]!r}") from None
            try:
                c = float(row[1])
            except ValueError:
                raise InputError(f"{path}:{lineno}: bad close {row[1]!r}") from None
            if not c > 0:
                raise InputError(f"{path}:{lineno}: nonpositive close {c} on {d}")
            if dates and d == dates[-1]:
                raise InputError(f"{path}:{lineno}: duplicate date {d}")
            if dates and d < dates[-1]:
                raise InputError(f"{path}:{lineno}: date {d} out of order")
            dates.append(d)
            closes.append(c)
    if header is None:
        raise InputError(f"{path}: empty file")
    if label is None:
        label = os.path.splitext(os.path.basename(str(path)))[0]
    return PriceSeries(label, tuple(dates), np.array(closes))


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(series: PriceSeries, path) -> None:
    lines = ["date,close"] + [f"{d.isoformat()},{repr(float(c))}" for d, c in zip(series.dates, series.closes)]
    atomic_write_text(path, "\n".join(lines) + "\n")


def extract_window(series: PriceSeries, window: CrisisWindow, min_days: int = 8) -> NormalizedSeries:
    """Trading days inside the window, divided by their mean, indexed t = 1..n."""
    sel = [i for i, d in enumerate(series.dates) if window.start <= d <= window.end]
    if not sel:
        raise InputError(f"no trading days of {series.label} inside window {window.name}")
    if len(sel) < min_days:
        raise InputError(f"window {window.name} holds {len(sel)} trading days; need at least {min_days}")
    p = series.closes[sel]
    mean = float(p.mean())
    # constant prices normalize to exactly 1 even when the float mean is off by an ulp
    v = np.ones_like(p) if np.all(p == p[0]) else p / mean
    return NormalizedSeries(
        label=series.label,
        values=v,
        window=(series.dates[sel[0]], series.dates[sel[-1]]),
        mean_used=mean,
        meta={"dates": tuple(series.dates[i] for i in sel)},
    )


def synthesize(params, n: int, noise_sigma: float = 0.0, seed: int = 0, label: str = "synthetic") -> NormalizedSeries:
    """Model curve at t = 1..n plus seeded Gaussian noise."""
    if n < 1:
        raise InputError("n must be >= 1")
    if noise_sigma < 0:
        raise InputError("noise_sigma must be >= 0")
    t = np.arange(1, n + 1, dtype=float)
    v = np.asarray(evaluate(params, t), dtype=float)
    if noise_sigma > 0:
        v = v + np.random.default_rng(seed).normal(0.0, noise_sigma, n)
    return NormalizedSeries(label, v, t, meta={"seed": seed, "noise_sigma": noise_sigma})


# ---------------------------------------------------------------- fixtures


def _read_fixture(name: str):
    text = resources.files("shockfit").joinpath("data", f"{name}.csv").read_text(encoding="utf-8")
    meta, rows, header = {}, [], None
    for line in text.splitlines():
        if line.startswith("#"):
            k, _, val = line[1:].partition(":")
            meta[k.strip()] = val.strip()
        elif header is None:
            header = line.strip().split(",")
        elif line.strip():
            rows.append([float(x) for x in line.split(",")])
    return meta, header, np.array(rows)


def fixture_names() -> list:
    d = resources.files("shockfit").joinpath("data")
    return sorted(p.name[:-4] for p in d.iterdir() if p.name.endswith(".csv"))


def load_fixture(name: str) -> NormalizedSeries:
    """A bundled normalized crash-window series (columns t, value)."""
    meta, header, a = _read_fixture(name)
    if header[:2] != ["t", "value"]:
        raise InputError(f"fixture {name} is not a normalized series")
    return NormalizedSeries(meta.get("label", name), a[:, 1], a[:, 0], meta=meta)


def fixture_fit_start(series: NormalizedSeries) -> float:
    """First sample covered by the reference fits of a bundled series."""
    return float(series.meta.get("fit_start", series.t[0]))


def load_fixture_prices(name: str) -> tuple[np.ndarray, np.ndarray]:
    """A bundled price-level series as (t, close)."""
    meta, header, a = _read_fixture(name)
    if header[:2] != ["t", "close"]:
        raise InputError(f"fixture {name} is not a price series")
    return a[:, 0], a[:, 1]


def load_histogram_returns(name: str = "sp500_logdensity_bins", bin_width: float = 0.004) -> np.ndarray:
    """Return sample rebuilt from a binned count table: each count placed at its bin centre."""
    meta, header, a = _read_fixture(name)
    out = [np.full(int(c), left + 0.5 * bin_width) for left, c in a]
    return np.concatenate(out) if out else np.empty(0)
