"""Return statistics and cross-market correlation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class AnalyticsError(ValueError):
    pass


class AlignmentError(AnalyticsError):
    pass


class ConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class ReturnSeries:
    """Log-returns; ``index`` holds the date (or day index) of each return's closing price."""

    values: np.ndarray
    label: str = ""
    index: Optional[tuple] = None

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class LogDensityHistogram:
    bin_width: float
    origin: float
    bars: list = field(default_factory=list)  # (left_edge, ln(1 + count))
    counts: list = field(default_factory=list)


@dataclass(frozen=True)
class CorrelationSummary:
    matrix: np.ndarray
    labels: tuple
    avg_offdiag: Optional[float] = None
    lambda_max: Optional[float] = None
    n_obs: int = 0


def _prices_and_index(prices):
    # accept a PriceSeries-like object or a plain sequence
    if hasattr(prices, "closes"):
        return np.asarray(prices.closes, dtype=float), getattr(prices, "label", ""), tuple(prices.dates)
    if hasattr(prices, "values") and hasattr(prices, "t"):
        return np.asarray(prices.values, dtype=float), getattr(prices, "label", ""), tuple(prices.t)
    return np.asarray(prices, dtype=float), "", None


def log_returns(prices, label: Optional[str] = None) -> ReturnSeries:
    """S_t = ln P_t - ln P_{t-1}."""
    p, lab, idx = _prices_and_index(prices)
    if p.ndim != 1 or p.size < 2:
        raise AnalyticsError("need at least two prices")
    if np.any(~(p > 0)):
        i = int(np.argmax(~(p > 0)))
        raise AnalyticsError(f"nonpositive price at position {i}: {p[i]}")
    r = np.diff(np.log(p))
    return ReturnSeries(values=r, label=label if label is not None else lab, index=None if idx is None else idx[1:])


def _bin_index(x: np.ndarray, width: float) -> np.ndarray:
    q = x / width
    k = np.floor(q)
    # a value sitting on an edge belongs to the bin it opens
    near = np.abs(q - np.round(q)) < 1e-9
    return np.where(near, np.round(q), k).astype(np.int64)


def log_density_histogram(returns, bin_width: float = 0.004) -> LogDensityHistogram:
    """Histogram with an edge at 0 and bar height ln(1 + count); empty bins omitted."""
    if not bin_width > 0:
        raise AnalyticsError("bin_width must be positive")
    x = np.asarray(getattr(returns, "values", returns), dtype=float)
    if x.size == 0:
        return LogDensityHistogram(bin_width, 0.0, [], [])
    ks, counts = np.unique(_bin_index(x, bin_width), return_counts=True)
    bars = [(round(float(k) * bin_width, 12), math.log1p(int(c))) for k, c in zip(ks, counts)]
    return LogDensityHistogram(bin_width, 0.0, bars, [int(c) for c in counts])


def volatility(returns) -> float:
    """Sample standard deviation of the returns."""
    x = np.asarray(getattr(returns, "values", returns), dtype=float)
    if x.size < 2:
        raise AnalyticsError("volatility needs at least two returns")
    if np.all(x == x[0]):
        return 0.0  # the mean of a constant sample is not always exact
    return float(np.std(x, ddof=1))


def align(series: Sequence[ReturnSeries]) -> np.ndarray:
    """Inner join on index keys; returns a (k, n_common) array."""
    if any(s.index is None for s in series):
        n = {len(s) for s in series}
        if len(n) != 1:
            raise AlignmentError("series without an index must have equal lengths")
        return np.vstack([np.asarray(s.values, dtype=float) for s in series])
    common = set(series[0].index)
    for s in series[1:]:
        common &= set(s.index)
    keys = sorted(common)
    rows = []
    for s in series:
        pos = {key: i for i, key in enumerate(s.index)}
        rows.append(np.asarray(s.values, dtype=float)[[pos[key] for key in keys]])
    return np.vstack(rows) if rows else np.empty((0, 0))


def correlation_matrix(series: Sequence[ReturnSeries]) -> CorrelationSummary:
    """Pearson correlation of every pair, on dates shared by all series."""
    if len(series) < 2:
        raise AlignmentError("need at least two series")
    X = align(series)
    if X.shape[1] < 3:
        raise AlignmentError(f"only {X.shape[1]} aligned observations; need at least 3")
    Z = X - X.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.einsum("ij,ij->i", Z, Z))
    for s, nrm in zip(series, norms):
        if nrm == 0:
            raise AnalyticsError(f"series {s.label or '?'} is constant; correlation undefined")
    Z = Z / norms[:, None]
    R = np.clip(Z @ Z.T, -1.0, 1.0)
    R = 0.5 * (R + R.T)
    np.fill_diagonal(R, 1.0)
    return CorrelationSummary(matrix=R, labels=tuple(s.label for s in series), n_obs=X.shape[1])


def average_correlation(matrix) -> float:
    """Mean of the off-diagonal entries."""
    R = np.asarray(matrix, dtype=float)
    n = R.shape[0]
    if n < 2:
        raise AnalyticsError("need n >= 2")
    return float((R.sum() - np.trace(R)) / (n * (n - 1)))


def largest_eigenvalue(matrix, tol: float = 1e-13, max_iter: int = 200_000, seed: int = 0) -> float:
    """Largest eigenvalue of a symmetric matrix by power iteration.

    The matrix is shifted by its Gershgorin radius so the wanted eigenvalue is
    also the dominant one; iteration stops when successive Rayleigh quotients
    differ by less than ``tol``. A stalled start is retried once from a
    different seeded vector.
    """
    M = np.asarray(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise AnalyticsError("matrix must be square")
    if not np.allclose(M, M.T, rtol=0, atol=1e-12 * max(1.0, np.abs(M).max())):
        raise AnalyticsError("matrix must be symmetric")
    n = M.shape[0]
    shift = float(np.abs(M).sum(axis=1).max())
    S = M + shift * np.eye(n)
    rng = np.random.default_rng(seed)
    for _attempt in range(2):
        x = np.ones(n) / math.sqrt(n) + 1e-3 * rng.standard_normal(n)
        x /= np.linalg.norm(x)
        lam = float(x @ S @ x)
        for _ in range(max_iter):
            y = S @ x
            ny = np.linalg.norm(y)
            if ny == 0:
                return -shift + 0.0
            x = y / ny
            new = float(x @ S @ x)
            if abs(new - lam) < tol * max(1.0, abs(new)):
                return new - shift
            lam = new
    raise ConvergenceError("power iteration did not converge")


def summarize(series: Sequence[ReturnSeries], tol: float = 1e-13) -> CorrelationSummary:
    """Correlation matrix plus off-diagonal mean and market-mode eigenvalue."""
    cs = correlation_matrix(series)
    return CorrelationSummary(
        matrix=cs.matrix,
        labels=cs.labels,
        avg_offdiag=average_correlation(cs.matrix),
        lambda_max=largest_eigenvalue(cs.matrix, tol=tol),
        n_obs=cs.n_obs,
    )
