"""The 1987 crash across eleven markets.

Each bundled series is fitted from the first day covered by its published
curve. The table compares the SSE of the published two-decimal parameters
with that of a fresh fit on the same samples, then the cross-market
correlation of daily log-returns gives the market-mode eigenvalue.
"""
import numpy as np

from shockfit import FitConfig, ShockFitParams, load_fixture, scan_w, sse
from shockfit.analytics import log_returns, summarize
from shockfit.io import fixture_fit_start

MARKETS = ["dow", "sp500", "nasdaq", "hangseng", "nikkei", "dax", "ftse", "ibovespa", "ipc", "kospi", "asx"]
PUBLISHED = {
    "dow": (0.97, 0.59, 0.70, 0.16, 0.18, 1.31, 3.04),
    "sp500": (0.97, 0.82, 0.68, 0.20, 0.17, 1.23, 3.80),
    "nasdaq": (0.94, 0.76, 0.36, 0.17, 0.18, 1.50, 5.23),
    "hangseng": (0.87, 4.09, 0.51, 0.56, 0.26, 1.78, 1.83),
    "nikkei": (0.97, 1.14, 0.53, 0.12, 0.13, 1.88, 2.29),
    "dax": (0.83, 0.58, 0.11, 0.07, 0.08, 1.61, 5.34),
    "ftse": (0.91, 0.95, 0.29, 0.18, 0.21, 1.76, 0.92),
    "ibovespa": (0.94, 7.01, 0.70, 0.33, 0.33, 3.10, 2.55),
    "ipc": (0.35, 1.80, 0.08, -0.18, 0.04, 1.06, 6.17),
    "kospi": (-0.02, 1.07, 0.00, -0.02, 0.01, 1.04, 7.02),
    "asx": (0.90, 1.90, 0.40, 0.27, 0.19, 1.70, 6.20),
}

print(f"{'market':9s} {'start':>5s} {'sse pub':>8s} {'sse fit':>8s} {'ratio':>6s} {'w fit':>6s}")
for m in MARKETS:
    s = load_fixture(f"{m}_1987")
    start = fixture_fit_start(s)
    best = scan_w(s, FitConfig(fit_start=start))[0]
    pub = sse(ShockFitParams(*PUBLISHED[m]), s, None, start)
    print(f"{m:9s} {start:5g} {pub:8.4f} {best.sse:8.4f} {pub / best.sse:6.2f} {best.params.w:6.3f}")

summary = summarize([log_returns(load_fixture(f"{m}_1987"), label=m) for m in MARKETS])
print(f"\nmean off-diagonal correlation {summary.avg_offdiag:.3f}")
print(f"largest eigenvalue            {summary.lambda_max:.3f}  (of {len(MARKETS)}, on {summary.n_obs} shared days)")
np.set_printoptions(precision=2, suppress=True, linewidth=120)
print(summary.matrix)
