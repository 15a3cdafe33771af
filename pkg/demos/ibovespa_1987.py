"""Two frequency basins in the Ibovespa 1987 crash window.

The fit is run on the twelve trading days after the crash, starting at the
fourth sample. A grid of frozen frequencies seeds the local refinements and
the distinct basins are printed with their SSE. A coarse SSE profile along
w, with the other parameters held at the best fit, shows the landscape.
"""
from shockfit import FitConfig, load_fixture, scan_w
from shockfit.fitting import landscape_profile
from shockfit.io import fixture_fit_start

series = load_fixture("ibovespa_1987_coarse")
cfg = FitConfig(fit_start=fixture_fit_start(series), fit_horizon=12)

basins = scan_w(series, cfg)
print("basins (best first)")
for b in basins:
    p = b.params
    print(f"  w={p.w:6.3f}  sse={b.sse:.5f}  A={p.A:.4f} B={p.B:.3f} alpha={p.alpha:.3f} "
          f"C={p.C:.3f} beta={p.beta:.3f} phi={p.phi:.3f}  (seeded at w={b.seed_w})")

# on daily samples w = pi is the Nyquist frequency: cos(pi t - phi) only flips sign day to day
best = basins[0].params
print("\nSSE along w, other parameters frozen at the best fit")
for w, e in landscape_profile(best, series, "w", (0.2, 4.0), 20, cfg.fit_horizon, cfg.fit_start):
    print(f"  {w:5.2f}  {e:.4f}  " + "#" * min(60, int(e * 200)))
