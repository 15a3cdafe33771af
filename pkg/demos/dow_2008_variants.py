"""Model variants on the long 2008 Dow window (32 trading days).

A single damped oscillation, a second mode added on its residual, and a
second shock switched on at a later day are fitted in turn. For the double
shock the SSE is also listed against the onset day; only the day the
second shock starts acting on is identifiable, so onsets inside the same
inter-sample gap give the same fit.
"""
from shockfit import DoubleShock, SingleShock, TwoMode, fit_variant, load_fixture
from shockfit.fitting import FitConfig

series = load_fixture("dow_2008_long")

single = fit_variant(series, SingleShock())
print(f"single shock : w={single.params.w:.3f} sse={single.sse:.5f}")

two = fit_variant(series, TwoMode())
w1, w2 = (m.w for m in two.params.modes)
print(f"two modes    : w1={w1:.3f} w2={w2:.3f} sse={two.sse:.5f}")

double = fit_variant(series, DoubleShock())
print(f"double shock : t0={double.params.t0:g} sse={double.sse:.5f}")

print("\nonset scan")
for t0 in range(4, 31, 2):
    r = fit_variant(series, DoubleShock(t0_grid=(t0 + 0.5,)), FitConfig())
    print(f"  t0={t0 + 0.5:5.1f}  sse={r.sse:.5f}")
