"""From demand and supply to an oscillator, and back from a fitted curve.

A set of demand/supply sensitivities defines mass, damping and stiffness.
The closed-form price path is checked against a numerical integration, and
a fitted crash curve is mapped back to coefficients for two mass choices:
capitalization relative to NYSE, and inverse volatility relative to the Dow.
"""
import numpy as np

from shockfit import load_fixture
from shockfit.analytics import log_returns
from shockfit.fitting import FitConfig, scan_w
from shockfit.io import fixture_fit_start
from shockfit.mapback import capitalization_mass, inverse_volatility_mass, map_back
from shockfit.market_dynamics import (
    MarketDynamicsParams, classify_solution, closed_form_solution, derive_coefficients, integrate_ode,
)

mp = MarketDynamicsParams(lam=0.5, alpha0=7.0, alpha1=1.0, alpha2=0.1, alpha3=1.5,
                          beta0=1.0, beta1=2.0, beta2=0.3, beta3=0.5)
c = derive_coefficients(mp, shock=(0.8, 0.6))
print(f"m={c.m:g} gamma={c.gamma:g} k={c.k:g} P*={c.Pstar:g}  regime: {classify_solution(c)}")
curve = closed_form_solution(c, (2.5, 0.0))
traj = integrate_ode(c, (2.5, 0.0), 1e-3, 30_000)
print(f"closed form vs RK4 over 30 days: {np.max(np.abs(curve(traj.t) - traj.P)):.2e}")

nasdaq = load_fixture("nasdaq_1987")
fit = scan_w(nasdaq, FitConfig(fit_start=fixture_fit_start(nasdaq)))[0].params
caps = capitalization_mass({"NYSE": 13046.0, "Nasdaq": 2904.0}, "NYSE")
mc = map_back(fit, caps.masses["Nasdaq"], P0=float(nasdaq.values[0]))
print(f"\nNasdaq 1987 fit: beta={fit.beta:.3f} w={fit.w:.3f}")
print(f"capitalization mass {mc.m:.3f}: gamma={mc.gamma:.4f} k={mc.k:.4f} delta={mc.delta:.4f}")

markets = ["dow", "sp500", "nasdaq", "dax", "ftse", "nikkei"]
inv = inverse_volatility_mass({m: log_returns(load_fixture(f"{m}_2008")) for m in markets}, "dow")
print("\ninverse-volatility masses, 2008 window:")
for m in markets:
    print(f"  {m:7s} {inv.masses[m]:.3f}")
