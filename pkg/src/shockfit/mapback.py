"""Map fitted curve parameters back to oscillator coefficients.

For a mass m, the fitted curve fixes

    P* = A,  c1 = C,  gamma = 2 m beta,  k = gamma^2 / (4 m) + m w^2,
    delta = B (m alpha^2 - gamma alpha + k),  b = B.

The mass itself is not identified by the curve, so it has to be supplied:
either market capitalization or inverse volatility, both relative to a
reference market.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

from .analytics import volatility
from .model_core import ShockFitParams

DEGENERATE_COS = 1e-9


class MassError(ValueError):
    pass


class DegeneratePhaseError(ArithmeticError):
    pass


class MassMethod(Enum):
    CAPITALIZATION = "cap"
    INVERSE_VOLATILITY = "invvol"


@dataclass(frozen=True)
class MassAssignment:
    method: MassMethod
    reference: str
    masses: dict = field(default_factory=dict)


@dataclass(frozen=True)
class MappedCoefficients:
    m: float
    Pstar: float
    c1: float
    gamma: float
    k: float
    delta: float
    b: float
    P0: Optional[float] = None
    c1_residual: Optional[float] = None

    def to_dict(self) -> dict:
        return {k: (None if v is None else float(v)) for k, v in self.__dict__.items()}


def capitalization_mass(caps: Mapping[str, float], reference: str = "NYSE") -> MassAssignment:
    """m_i = cap_i / cap_ref."""
    if reference not in caps:
        raise MassError(f"reference market {reference!r} missing")
    for label, c in caps.items():
        if not c > 0:
            raise MassError(f"capitalization of {label!r} must be positive, got {c}")
    ref = float(caps[reference])
    masses = {label: float(c) / ref for label, c in caps.items()}
    masses[reference] = 1.0
    return MassAssignment(MassMethod.CAPITALIZATION, reference, masses)


def inverse_volatility_mass(returns: Mapping[str, object], reference: str) -> MassAssignment:
    """m_i = vol_ref / vol_i, so calmer markets are heavier."""
    if reference not in returns:
        raise MassError(f"reference market {reference!r} missing")
    vols = {}
    for label, r in returns.items():
        v = volatility(r)
        if v == 0:
            raise MassError(f"market {label!r} has zero volatility")
        vols[label] = v
    ref = vols[reference]
    masses = {label: ref / v for label, v in vols.items()}
    masses[reference] = 1.0
    return MassAssignment(MassMethod.INVERSE_VOLATILITY, reference, masses)


def map_back(fit: ShockFitParams, m: float, P0: Optional[float] = None, check_phase: bool = True) -> MappedCoefficients:
    """Oscillator coefficients implied by a fitted curve for mass ``m``.

    When ``P0`` is given, the residual C - (P* - P0 - b)/cos(-phi) is reported
    as a diagnostic; it is not enforced.
    """
    if not m > 0:
        raise MassError("mass must be positive")
    if not fit.w > 0:
        raise ValueError("fitted w must be positive")
    gamma = 2.0 * m * fit.beta
    k = gamma * gamma / (4.0 * m) + m * fit.w * fit.w
    delta = fit.B * (m * fit.alpha**2 - gamma * fit.alpha + k)
    resid = None
    if P0 is not None and check_phase:
        cphi = math.cos(-fit.phi)
        if abs(cphi) < DEGENERATE_COS:
            raise DegeneratePhaseError(f"cos(-phi) = {cphi:.3g} is too small for the c1 relation")
        resid = fit.C - (fit.A - P0 - fit.B) / cphi
    return MappedCoefficients(m=m, Pstar=fit.A, c1=fit.C, gamma=gamma, k=k, delta=delta, b=fit.B, P0=P0, c1_residual=resid)


def read_cap_table(path) -> dict:
    """Two-column text table: label and capitalization (billions), comma or whitespace separated."""
    caps = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.split("#", 1)[0].strip()
            if not s:
                continue
            parts = [p for p in s.replace(",", " ").replace("\t", " ").split() if p]
            if len(parts) != 2:
                raise MassError(f"{path}:{lineno}: expected 'label value'")
            try:
                caps[parts[0]] = float(parts[1])
            except ValueError:
                if lineno == 1 or not caps:
                    continue  # header row
                raise MassError(f"{path}:{lineno}: bad number {parts[1]!r}")
    if not caps:
        raise MassError(f"{path}: no rows")
    return caps
