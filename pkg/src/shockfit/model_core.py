"""Closed-form model curves.

Every evaluator accepts a scalar or an array of trading-day indices ``t`` and
returns a value of the same shape. Angles are radians and are never wrapped.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

PARAM_NAMES = ("A", "B", "alpha", "C", "beta", "w", "phi")


class DomainError(ValueError):
    """Raised when a curve is evaluated outside its domain."""


@dataclass(frozen=True)
class ShockFitParams:
    """Single shock plus one damped oscillation.

    P(t) = A + B exp(-alpha t) + C exp(-beta t) cos(w t - phi)
    """

    A: float
    B: float
    alpha: float
    C: float
    beta: float
    w: float
    phi: float

    def as_array(self) -> np.ndarray:
        return np.array([self.A, self.B, self.alpha, self.C, self.beta, self.w, self.phi], dtype=float)

    @classmethod
    def from_array(cls, x: Sequence[float]) -> "ShockFitParams":
        return cls(*(float(v) for v in x))

    def to_dict(self) -> dict:
        return dict(zip(PARAM_NAMES, (float(v) for v in self.as_array())))

    def with_(self, **kw) -> "ShockFitParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class DoubleShockParams:
    """A base shock plus a second shock switched on at ``t0``.

    The second oscillation reuses ``base.beta`` and ``base.w``.
    """

    base: ShockFitParams
    D: float
    zeta: float
    Eamp: float
    eta: float
    t0: float

    def to_dict(self) -> dict:
        d = self.base.to_dict()
        d.update(D=self.D, zeta=self.zeta, Eamp=self.Eamp, eta=self.eta, t0=self.t0)
        return {k: float(v) for k, v in d.items()}


@dataclass(frozen=True)
class Mode:
    C: float
    beta: float
    w: float
    phi: float


@dataclass(frozen=True)
class TwoModeParams:
    A: float
    B: float
    alpha: float
    modes: tuple = field(default_factory=tuple)

    def __post_init__(self):
        modes = tuple(m if isinstance(m, Mode) else Mode(*m) for m in self.modes)
        if len(modes) != 2:
            raise ValueError("TwoModeParams needs exactly two modes")
        object.__setattr__(self, "modes", modes)

    def to_dict(self) -> dict:
        d = {"A": float(self.A), "B": float(self.B), "alpha": float(self.alpha)}
        for k, m in enumerate(self.modes, start=1):
            d.update({f"C{k}": float(m.C), f"beta{k}": float(m.beta), f"w{k}": float(m.w), f"phi{k}": float(m.phi)})
        return d


class Side(Enum):
    PRE_CRASH = "pre"
    POST_CRASH = "post"


@dataclass(frozen=True)
class LogPeriodicParams:
    A: float
    B: float
    C: float
    beta: float
    w: float
    phi: float
    tc: float
    side: Side = Side.PRE_CRASH


def _damped_cos(C, beta, w, phi, t):
    return C * np.exp(-beta * t) * np.cos(w * t - phi)


def eval_single_shock(p: ShockFitParams, t):
    """A + B e^{-alpha t} + C e^{-beta t} cos(w t - phi)."""
    t = np.asarray(t, dtype=float)
    return p.A + p.B * np.exp(-p.alpha * t) + _damped_cos(p.C, p.beta, p.w, p.phi, t)


def eval_double_shock(p: DoubleShockParams, t):
    """Base curve, plus the second shock for t >= t0 (H(0) = 1)."""
    t = np.asarray(t, dtype=float)
    base = eval_single_shock(p.base, t)
    s = t - p.t0
    on = s >= 0
    # evaluate only on the active side so large negative s cannot overflow
    s_on = np.where(on, s, 0.0)
    extra = p.D * np.exp(-p.zeta * s_on) + _damped_cos(p.Eamp, p.base.beta, p.base.w, p.eta, s_on)
    return base + np.where(on, extra, 0.0)


def eval_two_mode(p: TwoModeParams, t):
    """A + B e^{-alpha t} + sum_k C_k e^{-beta_k t} cos(w_k t - phi_k)."""
    t = np.asarray(t, dtype=float)
    out = p.A + p.B * np.exp(-p.alpha * t)
    for m in p.modes:
        out = out + _damped_cos(m.C, m.beta, m.w, m.phi, t)
    return out


def log_periodic_time_map(tc: float, t):
    """tau = ln(tc - t), defined for t < tc.

    Close to the critical time, tau behaves like ln|t - tc|, so equal steps in
    tau pack ever more oscillations into the approach to tc.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t >= tc):
        raise DomainError(f"time map needs t < tc={tc}")
    return np.log(tc - t)


def eval_log_periodic(p: LogPeriodicParams, t):
    """Log-periodic power law on either side of the critical time."""
    t = np.asarray(t, dtype=float)
    if p.side is Side.PRE_CRASH:
        if np.any(t >= p.tc):
            raise DomainError(f"pre-crash curve needs t < tc={p.tc}")
        x = p.tc - t
    else:
        if np.any(t <= p.tc):
            raise DomainError(f"post-crash curve needs t > tc={p.tc}")
        x = t - p.tc
    xb = x ** p.beta
    return p.A + p.B * xb + p.C * xb * np.cos(p.w * np.log(x) - p.phi)


def evaluate(params, t):
    """Dispatch on the params type."""
    if isinstance(params, ShockFitParams):
        return eval_single_shock(params, t)
    if isinstance(params, DoubleShockParams):
        return eval_double_shock(params, t)
    if isinstance(params, TwoModeParams):
        return eval_two_mode(params, t)
    if isinstance(params, LogPeriodicParams):
        return eval_log_periodic(params, t)
    raise TypeError(f"unsupported params type {type(params).__name__}")


def params_from_dict(d: dict):
    """Build a params record from a flat dict (the JSON form used by the CLI)."""
    if "C1" in d:
        modes = tuple(Mode(d[f"C{k}"], d[f"beta{k}"], d[f"w{k}"], d[f"phi{k}"]) for k in (1, 2))
        return TwoModeParams(d["A"], d["B"], d["alpha"], modes)
    base = ShockFitParams(*(float(d[k]) for k in PARAM_NAMES))
    if "t0" in d:
        return DoubleShockParams(base, d["D"], d["zeta"], d["Eamp"], d["eta"], d["t0"])
    return base


def params_to_dict(p) -> dict:
    return p.to_dict()
