"""Price dynamics of a market as a forced damped oscillator.

    m P'' + gamma P' + k P = k P* + delta exp(-alpha t)

with m = lambda (alpha3 + beta3), gamma = 1 - lambda (alpha2 + beta2),
k = lambda (alpha1 + beta1) and P* = (alpha0 - beta0) / (alpha1 + beta1).

The discriminant uses the oscillator convention Delta = gamma^2 - 4 m k.
The demand/supply form of the same quantity has the opposite sign.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

CRITICAL_RTOL = 1e-9
RESONANCE_RTOL = 1e-12


class InvalidParameterError(ValueError):
    pass


class ResonanceError(ArithmeticError):
    """The shock rate is a natural rate of the oscillator."""


@dataclass(frozen=True)
class MarketDynamicsParams:
    lam: float
    alpha0: float
    alpha1: float
    alpha2: float
    alpha3: float
    beta0: float
    beta1: float
    beta2: float
    beta3: float


@dataclass(frozen=True)
class OscillatorCoeffs:
    m: float
    gamma: float
    k: float
    Pstar: float
    delta: float = 0.0
    shock_alpha: float = 0.0


@dataclass(frozen=True)
class Overdamped:
    r1: float
    r2: float
    discriminant: float


@dataclass(frozen=True)
class Critical:
    r: float
    discriminant: float


@dataclass(frozen=True)
class Underdamped:
    beta: float
    w: float
    discriminant: float


def derive_coefficients(p: MarketDynamicsParams, shock: tuple[float, float] = (0.0, 0.0)) -> OscillatorCoeffs:
    """Map demand/supply parameters onto oscillator coefficients."""
    if not p.lam > 0:
        raise InvalidParameterError("lambda must be positive")
    s1 = p.alpha1 + p.beta1
    s3 = p.alpha3 + p.beta3
    if s1 == 0:
        raise InvalidParameterError("alpha1 + beta1 must be nonzero (equilibrium price undefined)")
    if s3 <= 0:
        raise InvalidParameterError("alpha3 + beta3 must be positive (mass)")
    delta, shock_alpha = shock
    return OscillatorCoeffs(
        m=p.lam * s3,
        gamma=1.0 - p.lam * (p.alpha2 + p.beta2),
        k=p.lam * s1,
        Pstar=(p.alpha0 - p.beta0) / s1,
        delta=float(delta),
        shock_alpha=float(shock_alpha),
    )


def discriminant(c: OscillatorCoeffs) -> float:
    return c.gamma**2 - 4.0 * c.m * c.k


def classify_solution(c: OscillatorCoeffs, tol: Optional[float] = None):
    """Solution regime of the homogeneous equation.

    ``tol`` is an absolute band on Delta; by default it is
    1e-9 * max(gamma^2, 4 m k).
    """
    if not (c.m > 0 and c.k > 0):
        raise InvalidParameterError("need m > 0 and k > 0")
    d = discriminant(c)
    if tol is None:
        tol = CRITICAL_RTOL * max(c.gamma**2, 4.0 * c.m * c.k)
    two_m = 2.0 * c.m
    if abs(d) <= tol:
        return Critical(r=c.gamma / two_m, discriminant=d)
    if d > 0:
        s = math.sqrt(d)
        return Overdamped(r1=(c.gamma + s) / two_m, r2=(c.gamma - s) / two_m, discriminant=d)
    return Underdamped(beta=c.gamma / two_m, w=math.sqrt(-d) / two_m, discriminant=d)


def shock_response_b(c: OscillatorCoeffs) -> float:
    """Amplitude b of the particular solution b exp(-alpha t)."""
    a = c.shock_alpha
    den = c.m * a * a - c.gamma * a + c.k
    if abs(den) <= RESONANCE_RTOL * abs(c.k):
        raise ResonanceError(f"shock rate {a} resonates with the oscillator (denominator {den:.3g})")
    return c.delta / den


@dataclass(frozen=True)
class ClosedFormCurve:
    """Evaluator for the closed-form trajectory.

    ``consts`` are the two integration constants: (c1, c2) for the
    overdamped and critical regimes, (c1, phi) for the underdamped one.
    """

    coeffs: OscillatorCoeffs
    kind: object
    b: float
    consts: tuple[float, float]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        c = self.coeffs
        out = c.Pstar + self.b * np.exp(-c.shock_alpha * t)
        k = self.kind
        if isinstance(k, Underdamped):
            c1, phi = self.consts
            return out + c1 * np.exp(-k.beta * t) * np.cos(k.w * t - phi)
        c1, c2 = self.consts
        if isinstance(k, Critical):
            return out + (c1 + c2 * t) * np.exp(-k.r * t)
        return out + c1 * np.exp(-k.r1 * t) + c2 * np.exp(-k.r2 * t)


def closed_form_solution(c: OscillatorCoeffs, init: tuple[float, float]) -> Callable:
    """Regime-appropriate closed form matching P(0)=P0 and P'(0)=Pdot0."""
    P0, V0 = init
    kind = classify_solution(c)
    b = 0.0 if c.delta == 0 else shock_response_b(c)
    # homogeneous part must supply what the equilibrium and shock terms do not
    y0 = P0 - c.Pstar - b
    v0 = V0 + c.shock_alpha * b
    if isinstance(kind, Underdamped):
        # e^{-beta t}(a cos wt + s sin wt)
        M = np.array([[1.0, 0.0], [-kind.beta, kind.w]])
        a, s = np.linalg.solve(M, [y0, v0])
        consts = (float(math.hypot(a, s)), float(math.atan2(s, a)))
    elif isinstance(kind, Critical):
        M = np.array([[1.0, 0.0], [-kind.r, 1.0]])
        consts = tuple(float(x) for x in np.linalg.solve(M, [y0, v0]))
    else:
        M = np.array([[1.0, 1.0], [-kind.r1, -kind.r2]])
        consts = tuple(float(x) for x in np.linalg.solve(M, [y0, v0]))
    return ClosedFormCurve(c, kind, b, consts)


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    P: np.ndarray
    Pdot: np.ndarray


def integrate_ode(c: OscillatorCoeffs, init: tuple[float, float], dt: float, n: int) -> Trajectory:
    """Fixed-step RK4 for the forced oscillator; returns n+1 samples from t=0."""
    if not dt > 0:
        raise InvalidParameterError("dt must be positive")
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    m, g, k, Ps, d, a = c.m, c.gamma, c.k, c.Pstar, c.delta, c.shock_alpha
    inv_m = 1.0 / m
    exp = math.exp

    def acc(t, p, v):
        return (k * (Ps - p) + d * exp(-a * t) - g * v) * inv_m

    P = np.empty(n + 1)
    V = np.empty(n + 1)
    p, v = float(init[0]), float(init[1])
    P[0], V[0] = p, v
    h, h2 = dt, 0.5 * dt
    for i in range(n):
        t = i * h
        k1p, k1v = v, acc(t, p, v)
        k2p, k2v = v + h2 * k1v, acc(t + h2, p + h2 * k1p, v + h2 * k1v)
        k3p, k3v = v + h2 * k2v, acc(t + h2, p + h2 * k2p, v + h2 * k2v)
        k4p, k4v = v + h * k3v, acc(t + h, p + h * k3p, v + h * k3v)
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        P[i + 1], V[i + 1] = p, v
    return Trajectory(t=np.arange(n + 1) * h, P=P, Pdot=V)
