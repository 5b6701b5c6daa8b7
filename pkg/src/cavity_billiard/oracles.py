"""Closed-form results for the sinusoidal and Law-Wu cavities.

These are reference values for cross-checking the generic engine; nothing in
the engine calls them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SinusoidalClosedForms:
    """``L(t) = L0 + dL sin(omega t)`` with ``omega = N pi / L0 + domega``."""

    L0: float
    dL: float
    N: int
    domega: float = 0.0

    @property
    def omega_N(self) -> float:
        return self.N * math.pi / self.L0

    @property
    def omega(self) -> float:
        return self.omega_N + self.domega

    @property
    def q(self) -> float:
        """Mirror speed at the return points."""
        x2 = (self.omega * self.dL) ** 2 - (self.L0 * self.domega) ** 2
        if x2 < 0:
            raise ValueError("outside the resonance band: no return points")
        return math.sqrt(x2)


@dataclass(frozen=True)
class LawWuClosedForms:
    L0: float
    dL: float
    N: int

    @property
    def omega(self) -> float:
        return self.N * math.pi / self.L0

    @property
    def t(self) -> float:
        return math.tan(self.omega * self.dL / 2)


def sin_starting_points(forms: SinusoidalClosedForms):
    """Start points of positive and negative periodic rays in ``[-L, L)``."""
    if forms.domega != 0:
        raise ValueError("starting points are given for the resonant case only")
    N, L = forms.N, forms.L0
    plus = [(-N + 2 * m + 1) * L / N for m in range(N)]
    minus = [(-N + 2 * m) * L / N for m in range(N)]
    return plus, minus


def sin_doppler(forms: SinusoidalClosedForms, n, sign: int = +1):
    """``D_n(tau_{+-m}) = ((1 +- q)/(1 -+ q))^n``."""
    q = forms.q
    r = (1 + q) / (1 - q)
    return r ** (sign * np.asarray(n, dtype=float))


def band_exponent(forms: SinusoidalClosedForms) -> float:
    """Per-period growth exponent ``log D_1(tau+)``, zero outside the band."""
    try:
        q = forms.q
    except ValueError:
        return 0.0
    return math.log((1 + q) / (1 - q))


def sin_anomaly(forms: SinusoidalClosedForms, n):
    """Cumulative anomaly at the positive start points."""
    if forms.domega != 0:
        raise ValueError("closed form given for the resonant case only")
    w = forms.omega_N
    D = sin_doppler(forms, n)
    return w * w / (48 * math.pi) / (1 - (w * forms.dL) ** 2) * (1 - D ** -2)


def sin_growth_coefficient(forms: SinusoidalClosedForms) -> float:
    """``rho_seed + A_inf`` at the positive start points (static vacuum seed)."""
    w1 = math.pi / forms.L0
    x = forms.omega_N * forms.dL
    return w1 * w1 / (48 * math.pi) * (forms.N ** 2 / (1 - x * x) - 1)


def lawwu_billiard(forms: LawWuClosedForms, tau):
    """Exact billiard function, unwrapped so it is continuous and increasing."""
    tau = np.asarray(tau, dtype=float)
    w, t, L = forms.omega, forms.t, forms.L0
    theta = w * (tau - L) / 2
    k = np.floor(theta / np.pi)
    phi = theta - np.pi * k
    # arccot(cot(phi) - 2t) on the branch through 0 at phi = 0
    psi = np.arctan2(np.sin(phi), np.cos(phi) - 2 * t * np.sin(phi))
    out = 2 / w * (np.pi * k + psi) - L
    return out if out.ndim else float(out)


def lawwu_billiard_inverse(forms: LawWuClosedForms, tau):
    tau = np.asarray(tau, dtype=float)
    w, t, L = forms.omega, forms.t, forms.L0
    theta = w * (tau + L) / 2
    k = np.floor(theta / np.pi)
    phi = theta - np.pi * k
    psi = np.arctan2(np.sin(phi), np.cos(phi) + 2 * t * np.sin(phi))
    out = 2 / w * (np.pi * k + psi) + L
    return out if out.ndim else float(out)


def lawwu_doppler(forms: LawWuClosedForms, tau, n):
    tau = np.asarray(tau, dtype=float)
    n = np.asarray(n, dtype=float)
    th = forms.omega * (tau + forms.L0)
    t = forms.t
    out = 1 + 2 * n * n * t * t * (1 - np.cos(th)) + 2 * n * t * np.sin(th)
    return out if out.ndim else float(out)


def lawwu_anomaly(forms: LawWuClosedForms, tau, n):
    w = forms.omega
    return w * w / (48 * math.pi) * (1 - lawwu_doppler(forms, tau, n) ** -2)


def lawwu_rho(forms: LawWuClosedForms, tau, n):
    """Vacuum profile at ``tau``, where ``n`` reflections pull ``tau`` back into the seed interval.

    The ``L`` in the printed formula's prefactors is the cavity length ``L0``.
    """
    tau = np.asarray(tau, dtype=float)
    n = np.asarray(n, dtype=float)
    N, L, w, t = forms.N, forms.L0, forms.omega, forms.t
    sgn = (-1.0) ** N
    braces = 1 + 2 * n * n * t * t * (1 - sgn * np.cos(w * tau)) - 2 * n * sgn * t * np.sin(w * tau)
    out = -N * N * math.pi / (48 * L * L) + (N * N - 1) * math.pi / (48 * L * L) * braces ** -2
    return out if out.ndim else float(out)


def lawwu_energy(forms: LawWuClosedForms, n):
    """Total vacuum energy at bounce midpoints ``T*_n(L0)``.

    Integrating the pulled-back density over the seed interval gives
    ``(pi / 24 L0) (2 (N^2 - 1) n^2 tan^2(w dL / 2) - 1)``.
    """
    n = np.asarray(n, dtype=float)
    return math.pi / (24 * forms.L0) * (2 * (forms.N ** 2 - 1) * n * n * forms.t ** 2 - 1)


def lawwu_starting_points(forms: LawWuClosedForms):
    """Marginal periodic rays: they meet the mirror at its turning points ``L = L0``."""
    N, L = forms.N, forms.L0
    return [(-N + 2 * m) * L / N for m in range(N)]
