"""Vacuum energy density of the cavity field.

``<T00> = rho(t + x) + rho(t - x)`` with
``rho = -(pi/48) R'^2 - S[R] / (24 pi)`` and Moore's phase ``R(tau) - R(f(tau)) = 2``.
Pulling back through the billiard map gives
``rho(T_n(s)) = (rho(s) + A_n(s)) D_n(s)^2`` where ``A_n`` collects the
Schwarzian (conformal anomaly) contributions of the ``n`` reflections.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .billiard import BilliardMap, schwarzian_from_derivatives
from .field_classical import DomainError, InitialProfile, _FieldProfile
from .resonance import PeriodicTrajectory
from .trajectory import warn_if_not_c3


class FitError(RuntimeError):
    pass


def casimir_density(L0: float) -> float:
    """Static Casimir density ``-pi / (48 L0^2)``."""
    return -math.pi / (48.0 * L0 * L0)


def schwarzian(derivs: Callable, tau):
    """Schwarzian of a function given through its derivatives.

    ``derivs(tau)`` returns ``(f', f'', f''')``.
    """
    return schwarzian_from_derivatives(*derivs(tau))


def schwarzian_fd(fn: Callable, tau, h: float = 1e-3):
    """Schwarzian of a plain callable by Richardson-extrapolated central differences."""
    tau = np.asarray(tau, dtype=float)

    def d123(h):
        fm2, fm1, f0, fp1, fp2 = (fn(tau + k * h) for k in (-2, -1, 0, 1, 2))
        d1 = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h)
        d2 = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h)
        fm3, fp3 = fn(tau - 3 * h), fn(tau + 3 * h)
        d3 = (fm3 - 8 * fm2 + 13 * fm1 - 13 * fp1 + 8 * fp2 - fp3) / (8 * h ** 3)
        return np.array([d1, d2, d3])

    coarse, fine = d123(h), d123(h / 2)
    d = fine + (fine - coarse) / 15.0
    return schwarzian_from_derivatives(d[0], d[1], d[2])


@dataclass
class AnomalyAccumulator:
    """``D_k`` and ``A_k`` for ``k = 0..n`` at a set of start points."""

    tau: np.ndarray
    dopplers: np.ndarray  # shape (n+1, ...), D_0 = 1
    values: np.ndarray    # shape (n+1, ...), A_0 = 0
    direct: Optional[np.ndarray] = None  # finite-difference S[T_n]/(24 pi), diagnostic

    @property
    def n(self) -> int:
        return self.values.shape[0] - 1

    @property
    def A(self):
        return self.values[-1]

    @property
    def route_discrepancy(self) -> Optional[float]:
        if self.direct is None:
            return None
        scale = max(float(np.max(np.abs(self.values[-1]))), 1e-300)
        return float(np.max(np.abs(self.direct - self.values[-1])) / scale)


class QuantumProfile(_FieldProfile):
    """Vacuum profile evolved from a seed on ``[-L0, L0]``.

    The default seed is the static Casimir density (an empty cavity at rest
    for ``t <= 0``, Moore phase ``R = tau / L0``).  ``anomaly=False`` drops
    the Schwarzian terms, leaving pure Doppler transport of the seed.
    """

    def __init__(self, billiard: BilliardMap, seed_rho: Optional[InitialProfile] = None,
                 anomaly: bool = True, quad_rel: float = 1e-8):
        warn_if_not_c3(billiard.trajectory, "the conformal anomaly")
        L_start = float(billiard.trajectory.position(0.0))
        if seed_rho is None:
            seed_rho = InitialProfile.uniform(casimir_density(billiard.trajectory.L0), L_start)
            seed_rho = InitialProfile(seed_rho.rho0, L_start, "vacuum", seed_rho.value)
        super().__init__(billiard, seed_rho, quad_rel)
        self.seed_rho = seed_rho
        self.anomaly = anomaly

    def _density_factor(self, sigma, A):
        base = self.seed(sigma)
        return base + A if self.anomaly else base

    def moore_phase(self, tau):
        """``R(tau) = R(f^n(tau)) + 2n`` seeded with ``R(s) = s / L0``."""
        tau = np.asarray(tau, dtype=float)
        if np.any(tau < -self.L_start - self.billiard.root_tolerance):
            raise DomainError(f"R is only defined for tau >= {-self.L_start!r}")
        sigma, n, _, _ = self.billiard.pullback(tau.ravel())
        out = sigma / self.trajectory.L0 + 2.0 * n
        return out.reshape(tau.shape) if tau.ndim else float(out[0])

    def anomaly_accumulate(self, tau, n: int, check: bool = False, h: float = 2e-3) -> AnomalyAccumulator:
        """``A_k(tau) = -(1/24 pi) sum_{j<=k} D_j^-2 S[f](T_j)`` for ``k = 0..n``.

        With ``check=True`` also evaluates ``S[T_n]/(24 pi)`` from finite
        differences of the bounce times (diagnostic only).
        """
        tau = np.asarray(tau, dtype=float)
        seq = self.billiard.iterate_bounces(tau, n)
        A = np.concatenate([np.zeros((1,) + tau.shape), seq.anomaly()], axis=0)
        D = np.concatenate([np.ones((1,) + tau.shape), seq.dopplers], axis=0)
        direct = None
        if check and n > 0:
            def Tn(x):
                return self.billiard.iterate_bounces(x, n).times[-1]
            direct = np.asarray(schwarzian_fd(Tn, tau, h)) / (24.0 * math.pi)
        return AnomalyAccumulator(tau, D, A, direct)

    def quantum_rho_at(self, tau):
        return self.rho_at(tau)

    def quantum_total_energy(self, tau0: float, n: int) -> float:
        return self.total_energy_recursive(tau0, n)

    def growth_coefficient(self, ptraj: PeriodicTrajectory, n_max: int = 200) -> float:
        """Asymptotic ``c`` in ``rho(T_n(tau+)) ~ c D_n(tau+)^2``.

        Fits ``rho(T_n)/D_n^2 = c + b D_n^-2`` over the upper half of
        ``n = 1..n_max``; ``c`` equals ``rho_seed(tau+) + A_inf(tau+)``.
        """
        if ptraj is None or ptraj.sign != "positive":
            raise ValueError("growth coefficient needs a positive periodic trajectory")
        seq = self.billiard.iterate_bounces(ptraj.tau0, n_max)
        logD = seq.log_dopplers
        if not np.all(np.diff(logD) > 0):
            raise FitError("Doppler factor does not grow along the trajectory")
        k0 = n_max // 2
        Tn = seq.times[1 + k0:]
        rho = self.rho_at(Tn)
        g = rho * np.exp(-2.0 * logD[k0:])
        X = np.column_stack([np.ones_like(g), np.exp(-2.0 * logD[k0:])])
        coef, *_ = np.linalg.lstsq(X, g, rcond=None)
        resid = g - X @ coef
        scale = max(float(np.max(np.abs(g))), abs(float(self.seed_rho(ptraj.tau0))))
        if np.max(np.abs(resid)) > 1e-6 * scale:
            raise FitError(f"fit residual {np.max(np.abs(resid)):.3e} too large")
        return float(coef[0])
