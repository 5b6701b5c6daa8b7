"""Return points, periodic ray trajectories and the resonance band structure.

A ray trajectory is periodic with period ``P`` when it always meets the mirror
at a point where ``L = P/2``.  For the resonant case ``P = 2 L0``; a detuned
sinusoidal mirror (``omega = omega_N + d_omega``) supports orbits with
``P = 2 N pi / omega`` instead.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq

from .billiard import BilliardMap
from .parallel import max_workers
from .trajectory import MirrorTrajectory, make_sinusoidal

RETURN_TOL = 1e-10
TANGENT_TOL = 1e-8
GRID_PER_PERIOD = 4000


class Degenerate(enum.Enum):
    """Marker for a mirror that sits at the return level over a whole interval."""

    EVERYWHERE = "degenerate"


DEGENERATE = Degenerate.EVERYWHERE


@dataclass(frozen=True)
class ReturnPoint:
    tau_star: float
    mirror_velocity: float
    doppler: float
    marginal: bool = False


@dataclass(frozen=True)
class PeriodicTrajectory:
    tau0: float
    period: float
    sign: str  # "positive" | "negative" | "marginal"
    per_period_doppler: float


def _sign_label(doppler: float, tol: float) -> str:
    if doppler > 1.0 + tol:
        return "positive"
    if doppler < 1.0 - tol:
        return "negative"
    return "marginal"


def find_return_points(trajectory: MirrorTrajectory, window, level: Optional[float] = None,
                       points_per_period: int = GRID_PER_PERIOD) -> Union[List[ReturnPoint], Degenerate]:
    """All ``tau*`` in ``window`` with ``L(tau*) = level`` (default ``L0``).

    Sign changes of ``L - level`` on a dense grid are polished with Brent's
    method; tangential touches (a double root) are located as zeros of ``L'``
    and reported with ``marginal=True``.  A static mirror at the level returns
    :data:`DEGENERATE`.
    """
    a, b = map(float, window)
    if not b > a:
        raise ValueError("window must have positive length")
    L0 = trajectory.L0
    level = L0 if level is None else float(level)
    if trajectory.kind == "static":
        return DEGENERATE if abs(level - L0) <= RETURN_TOL * L0 else []
    if trajectory.domain is not None:
        a, b = max(a, trajectory.domain[0]), min(b, trajectory.domain[1])
    period = trajectory.period
    if period is None:
        span = trajectory.domain[1] - trajectory.domain[0] if trajectory.domain else (b - a)
        npts = max(1000, 20 * len(getattr(trajectory, "times", ())))
        period = span
    else:
        npts = points_per_period
    n = max(int(math.ceil((b - a) / period * npts)), 1000)
    ts = np.linspace(a, b, n + 1)
    g = trajectory.position(ts) - level
    tol = RETURN_TOL * L0

    def gfun(t):
        return trajectory.position(t) - level

    def vfun(t):
        return trajectory.velocity(t)

    found = []
    # transversal crossings
    idx = np.flatnonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)
    for i in idx:
        found.append(brentq(gfun, ts[i], ts[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
    exact = np.flatnonzero(g == 0)
    found.extend(ts[exact].tolist())
    # tangential touches: local extrema of L with |L - level| small
    v = trajectory.velocity(ts)
    vidx = np.flatnonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)
    for i in vidx:
        tc = brentq(vfun, ts[i], ts[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
        if abs(gfun(tc)) <= tol:
            found.append(tc)
    found.sort()
    out = []
    for t in found:
        if out and abs(t - out[-1].tau_star) <= 1e-9 * max(1.0, period):
            continue
        if not (a <= t <= b) or abs(gfun(t)) > tol:
            continue
        Ld = float(trajectory.velocity(t))
        out.append(ReturnPoint(float(t), Ld, (1 - Ld) / (1 + Ld), abs(Ld) <= TANGENT_TOL))
    return out


def find_periodic_trajectories(billiard: BilliardMap, initial_interval=None,
                               candidates: Optional[Sequence[float]] = None, level: Optional[float] = None,
                               check_periods: int = 3) -> List[PeriodicTrajectory]:
    """Starting points ``tau0`` in ``[-L0, L0)`` of rays with ``T_1(tau0) = tau0 + 2 level``.

    Candidates come from the return points of the mirror (``tau0 = tau* - level``)
    unless given explicitly.  Each candidate is kept only if it closes on itself
    for ``check_periods`` consecutive bounces.
    """
    traj = billiard.trajectory
    L0 = traj.L0
    level = L0 if level is None else float(level)
    a, b = (-L0, L0) if initial_interval is None else map(float, initial_interval)
    P = 2.0 * level
    if candidates is None:
        rps = find_return_points(traj, (a + level, b + level), level=level)
        if rps is DEGENERATE:
            raise ValueError("every point is a return point for a static mirror; pass candidates explicitly")
        candidates = [rp.tau_star - level for rp in rps]
    tol = max(1e3 * billiard.root_tolerance, 1e-9 * P)
    out = []
    for tau0 in candidates:
        if not (a <= tau0 < b):
            continue
        seq = billiard.iterate_bounces(tau0, check_periods)
        drift = np.abs(seq.times - (tau0 + P * np.arange(check_periods + 1)))
        if np.max(drift) > tol:
            continue
        d1 = float(seq.step_dopplers[0])
        rp_vel = float(traj.velocity(tau0 + level))
        marginal = abs(rp_vel) <= TANGENT_TOL
        sign = "marginal" if marginal else _sign_label(d1, 1e-12)
        out.append(PeriodicTrajectory(float(tau0), P, sign, d1))
    return out


@dataclass
class PerturbationReport:
    tau0: float
    sign: str
    eps: float
    n: int
    predicted: np.ndarray
    measured: np.ndarray
    residual: np.ndarray

    @property
    def max_relative_residual(self) -> float:
        return float(np.max(np.abs(self.residual)) / abs(self.eps)) if self.eps else 0.0


def perturbation_check(billiard: BilliardMap, ptraj: PeriodicTrajectory, eps: float, n: int) -> PerturbationReport:
    """Compare bounce times of a perturbed periodic ray with the linear prediction.

    Positive orbit: ``T_k(tau+ + eps) ~ tau+ + kT + eps / D_k(tau+)``.
    Negative orbit: ``T_k(tau- + eps D_k(tau-)) ~ tau- + kT + eps``.
    Residuals are ``measured - predicted`` for ``k = 1..n``.
    """
    base = billiard.iterate_bounces(ptraj.tau0, n)
    D = base.dopplers
    k = np.arange(1, n + 1)
    ideal = ptraj.tau0 + k * ptraj.period
    if ptraj.sign == "negative":
        measured = np.array([billiard.iterate_bounces(ptraj.tau0 + eps * D[j], j + 1).times[-1] for j in range(n)])
        predicted = ideal + eps
    else:
        measured = billiard.iterate_bounces(ptraj.tau0 + eps, n).times[1:]
        predicted = ideal + eps / D
    return PerturbationReport(ptraj.tau0, ptraj.sign, eps, n, predicted, measured, measured - predicted)


@dataclass
class BandScanResult:
    L0: float
    dL: float
    N: int
    omega: np.ndarray
    has_return_points: np.ndarray
    growth_exponent: np.ndarray

    @property
    def detuning(self) -> np.ndarray:
        """``d_omega / omega`` relative to the resonance ``omega_N = N pi / L0``."""
        omega_N = self.N * math.pi / self.L0
        return (self.omega - omega_N) / self.omega

    def rows(self):
        for w, r, h, g in zip(self.omega, self.detuning, self.has_return_points, self.growth_exponent):
            yield float(w), float(r), bool(h), float(g)


def band_point(L0: float, dL: float, omega: float, N: int) -> tuple:
    """``(has_return_points, log D_1(tau+))`` for a sinusoidal mirror at ``omega``."""
    if dL == 0:
        return (abs(omega - N * math.pi / L0) <= 1e-15 * omega), 0.0
    traj = make_sinusoidal(L0, dL, omega)
    level = N * math.pi / omega
    rps = find_return_points(traj, (0.0, traj.period), level=level)
    if not rps:
        return False, 0.0
    inward = [rp for rp in rps if not rp.marginal and rp.mirror_velocity < 0]
    if not inward:
        return True, 0.0
    billiard = BilliardMap(traj)
    rp = inward[0]
    tau0 = rp.tau_star - level
    seq = billiard.iterate_bounces(tau0, 1)
    if abs(seq.times[1] - tau0 - 2 * level) > 1e-8 * L0:
        raise RuntimeError(f"no closed orbit at omega={omega!r}: drift {seq.times[1] - tau0 - 2 * level:.3e}")
    return True, float(seq.log_dopplers[0])


def scan_band(L0: float, dL: float, omega_range=None, samples: int = 200, *, N: Optional[int] = None,
              omegas: Optional[Sequence[float]] = None) -> BandScanResult:
    """Growth exponent per period across a range of driving frequencies.

    Uses the generic engine (return points + one bounce), never the closed form.
    ``omegas`` overrides the uniform grid over ``omega_range``.
    """
    if omegas is None:
        if samples < 2:
            raise ValueError("need at least 2 samples")
        omegas = np.linspace(float(omega_range[0]), float(omega_range[1]), int(samples))
    omegas = np.asarray(omegas, dtype=float)
    if N is None:
        N = max(1, int(round(float(np.median(omegas)) * L0 / math.pi)))
    with ThreadPoolExecutor(max_workers=max_workers()) as pool:
        results = list(pool.map(lambda w: band_point(L0, dL, w, N), omegas))
    has = np.array([r[0] for r in results], dtype=bool)
    g = np.array([r[1] for r in results], dtype=float)
    return BandScanResult(L0, dL, N, omegas, has, g)
