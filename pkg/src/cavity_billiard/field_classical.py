"""Classical cavity field from the billiard map.

The field is ``A(t, x) = phi(t + x) - phi(t - x)`` and only its profile
``rho = phi'^2`` enters the observables.  Given ``rho`` on the seed interval
``[-L(0), L(0)]`` the profile extends forward as ``rho(T_n(s)) = rho(s) D_n(s)^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq, minimize_scalar
from scipy.signal import find_peaks

from .billiard import BilliardMap, BounceCache, pullback_factors
from .quadrature import integrate
from .resonance import find_periodic_trajectories


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class InitialProfile:
    """Seed profile ``rho0`` on ``[-L, L]``.

    ``rho0`` must accept numpy arrays.  ``kind`` is informational
    (``uniform``, ``sampled``, ``function``, ``vacuum``).
    """

    rho0: Callable
    half_width: float
    kind: str = "function"
    value: Optional[float] = None

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        out = np.asarray(self.rho0(tau), dtype=float)
        return np.broadcast_to(out, tau.shape).copy() if out.shape != tau.shape else out

    @classmethod
    def uniform(cls, value: float, half_width: float) -> "InitialProfile":
        value = float(value)
        return cls(lambda tau: np.full(np.shape(tau), value), float(half_width), "uniform", value)

    @classmethod
    def from_samples(cls, tau, rho, half_width: Optional[float] = None) -> "InitialProfile":
        """Monotone cubic (PCHIP) interpolation; does not overshoot, so rho stays >= 0."""
        tau = np.asarray(tau, dtype=float)
        rho = np.asarray(rho, dtype=float)
        hw = float(max(-tau[0], tau[-1])) if half_width is None else float(half_width)
        if tau[0] > -hw * (1 - 1e-12) or tau[-1] < hw * (1 - 1e-12):
            raise DomainError("samples must cover the whole seed interval [-L, L]")
        interp = PchipInterpolator(tau, rho, extrapolate=False)
        return cls(interp, hw, "sampled")

    @classmethod
    def gaussian(cls, center: float, width: float, amplitude: float, half_width: float,
                 floor: float = 0.0) -> "InitialProfile":
        def rho0(tau):
            return floor + amplitude * np.exp(-0.5 * ((np.asarray(tau) - center) / width) ** 2)
        return cls(rho0, float(half_width), "gaussian")


@dataclass
class Peak:
    position: float  # x inside the cavity
    tau: float       # light-cone coordinate of the peak
    height: float    # T00 at the peak
    width: float     # full width at half maximum (same in x and tau); nan if not resolved


class _FieldProfile:
    """Shared machinery for classical and quantum profiles."""

    def __init__(self, billiard: BilliardMap, seed: InitialProfile, quad_rel: float = 1e-8):
        self.billiard = billiard
        self.map = billiard
        self.seed = seed
        self.quad_rel = quad_rel
        self.cache = BounceCache(billiard)
        self.L_start = float(billiard.trajectory.position(0.0))
        self._ptrajs = None

    # subclasses decide how the seed and the anomaly combine
    def _density_factor(self, sigma, A):
        raise NotImplementedError

    @property
    def trajectory(self):
        return self.billiard.trajectory

    def rho_at(self, tau):
        """Profile ``rho(tau)`` for ``tau >= -L(0)``."""
        tau = np.asarray(tau, dtype=float)
        if np.any(tau < -self.L_start - self.billiard.root_tolerance):
            raise DomainError(f"rho is only defined for tau >= {-self.L_start!r}")
        sigma, n, log_fp, schw = self.billiard.pullback(tau.ravel())
        logD, A = pullback_factors(log_fp, schw)
        out = self._density_factor(sigma, A) * np.exp(2.0 * logD)
        return out.reshape(tau.shape) if tau.ndim else float(out[0])

    def forward(self, sigma, n: int):
        """``(T_n(sigma), log D_n(sigma), rho(sigma) + A_n(sigma))`` for seed points ``sigma``."""
        T, logD, A = self.cache.advance(sigma, n)
        return T, logD, self._density_factor(np.asarray(sigma, dtype=float), A)

    def energy_density(self, t, x):
        """``T00(t, x) = rho(t + x) + rho(t - x)`` for ``0 <= x <= L(t)``."""
        t = float(t)
        x = np.asarray(x, dtype=float)
        Lt = float(self.trajectory.position(t))
        slack = 1e-12 * max(1.0, Lt)
        if np.any((x < -slack) | (x > Lt + slack)):
            raise DomainError(f"x must lie in [0, L(t)] = [0, {Lt!r}]")
        x = np.clip(x, 0.0, Lt)
        out = self.rho_at(t + x) + self.rho_at(t - x)
        return out if np.ndim(out) else float(out)

    def snapshot(self, t: float, nx: int = 1001):
        """``(x, T00)`` on a uniform grid across the cavity at time ``t``."""
        Lt = float(self.trajectory.position(t))
        x = np.linspace(0.0, Lt, nx)
        return x, self.energy_density(t, x)

    # -- periodic structure used for quadrature breakpoints -----------------
    def periodic_trajectories(self):
        if self._ptrajs is None:
            try:
                if self.trajectory.kind in ("static", "tabulated"):
                    self._ptrajs = []
                else:
                    self._ptrajs = find_periodic_trajectories(self.billiard)
            except Exception:
                self._ptrajs = []
        return self._ptrajs

    def _window_pieces(self, t: float):
        """Split ``[t - L(t), t + L(t)]`` into seed-interval pieces.

        Returns ``[(s_lo, s_hi, n), ...]`` with the window equal to the union of
        ``T_n([s_lo, s_hi])``.
        """
        Lt = float(self.trajectory.position(t))
        b = t + Lt
        sb, nb, _, _ = self.billiard.pullback(b)
        sb, nb = float(sb[0]), int(nb[0])
        L0 = self.L_start
        pieces = [(-L0, sb, nb)]
        if nb >= 1 and sb < L0:
            pieces.append((sb, L0, nb - 1))
        return pieces

    def _breakpoints(self, a: float, b: float, pieces) -> List[float]:
        pts = []
        for lo, hi, n in pieces:
            T = self.billiard.iterate_bounces(np.array([lo, hi]), n).times[-1]
            pts.extend(T.tolist())
            for pt in self.periodic_trajectories():
                if pt.sign != "negative":
                    k0 = max(0, int(math.floor((a - pt.tau0) / pt.period)))
                    for k in range(k0, k0 + 3):
                        p = pt.tau0 + k * pt.period
                        if a < p < b:
                            pts.append(p)
        return sorted(set(p for p in pts if a < p < b))

    def total_energy(self, t: float) -> float:
        """``E(t) = integral of rho over [t - L(t), t + L(t)]`` by direct quadrature."""
        if t < 0:
            raise DomainError("t must be >= 0")
        Lt = float(self.trajectory.position(t))
        a, b = t - Lt, t + Lt
        pts = self._breakpoints(a, b, self._window_pieces(t)) if t > 0 else []
        return float(integrate(self.rho_at, a, b, epsrel=self.quad_rel, points=pts).value)

    def total_energy_recursive(self, tau0: float, n: int) -> float:
        """``E(T*_n(tau0)) = integral_{f(tau0)}^{tau0} (rho + A_n) D_n``.

        ``tau0`` defaults in practice to ``L(0)``, making the range the seed interval.
        """
        lo = float(self.billiard.f_eval(tau0))

        def integrand(s):
            _, logD, dens = self.forward(s, n)
            return dens * np.exp(logD)

        return float(integrate(integrand, lo, float(tau0), epsrel=self.quad_rel).value)

    def bounce_midpoint(self, tau0: float, n: int) -> float:
        """``T*_n(tau0)``, the time at which the recursive energy formula applies."""
        if n == 0:
            raise ValueError("midpoints start at n = 1")
        return float(self.billiard.iterate_bounces(tau0, n).retarded[-1])

    def energy_curve(self, n_max: int, tau0: Optional[float] = None):
        """``(n, t_n, E_n)`` at bounce midpoints ``t_n = T*_n(tau0)`` for ``n = 1..n_max``."""
        tau0 = self.L_start if tau0 is None else float(tau0)
        seq = self.billiard.iterate_bounces(tau0, n_max)
        ns = np.arange(1, n_max + 1)
        E = np.array([self.total_energy_recursive(tau0, int(k)) for k in ns])
        return ns, seq.retarded.copy(), E

    # -- peaks ---------------------------------------------------------------
    def _piece_peaks(self, lo: float, hi: float, n: int, grid: int, rel_prominence: float):
        """Interior maxima of ``s -> rho(T_n(s))`` on ``[lo, hi]``.

        Returns ``(tau_peak, rho_peak, fwhm_in_tau)`` triples.
        """
        s = np.linspace(lo, hi, grid)
        _, logD, dens = self.forward(s, n)
        v = dens * np.exp(2 * logD)
        span = float(np.max(v) - np.min(v))
        if span <= 1e-12 * max(float(np.max(np.abs(v))), 1e-300):
            return []
        idx, _ = find_peaks(v, prominence=rel_prominence * span)

        def rho_s(x):
            _, lD, d = self.forward(np.array([x]), n)
            return float(d[0] * math.exp(2 * lD[0]))

        out = []
        for i in idx:
            res = minimize_scalar(lambda x: -rho_s(x), bounds=(s[i - 1], s[i + 1]), method="bounded",
                                  options={"xatol": 1e-13 * max(1.0, abs(s[i]))})
            s_pk = float(res.x) if -res.fun >= v[i] else float(s[i])
            h = rho_s(s_pk)
            half = 0.5 * h

            def cross(direction):
                j = i
                while 0 < j < grid - 1 and v[j] > half:
                    j += direction
                if v[j] > half:
                    return None
                a, b = (s[j], s_pk) if direction < 0 else (s_pk, s[j])
                return brentq(lambda x: rho_s(x) - half, a, b, xtol=1e-14)

            s_l, s_r = cross(-1), cross(+1)
            tau_pk = float(self.billiard.iterate_bounces(s_pk, n).times[-1])
            if s_l is not None and s_r is not None:
                Tl, Tr = self.billiard.iterate_bounces(np.array([s_l, s_r]), n).times[-1]
                width = float(Tr - Tl)
            else:
                width = float("nan")
            out.append((tau_pk, h, width))
        return out

    def profile_peaks(self, n: int, grid: int = 1024, rel_prominence: float = 1e-6) -> List[Peak]:
        """Packets of ``rho`` on ``T_n([-L(0), L(0)])``, i.e. after ``n`` reflections.

        ``position`` is reported as ``tau``; widths are FWHM in ``tau``.
        """
        L0 = self.L_start
        return [Peak(tau, tau, h, w) for tau, h, w in self._piece_peaks(-L0, L0, n, grid, rel_prominence)]

    def peak_metrics(self, t: float, grid: int = 1024, rel_prominence: float = 1e-6) -> List[Peak]:
        """Local maxima of ``T00(t, .)`` with heights and FWHM widths.

        Works in seed coordinates: ``rho(T_n(s))`` is smooth in ``s`` even when
        the peak in ``x`` is extremely narrow, so a uniform ``s`` grid is an
        adaptive grid in ``x``.
        """
        if t <= 0:
            return []
        t = float(t)
        Lt = float(self.trajectory.position(t))
        peaks = []
        for lo, hi, n in self._window_pieces(t):
            if hi - lo <= 1e-12:
                continue
            for tau_pk, _, width in self._piece_peaks(lo, hi, n, grid, rel_prominence):
                x_pk = min(abs(tau_pk - t), Lt)
                peaks.append(Peak(x_pk, tau_pk, float(self.energy_density(t, x_pk)), width))
        peaks.sort(key=lambda p: p.position)
        return peaks


class ExtendedProfile(_FieldProfile):
    """Classical profile extended from the seed interval by the billiard map."""

    def __init__(self, base: InitialProfile, billiard: BilliardMap, quad_rel: float = 1e-8):
        super().__init__(billiard, base, quad_rel)
        self.base = base

    def _density_factor(self, sigma, A):
        return self.seed(sigma)
