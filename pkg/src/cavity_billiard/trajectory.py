"""Prescribed worldlines ``L(t)`` of the right cavity mirror.

Every trajectory exposes analytic derivatives up to third order, since the
Schwarzian of the billiard function needs ``L'''`` at the bounce times.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline


class TrajectoryError(ValueError):
    pass


class RegularityWarning(UserWarning):
    pass


SUBLUMINAL_SCAN_POINTS = 10_000


@dataclass(frozen=True)
class MirrorTrajectory:
    """Base class; subclasses implement :meth:`derivatives`.

    ``period`` is the mirror oscillation period (``None`` when not periodic),
    ``smoothness`` the order of continuous differentiability, ``domain`` the
    time window on which the trajectory is defined (``None`` = whole line).
    """

    L0: float
    kind: str = field(init=False, default="")
    period: Optional[float] = field(init=False, default=None)
    smoothness: int = field(init=False, default=3)
    domain: Optional[tuple] = field(init=False, default=None)

    def derivatives(self, t, order: int = 3):
        """Return ``(L, L', ..., L^(order))`` evaluated at ``t`` (scalar or array)."""
        raise NotImplementedError

    def position(self, t):
        return self.derivatives(t, 0)[0]

    def velocity(self, t):
        return self.derivatives(t, 1)[1]

    def acceleration(self, t):
        return self.derivatives(t, 2)[2]

    def jerk(self, t):
        return self.derivatives(t, 3)[3]

    __call__ = position

    @property
    def params(self) -> dict:
        return {"L0": self.L0}

    def _check_subluminal(self, t0: float, t1: float):
        ts = np.linspace(t0, t1, SUBLUMINAL_SCAN_POINTS + 1)
        L, Ld = self.derivatives(ts, 1)
        bad = np.flatnonzero(np.abs(Ld) >= 1.0)
        if bad.size:
            raise TrajectoryError(f"mirror velocity |L'| >= 1 at t = {ts[bad[0]]!r}")
        bad = np.flatnonzero(L <= 0.0)
        if bad.size:
            raise TrajectoryError(f"mirror position L <= 0 at t = {ts[bad[0]]!r}")


def _check_length(name, value):
    if not (np.isfinite(value) and value > 0):
        raise TrajectoryError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class StaticTrajectory(MirrorTrajectory):
    def __post_init__(self):
        _check_length("L0", self.L0)
        object.__setattr__(self, "kind", "static")

    def derivatives(self, t, order=3):
        t = np.asarray(t, dtype=float)
        zero = np.zeros_like(t)
        out = [zero + self.L0] + [zero] * order
        return tuple(x if x.ndim else float(x) for x in out)


@dataclass(frozen=True)
class SinusoidalTrajectory(MirrorTrajectory):
    """``L(t) = L0 + dL sin(omega t)``."""

    dL: float = 0.0
    omega: float = 0.0

    def __post_init__(self):
        _check_length("L0", self.L0)
        if not (0 < self.dL < self.L0):
            raise TrajectoryError(f"need 0 < dL < L0, got dL={self.dL!r}, L0={self.L0!r}")
        if not self.omega > 0:
            raise TrajectoryError(f"omega must be positive, got {self.omega!r}")
        if not self.omega * self.dL < 1:
            raise TrajectoryError(
                f"need omega*dL < 1 (subluminal mirror), got omega*dL = {self.omega * self.dL!r}"
            )
        object.__setattr__(self, "kind", "sinusoidal")
        object.__setattr__(self, "period", 2 * math.pi / self.omega)
        self._check_subluminal(0.0, self.period)

    @property
    def params(self):
        return {"L0": self.L0, "dL": self.dL, "omega": self.omega}

    def derivatives(self, t, order=3):
        t = np.asarray(t, dtype=float)
        w, a = self.omega, self.dL
        s, c = np.sin(w * t), np.cos(w * t)
        out = [self.L0 + a * s, w * a * c, -w * w * a * s, -w ** 3 * a * c][: order + 1]
        return tuple(x if x.ndim else float(x) for x in out)


@dataclass(frozen=True)
class LawWuTrajectory(MirrorTrajectory):
    """Mirror motion whose billiard function is known in closed form.

    ``L(t) = L0 + (arcsin(sin(a) cos(w t)) - a) / w`` with ``w = N pi / L0`` and
    ``a = w dL / 2``.  The principal arcsin branch is enough because
    ``|sin(a) cos(w t)| <= sin(a) < 1``.
    """

    dL: float = 0.0
    N: int = 1

    def __post_init__(self):
        _check_length("L0", self.L0)
        if not (0 < self.dL < self.L0):
            raise TrajectoryError(f"need 0 < dL < L0, got dL={self.dL!r}, L0={self.L0!r}")
        if int(self.N) != self.N or self.N < 1:
            raise TrajectoryError(f"N must be a positive integer, got {self.N!r}")
        if self.half_angle >= math.pi / 2:
            raise TrajectoryError("need omega_N * dL / 2 < pi/2")
        object.__setattr__(self, "kind", "law_wu")
        object.__setattr__(self, "period", 2 * math.pi / self.omega)
        self._check_subluminal(0.0, self.period)

    @property
    def omega(self) -> float:
        return self.N * math.pi / self.L0

    @property
    def half_angle(self) -> float:
        return self.omega * self.dL / 2

    @property
    def params(self):
        return {"L0": self.L0, "dL": self.dL, "N": self.N}

    def derivatives(self, t, order=3):
        t = np.asarray(t, dtype=float)
        w, a = self.omega, self.half_angle
        s = math.sin(a)
        sn, c = np.sin(w * t), np.cos(w * t)
        q = 1.0 - (s * c) ** 2
        out = [self.L0 + (np.arcsin(s * c) - a) / w]
        if order >= 1:
            out.append(-s * sn / np.sqrt(q))
        if order >= 2:
            out.append(-s * w * c * (1 - s * s) * q ** -1.5)
        if order >= 3:
            out.append(s * w * w * (1 - s * s) * sn * (1 + 2 * (s * c) ** 2) * q ** -2.5)
        return tuple(x if x.ndim else float(x) for x in out)


@dataclass(frozen=True)
class TabulatedTrajectory(MirrorTrajectory):
    """Not-a-knot cubic spline through sampled ``(t, L)`` pairs.

    C^2 only: the third derivative is piecewise constant.
    """

    times: tuple = ()
    lengths: tuple = ()

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        L = np.asarray(self.lengths, dtype=float)
        if t.ndim != 1 or t.shape != L.shape:
            raise TrajectoryError("times and lengths must be 1-d arrays of equal length")
        if t.size < 4:
            raise TrajectoryError(f"a cubic spline needs at least 4 samples, got {t.size}")
        if np.any(np.diff(t) <= 0):
            i = int(np.flatnonzero(np.diff(t) <= 0)[0])
            raise TrajectoryError(f"sample times not strictly increasing at t = {t[i + 1]!r}")
        spline = CubicSpline(t, L, bc_type="not-a-knot")
        object.__setattr__(self, "_splines", [spline] + [spline.derivative(k) for k in (1, 2, 3)])
        object.__setattr__(self, "kind", "tabulated")
        object.__setattr__(self, "smoothness", 2)
        object.__setattr__(self, "domain", (float(t[0]), float(t[-1])))
        # dense scan also covers every knot interval
        n = max(SUBLUMINAL_SCAN_POINTS, 8 * t.size)
        ts = np.union1d(np.linspace(t[0], t[-1], n + 1), t)
        Lv, Ldv = spline(ts), self._splines[1](ts)
        bad = np.flatnonzero((np.abs(Ldv) >= 1.0) | (Lv <= 0))
        if bad.size:
            raise TrajectoryError(f"interpolated mirror is superluminal or non-positive at t = {ts[bad[0]]!r}")

    def derivatives(self, t, order=3):
        t = np.asarray(t, dtype=float)
        lo, hi = self.domain
        if np.any((t < lo) | (t > hi)):
            raise TrajectoryError(f"time outside tabulated window [{lo!r}, {hi!r}]")
        out = [self._splines[k](t) for k in range(order + 1)]
        return tuple(np.asarray(x) if np.ndim(x) else float(x) for x in out)


def make_static(L0: float) -> MirrorTrajectory:
    return StaticTrajectory(L0=float(L0))


def make_sinusoidal(L0: float, dL: float, omega: float) -> MirrorTrajectory:
    return SinusoidalTrajectory(L0=float(L0), dL=float(dL), omega=float(omega))


def make_law_wu(L0: float, dL: float, N: int) -> MirrorTrajectory:
    return LawWuTrajectory(L0=float(L0), dL=float(dL), N=int(N))


def make_tabulated(samples: Sequence, interpolation_order: int = 3, L0: Optional[float] = None) -> MirrorTrajectory:
    """Spline trajectory from ``(t, L)`` samples.

    ``L0`` defaults to the interpolated ``L(0)`` when 0 lies in the window,
    otherwise to the first sample.
    """
    if interpolation_order != 3:
        raise TrajectoryError(f"only cubic interpolation (order 3) is supported, got {interpolation_order}")
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise TrajectoryError("samples must be a sequence of (t, L) pairs")
    t, L = arr[:, 0], arr[:, 1]
    if L0 is None:
        if t.size >= 4 and t[0] <= 0.0 <= t[-1] and np.all(np.diff(t) > 0):
            L0 = float(CubicSpline(t, L, bc_type="not-a-knot")(0.0))
        else:
            L0 = float(L[0])
    _check_length("L0", L0)
    return TabulatedTrajectory(L0=float(L0), times=tuple(t), lengths=tuple(L))


def load_trajectory_table(path, L0: Optional[float] = None) -> MirrorTrajectory:
    """Read a whitespace-separated two-column ``t L`` file ('#' starts a comment)."""
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise TrajectoryError(f"{path}: expected two columns (t, L), got {data.shape[1]}")
    return make_tabulated(data, 3, L0=L0)


def warn_if_not_c3(trajectory: MirrorTrajectory, what: str):
    if trajectory.smoothness < 3:
        warnings.warn(
            f"{what} needs a C^3 mirror trajectory; {trajectory.kind} is only "
            f"C^{trajectory.smoothness} (third derivative evaluated piecewise)",
            RegularityWarning,
            stacklevel=3,
        )
