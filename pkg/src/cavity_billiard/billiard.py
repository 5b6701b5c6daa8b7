"""The billiard function ``f`` of a cavity with a moving right mirror.

``f`` is defined by ``f(t + L(t)) = t - L(t)``: a ray leaving the fixed mirror
at time ``tau`` came from it, one round trip earlier, at ``f(tau)``.  Bounce
times ``T_k = f^{-1}(T_{k-1})`` and cumulative Doppler factors
``D_n = prod_k f'(T_k)`` follow by iteration.

All public methods accept scalars or numpy arrays.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .roots import solve_increasing
from .trajectory import MirrorTrajectory


def schwarzian_from_derivatives(d1, d2, d3):
    """``S = f'''/f' - 3/2 (f''/f')^2``."""
    d1 = np.asarray(d1, dtype=float)
    if np.any(d1 == 0):
        raise ZeroDivisionError("Schwarzian undefined where the first derivative vanishes")
    q = np.asarray(d2) / d1
    out = np.asarray(d3) / d1 - 1.5 * q * q
    return out if out.ndim else float(out)


def _derivs_from_mirror(Ld, Ldd, Lddd):
    """``(f', f'', f''')`` at the ray whose retarded mirror time has the given L-derivatives.

    With ``dt*/dtau = 1/(1 + L')``:
    ``f' = (1-L')/(1+L')``, ``f'' = -2L''/(1+L')^3``,
    ``f''' = (-2L'''(1+L') + 6L''^2)/(1+L')^5``.
    """
    p = 1.0 + Ld
    d1 = (1.0 - Ld) / p
    d2 = -2.0 * Ldd / p ** 3
    d3 = (-2.0 * Lddd * p + 6.0 * Ldd * Ldd) / p ** 5
    return d1, d2, d3


def _out(x):
    x = np.asarray(x)
    return x if x.ndim else float(x)


@dataclass
class BounceSequence:
    """Iterated bounces ``T_0 = tau0, T_1, ..., T_n`` of rays starting at ``tau0``.

    Arrays have the bounce index as leading axis; trailing axes follow ``tau0``.
    ``dopplers[k-1]`` is ``D_k`` and ``step_dopplers[k-1]`` is ``f'(T_k)``.
    """

    tau0: np.ndarray
    times: np.ndarray
    retarded: np.ndarray
    step_dopplers: np.ndarray
    log_dopplers: np.ndarray
    schwarzians: np.ndarray

    @property
    def n(self) -> int:
        return self.times.shape[0] - 1

    @property
    def dopplers(self) -> np.ndarray:
        return np.exp(self.log_dopplers)

    def anomaly(self) -> np.ndarray:
        """Cumulative anomaly ``A_k`` for ``k = 1..n``."""
        terms = np.exp(-2.0 * self.log_dopplers) * self.schwarzians
        return -np.cumsum(terms, axis=0) / (24.0 * math.pi)


class BilliardMap:
    """Numerical billiard function of a mirror trajectory.

    ``root_tolerance`` is the absolute residual accepted in the retardation
    solves (default ``1e-12 * max(1, L0)``); ``bracket_step`` the initial width
    of the bracket search.
    """

    def __init__(self, trajectory: MirrorTrajectory, root_tolerance: Optional[float] = None,
                 bracket_step: Optional[float] = None):
        self.trajectory = trajectory
        L0 = trajectory.L0
        self.L0 = L0
        self.root_tolerance = 1e-12 * max(1.0, L0) if root_tolerance is None else float(root_tolerance)
        self.bracket_step = 0.25 * L0 if bracket_step is None else float(bracket_step)

    # -- retardation solves -------------------------------------------------
    def _solve(self, tau, sign, guess=None):
        """Solve ``t + sign*L(t) = tau`` for t."""
        traj = self.trajectory

        def fun(t):
            L, Ld = traj.derivatives(t, 1)
            return t + sign * L, 1.0 + sign * Ld

        tau = np.asarray(tau, dtype=float)
        if guess is None:
            guess = tau - sign * self.L0
            if traj.domain is not None:
                guess = np.clip(guess, *traj.domain)
            guess = tau - sign * traj.position(guess)
        return solve_increasing(fun, tau, guess, step=self.bracket_step, tol=self.root_tolerance,
                                domain=traj.domain)

    def retarded_time(self, tau):
        """``t*`` with ``t* + L(t*) = tau``."""
        return self._solve(tau, +1.0)

    def advanced_time(self, tau):
        """``t*`` with ``t* - L(t*) = tau`` (the mirror hit of a ray leaving x=0 at tau)."""
        return self._solve(tau, -1.0)

    def f_eval(self, tau):
        ts = self.retarded_time(tau)
        return _out(ts - self.trajectory.position(ts))

    __call__ = f_eval

    def f_inverse(self, tau):
        ts = self.advanced_time(tau)
        return _out(ts + self.trajectory.position(ts))

    def f_derivatives(self, tau):
        """``(f', f'', f''')`` at ``tau``; all evaluated at the retarded time."""
        ts = self.retarded_time(tau)
        _, Ld, Ldd, Lddd = self.trajectory.derivatives(ts, 3)
        return tuple(_out(x) for x in _derivs_from_mirror(Ld, Ldd, Lddd))

    def schwarzian_f(self, tau):
        return schwarzian_from_derivatives(*self.f_derivatives(tau))

    # -- forward and backward iteration -------------------------------------
    def step_forward(self, tau, guess=None):
        """One bounce ``tau -> f^{-1}(tau)``.

        Returns ``(T_next, t_star, f'(T_next), S[f](T_next))``.
        """
        ts = self.advanced_time(tau) if guess is None else self._solve(tau, -1.0, guess)
        L, Ld, Ldd, Lddd = self.trajectory.derivatives(ts, 3)
        d1, d2, d3 = _derivs_from_mirror(Ld, Ldd, Lddd)
        return ts + L, ts, d1, d3 / d1 - 1.5 * (d2 / d1) ** 2

    def step_backward(self, tau):
        """One pull-back ``tau -> f(tau)``; returns ``(f(tau), f'(tau), S[f](tau))``."""
        ts = self.retarded_time(tau)
        L, Ld, Ldd, Lddd = self.trajectory.derivatives(ts, 3)
        d1, d2, d3 = _derivs_from_mirror(Ld, Ldd, Lddd)
        return ts - L, d1, d3 / d1 - 1.5 * (d2 / d1) ** 2

    def iterate_bounces(self, tau0, n: int) -> BounceSequence:
        if n < 0:
            raise ValueError("n must be non-negative")
        tau0 = np.asarray(tau0, dtype=float)
        times = np.empty((n + 1,) + tau0.shape)
        retarded = np.empty((n,) + tau0.shape)
        fp = np.empty((n,) + tau0.shape)
        sch = np.empty((n,) + tau0.shape)
        times[0] = tau0
        prev_ts = None
        for k in range(1, n + 1):
            # bounces are ~2 L0 apart: warm-start from the previous mirror hit
            guess = None if prev_ts is None else prev_ts + (times[k - 1] - times[k - 2])
            T, ts, d1, s = self.step_forward(times[k - 1], guess)
            times[k], retarded[k - 1], fp[k - 1], sch[k - 1] = T, ts, d1, s
            prev_ts = ts
        logD = np.cumsum(np.log(fp), axis=0) if n else np.empty((0,) + tau0.shape)
        return BounceSequence(tau0, times, retarded, fp, logD, sch)

    def pullback(self, tau, lower: Optional[float] = None, upper: Optional[float] = None):
        """Map ``tau`` back into the seed interval ``[-L(0), L(0)]`` by iterating ``f``.

        Returns ``(sigma, n, log_fp, schw)`` with ``tau = T_n(sigma)``.
        ``log_fp[r]`` and ``schw[r]`` hold ``log f'`` and ``S[f]`` at
        ``T_{n-r}(sigma)`` for ``r < n`` and zero beyond, so row 0 is the
        latest bounce.
        """
        L_start = self.trajectory.position(0.0)
        lower = -L_start if lower is None else lower
        upper = L_start if upper is None else upper
        tau = np.atleast_1d(np.asarray(tau, dtype=float)).copy()
        if np.any(tau < lower - self.root_tolerance):
            raise ValueError(f"tau must be >= {lower!r} (forward evolution only)")
        n = np.zeros(tau.shape, dtype=int)
        rows_fp, rows_s = [], []
        active = np.flatnonzero(tau > upper)
        while active.size:
            new, d1, s = self.step_backward(tau[active])
            lfp = np.zeros(tau.shape)
            ss = np.zeros(tau.shape)
            lfp[active] = np.log(d1)
            ss[active] = s
            rows_fp.append(lfp)
            rows_s.append(ss)
            tau[active] = new
            n[active] += 1
            active = active[new > upper]
        # rows are currently in pull-back order (row j = step j) which for a
        # point with n steps is T_n, T_{n-1}, ..., T_1: already latest-first.
        if rows_fp:
            log_fp, schw = np.array(rows_fp), np.array(rows_s)
        else:
            log_fp = np.zeros((0,) + tau.shape)
            schw = np.zeros((0,) + tau.shape)
        return tau, n, log_fp, schw


def pullback_factors(log_fp, schw):
    """``(log D_n(sigma), A_n(sigma))`` from the rows returned by :meth:`BilliardMap.pullback`."""
    if log_fp.shape[0] == 0:
        z = np.zeros(log_fp.shape[1:])
        return z, z.copy()
    # suffix sums: C[r] = sum_{r' >= r} log f'  ==  log D_{n-r}(sigma)
    C = np.cumsum(log_fp[::-1], axis=0)[::-1]
    A = -np.sum(np.exp(-2.0 * C) * schw, axis=0) / (24.0 * math.pi)
    return C[0], A


class BounceCache:
    """Grow-only per-node cache of forward bounce state.

    For each start point ``sigma`` stores ``(k, T_k, t*_k, log D_k, sum_j D_j^-2 S[f](T_j))``
    so that requests for increasing ``n`` only pay for the new bounces.
    """

    def __init__(self, billiard: BilliardMap, max_entries: int = 2_000_000):
        self.billiard = billiard
        self.max_entries = max_entries
        self._store: dict = {}
        self._lock = threading.Lock()

    def __len__(self):
        return len(self._store)

    def advance(self, sigma, n: int):
        """``(T_n, log D_n, A_n)`` at the start points ``sigma``."""
        sigma = np.asarray(sigma, dtype=float)
        flat = sigma.ravel()
        m = flat.size
        k = np.zeros(m, dtype=int)
        T = flat.copy()
        ts = np.full(m, np.nan)
        logD = np.zeros(m)
        ssum = np.zeros(m)
        store = self._store
        for i, key in enumerate(flat.tolist()):
            st = store.get(key)
            if st is not None and st[0] <= n:
                k[i], T[i], ts[i], logD[i], ssum[i] = st
        for step in range(int(n - k.min()) if m else 0):
            act = np.flatnonzero(k < n)
            if act.size == 0:
                break
            guess = ts[act] + 2.0 * self.billiard.L0
            guess = np.where(np.isnan(guess), T[act] + self.billiard.L0, guess)
            Tn, tsn, d1, s = self.billiard.step_forward(T[act], guess)
            logD[act] += np.log(d1)
            ssum[act] += np.exp(-2.0 * logD[act]) * s
            T[act], ts[act] = Tn, tsn
            k[act] += 1
        if len(store) + m <= self.max_entries:
            with self._lock:
                for i, key in enumerate(flat.tolist()):
                    old = store.get(key)
                    if old is None or old[0] < n:
                        store[key] = (n, T[i], ts[i], logD[i], ssum[i])
        A = -ssum / (24.0 * math.pi)
        shape = sigma.shape
        return T.reshape(shape), logD.reshape(shape), A.reshape(shape)
