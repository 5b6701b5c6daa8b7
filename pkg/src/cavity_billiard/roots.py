"""Vectorized root finding for strictly increasing scalar functions.

Used for the retardation relations ``t + L(t) = tau`` and ``t - L(t) = tau``,
both strictly increasing in ``t`` for a subluminal mirror.
"""
from __future__ import annotations

import numpy as np


class RootFindingError(RuntimeError):
    pass


def solve_increasing(fun, target, guess, *, step=1.0, tol=1e-12, domain=None,
                     max_expand=200, max_iter=100):
    """Solve ``g(t) = target`` elementwise for an increasing ``g``.

    ``fun(t)`` must return ``(g(t), g'(t))``.  A bracket is grown geometrically
    from ``guess`` (initial width ``step``), then safeguarded Newton steps are
    taken, falling back to bisection whenever Newton leaves the bracket.
    Returns ``t`` with ``|g(t) - target| <= tol``.
    """
    target = np.asarray(target, dtype=float)
    shape = target.shape
    target = target.ravel()
    t = np.broadcast_to(np.asarray(guess, dtype=float), shape).ravel().copy()
    if domain is not None:
        t = np.clip(t, domain[0], domain[1])
    g, dg = fun(t)
    r = g - target
    lo = np.where(r <= 0, t, np.nan)
    hi = np.where(r >= 0, t, np.nan)
    r_lo = np.where(r <= 0, r, np.nan)
    r_hi = np.where(r >= 0, r, np.nan)

    # grow the bracket where one side is still missing
    for side, sign in ((hi, 1.0), (lo, -1.0)):
        todo = np.flatnonzero(np.isnan(side))
        h = np.full(todo.size, float(step))
        base = t[todo].copy()
        for _ in range(max_expand):
            if todo.size == 0:
                break
            cand = base + sign * h
            stuck = np.zeros(todo.size, dtype=bool)
            if domain is not None:
                clipped = np.clip(cand, domain[0], domain[1])
                stuck = clipped == base
                cand = clipped
            gc, _ = fun(cand)
            rc = gc - target[todo]
            found = rc >= 0 if sign > 0 else rc <= 0
            idx = todo[found]
            if sign > 0:
                hi[idx], r_hi[idx] = cand[found], rc[found]
                lo[todo[~found]] = cand[~found]
                r_lo[todo[~found]] = rc[~found]
            else:
                lo[idx], r_lo[idx] = cand[found], rc[found]
                hi[todo[~found]] = cand[~found]
                r_hi[todo[~found]] = rc[~found]
            if np.any(stuck & ~found):
                raise RootFindingError("cannot bracket root: trajectory undefined over the needed range")
            keep = ~found
            base, h, todo = cand[keep], 2.0 * h[keep], todo[keep]
        if todo.size:
            raise RootFindingError("bracket expansion failed")

    # safeguarded Newton
    t = np.where(np.abs(r_lo) < np.abs(r_hi), lo, hi)
    exact = (r_lo == 0) | (r_hi == 0)
    active = np.flatnonzero(~exact)
    eps = np.finfo(float).eps
    for _ in range(max_iter):
        if active.size == 0:
            break
        ta = t[active]
        g, dg = fun(ta)
        ra = g - target[active]
        neg = ra < 0
        lo[active[neg]] = ta[neg]
        hi[active[~neg]] = ta[~neg]
        with np.errstate(divide="ignore", invalid="ignore"):
            tn = ta - ra / dg
        a, b = lo[active], hi[active]
        bad = ~np.isfinite(tn) | (tn <= a) | (tn >= b)
        tn = np.where(bad, 0.5 * (a + b), tn)
        scale = np.maximum(1.0, np.abs(tn))
        done = (np.abs(tn - ta) <= 4 * eps * scale) | (ra == 0) | ((b - a) <= 4 * eps * scale)
        t[active] = np.where(ra == 0, ta, tn)
        active = active[~done]

    g, _ = fun(t)
    resid = np.abs(g - target)
    if np.any(~(resid <= tol)):
        worst = float(np.nanmax(resid))
        raise RootFindingError(f"root residual {worst:.3e} exceeds tolerance {tol:.3e}")
    return t.reshape(shape) if shape else float(t[0])
