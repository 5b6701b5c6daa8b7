"""Oracle-vs-engine cross-checks behind ``cavity-billiard verify``."""
from __future__ import annotations

import math
import traceback
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from . import oracles
from .billiard import BilliardMap
from .field_quantum import QuantumProfile, casimir_density
from .resonance import scan_band
from .trajectory import make_law_wu, make_sinusoidal, make_static

INJECTED_ERROR = 1e-2


@dataclass
class CheckResult:
    name: str
    residual: float
    tol: float
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None and np.isfinite(self.residual) and self.residual <= self.tol


def _rel(engine, oracle, floor=0.0):
    engine = np.asarray(engine, dtype=float)
    oracle = np.asarray(oracle, dtype=float)
    return float(np.max(np.abs(engine - oracle) / np.maximum(np.abs(oracle), floor)))


# each check returns (engine values, oracle values, residual function, tol)
def _lawwu_billiard():
    lw = make_law_wu(1.0, 0.1, 2)
    forms = oracles.LawWuClosedForms(1.0, 0.1, 2)
    tau = np.linspace(-1.0, -1.0 + 3 * lw.period, 1000)
    return BilliardMap(lw).f_eval(tau), oracles.lawwu_billiard(forms, tau), lambda e, o: float(np.max(np.abs(e - o))), 1e-9


def _lawwu_doppler():
    lw = make_law_wu(1.0, 0.1, 2)
    forms = oracles.LawWuClosedForms(1.0, 0.1, 2)
    tau = np.linspace(-0.95, 0.95, 25)
    seq = BilliardMap(lw).iterate_bounces(tau, 40)
    n = np.arange(1, 41)[:, None]
    return seq.dopplers, oracles.lawwu_doppler(forms, tau[None, :], n), _rel, 1e-8


def _sin_doppler():
    eng, ora = [], []
    for N in (1, 2):
        forms = oracles.SinusoidalClosedForms(1.0, 0.01, N)
        bm = BilliardMap(make_sinusoidal(1.0, 0.01, forms.omega_N))
        plus, _ = oracles.sin_starting_points(forms)
        seq = bm.iterate_bounces(np.array(plus), 50)
        eng.append(seq.dopplers.ravel())
        ora.append(np.repeat(oracles.sin_doppler(forms, np.arange(1, 51)), len(plus)))
    return np.concatenate(eng), np.concatenate(ora), _rel, 1e-8


def _sin_anomaly():
    eng, ora = [], []
    for N in (1, 2):
        forms = oracles.SinusoidalClosedForms(1.0, 0.01, N)
        bm = BilliardMap(make_sinusoidal(1.0, 0.01, forms.omega_N))
        plus, _ = oracles.sin_starting_points(forms)
        eng.append(bm.iterate_bounces(plus[0], 30).anomaly())
        ora.append(oracles.sin_anomaly(forms, np.arange(1, 31)))
    return np.concatenate(eng), np.concatenate(ora), _rel, 1e-5


def _lawwu_rho():
    forms = oracles.LawWuClosedForms(1.0, 0.1, 2)
    qp = QuantumProfile(BilliardMap(make_law_wu(1.0, 0.1, 2)))
    rng = np.random.default_rng(7)
    sigma = rng.uniform(-1.0, 1.0, 40)
    n = rng.integers(0, 31, 40)
    tau = np.array([qp.forward(np.array([s]), int(k))[0][0] for s, k in zip(sigma, n)])
    return qp.rho_at(tau), oracles.lawwu_rho(forms, tau, n), _rel, 1e-6


def _lawwu_energy():
    forms = oracles.LawWuClosedForms(1.0, 0.1, 2)
    qp = QuantumProfile(BilliardMap(make_law_wu(1.0, 0.1, 2)))
    ns = np.array([1, 5, 20])
    eng = np.array([qp.quantum_total_energy(1.0, int(k)) for k in ns])
    return eng, oracles.lawwu_energy(forms, ns), _rel, 1e-6


def _band_exponent():
    r = np.array([-0.008, -0.004, 0.0, 0.003, 0.0075])
    w1 = math.pi
    omegas = w1 / (1 - r)
    res = scan_band(1.0, 0.01, omegas=omegas, N=1)
    ora = [oracles.band_exponent(oracles.SinusoidalClosedForms(1.0, 0.01, 1, w - w1)) for w in omegas]
    return res.growth_exponent, np.array(ora), _rel, 1e-6


def _static_vacuum():
    qp = QuantumProfile(BilliardMap(make_static(1.0)))
    tau = np.linspace(-1.0, 40.0, 200)
    eng = np.append(qp.rho_at(tau), qp.total_energy(7.3))
    ora = np.append(np.full(tau.shape, casimir_density(1.0)), -math.pi / 24)
    return eng, ora, _rel, 1e-12


def _growth_coefficient():
    forms = oracles.SinusoidalClosedForms(1.0, 0.01, 2)
    bm = BilliardMap(make_sinusoidal(1.0, 0.01, forms.omega_N))
    qp = QuantumProfile(bm)
    from .resonance import find_periodic_trajectories
    pos = [p for p in find_periodic_trajectories(bm) if p.sign == "positive"][0]
    return np.array([qp.growth_coefficient(pos)]), np.array([oracles.sin_growth_coefficient(forms)]), _rel, 1e-6


CHECKS: List[tuple] = [
    ("lawwu_billiard", _lawwu_billiard),
    ("lawwu_doppler", _lawwu_doppler),
    ("sin_doppler", _sin_doppler),
    ("sin_anomaly", _sin_anomaly),
    ("lawwu_rho", _lawwu_rho),
    ("lawwu_energy", _lawwu_energy),
    ("band_exponent", _band_exponent),
    ("static_vacuum", _static_vacuum),
    ("growth_coefficient", _growth_coefficient),
]


def run_checks(inject_error: Optional[str] = None, names=None) -> List[CheckResult]:
    """Run every check; a failing or crashing check does not stop the others.

    ``inject_error`` names a check (or ``all``) whose engine values get a
    relative error of 1e-2, to confirm that breaches are flagged.
    """
    out = []
    for name, fn in CHECKS:
        if names is not None and name not in names:
            continue
        try:
            eng, ora, resid, tol = fn()
            eng = np.asarray(eng, dtype=float)
            if inject_error in (name, "all"):
                eng = eng * (1 + INJECTED_ERROR) + INJECTED_ERROR * (eng == 0)
            out.append(CheckResult(name, resid(eng, np.asarray(ora, dtype=float)), tol))
        except Exception as exc:
            out.append(CheckResult(name, float("nan"), float("nan"),
                                   f"{type(exc).__name__}: {exc}".splitlines()[0] or traceback.format_exc(limit=1)))
    return out
