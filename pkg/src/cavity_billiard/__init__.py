"""Parametric resonance in a one-dimensional vibrating cavity via light-ray billiards.

The right mirror follows a prescribed worldline ``L(t)``; the left mirror is
fixed at ``x = 0``.  Everything here works in units ``c = hbar = 1``.
"""

__version__ = "0.1.0"

from .trajectory import (
    MirrorTrajectory,
    make_law_wu,
    make_sinusoidal,
    make_static,
    make_tabulated,
    load_trajectory_table,
)
from .billiard import BilliardMap, BounceSequence
from .resonance import (
    ReturnPoint,
    PeriodicTrajectory,
    BandScanResult,
    DEGENERATE,
    find_return_points,
    find_periodic_trajectories,
    perturbation_check,
    scan_band,
)
from .field_classical import InitialProfile, ExtendedProfile
from .field_quantum import QuantumProfile, AnomalyAccumulator

__all__ = [
    "MirrorTrajectory",
    "make_static",
    "make_sinusoidal",
    "make_law_wu",
    "make_tabulated",
    "load_trajectory_table",
    "BilliardMap",
    "BounceSequence",
    "ReturnPoint",
    "PeriodicTrajectory",
    "BandScanResult",
    "DEGENERATE",
    "find_return_points",
    "find_periodic_trajectories",
    "perturbation_check",
    "scan_band",
    "InitialProfile",
    "ExtendedProfile",
    "QuantumProfile",
    "AnomalyAccumulator",
]
