"""Single-collision reflection laws for a particle hitting a moving target.

Velocities are dimensionless (c = 1).  A target mass of ``None`` (or
``math.inf``) stands for an infinitely heavy mirror, in which case the
Compton recoil factor is exactly one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional


class KinematicsDomainError(ValueError):
    pass


def _is_infinite_mass(M: Optional[float]) -> bool:
    return M is None or M == math.inf


@dataclass(frozen=True)
class Collision1D:
    """A head-on collision on a line.

    ``v`` is the particle velocity before the hit, ``u``/``u_prime`` the target
    velocity before/after.  ``E`` is the photon energy and ``M`` the target mass,
    both only needed by :meth:`photon_energy_after`.  With ``relativistic=True``
    every velocity must lie strictly inside (-1, 1); this is the only place the
    check happens.
    """

    v: float = 0.0
    u: float = 0.0
    u_prime: Optional[float] = None
    E: Optional[float] = None
    M: Optional[float] = None
    relativistic: bool = False

    def __post_init__(self):
        if self.u_prime is None:
            object.__setattr__(self, "u_prime", self.u)
        if self.relativistic:
            for name in ("v", "u", "u_prime"):
                val = getattr(self, name)
                if not abs(val) < 1.0:
                    raise KinematicsDomainError(f"|{name}| = {abs(val)!r} must be < 1")
        if self.E is not None:
            if not self.E > 0:
                raise KinematicsDomainError(f"photon energy must be positive, got {self.E!r}")
            if not abs(self.u) < 1.0:
                raise KinematicsDomainError(f"mirror velocity |u| = {abs(self.u)!r} must be < 1")
        if not _is_infinite_mass(self.M) and not self.M > 0:
            raise KinematicsDomainError(f"target mass must be positive, got {self.M!r}")

    def reflect(self) -> float:
        if self.relativistic:
            return math.tanh(math.atanh(self.u) + math.atanh(self.u_prime) - math.atanh(self.v))
        return self.u + self.u_prime - self.v

    def photon_energy_after(self) -> float:
        if self.E is None:
            raise KinematicsDomainError("photon energy E is required")
        doppler = (1.0 - self.u) / (1.0 + self.u)
        if _is_infinite_mass(self.M):
            return self.E * doppler
        compton = 1.0 + (2.0 * self.E / self.M) * math.sqrt(doppler)
        return self.E * doppler / compton


def reflect_nonrelativistic(v: float, u: float, u_prime: Optional[float] = None) -> float:
    """Galilean reflection: ``v + v' = u + u'``; heavy target when ``u_prime`` is omitted."""
    return Collision1D(v=v, u=u, u_prime=u_prime).reflect()


def reflect_relativistic(v: float, u: float, u_prime: Optional[float] = None) -> float:
    """Rapidities add up: ``artanh v + artanh v' = artanh u + artanh u'``."""
    return Collision1D(v=v, u=u, u_prime=u_prime, relativistic=True).reflect()


def photon_energy_after(E: float, u: float, M: Optional[float] = None) -> float:
    """Energy of a left-moving photon after hitting a mirror with velocity ``u``.

    Product of the Doppler factor ``(1-u)/(1+u)`` and the Compton recoil factor;
    ``M=None`` drops the recoil.
    """
    return Collision1D(u=u, E=E, M=M).photon_energy_after()
