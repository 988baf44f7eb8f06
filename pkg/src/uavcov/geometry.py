"""Deterministic per-scenario link geometry.

A UAV at height gamma with beamwidth omega illuminates a ground disc of
radius tan(omega/2)*gamma with flat gain 16*pi/omega^2 (zero outside), so
only UAVs within that horizontal distance can be heard at all.  Because
NLOS links decay faster than LOS links, serving a user from distance r1
excludes other UAVs only out to type-dependent bounds, computed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def cone_radius(omega: float, gamma: float) -> float:
    """Radius of the ground disc covered by the antenna main beam, m."""
    if not 0 < omega < math.pi:
        raise ValueError("omega must be in (0, pi)")
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    return math.tan(omega / 2.0) * gamma


def antenna_gain(omega: float) -> float:
    """Flat main-beam gain for a uniform cone pattern with perfect
    radiation efficiency; callers use 0 outside the cone."""
    if not 0 < omega < math.pi:
        raise ValueError("omega must be in (0, pi)")
    return 16.0 * math.pi / (omega * omega)


def association_probability(lam: float, u: float) -> float:
    """Probability at least one UAV covers the user: 1 - exp(-pi*lam*u^2)."""
    if lam < 0 or u < 0:
        raise ValueError("lam and u must be >= 0")
    return -math.expm1(-math.pi * lam * u * u)


@dataclass(frozen=True)
class LinkGeometry:
    u: float           # cone radius, m
    eta: float         # antenna gain, dimensionless
    gamma: float       # UAV height, m
    alpha_los: float
    alpha_nlos: float

    @classmethod
    def from_config(cls, cfg) -> "LinkGeometry":
        return cls(u=cone_radius(cfg.omega, cfg.gamma),
                   eta=antenna_gain(cfg.omega),
                   gamma=cfg.gamma,
                   alpha_los=cfg.alpha_los,
                   alpha_nlos=cfg.alpha_nlos)


def bound_nlos_given_los_serving(r1: float, geom: LinkGeometry) -> float:
    """Largest distance at which an NLOS UAV would out-power an LOS
    serving UAV at r1; 0 if no NLOS UAV can, however close.

    Computed in squared-distance space: b^2 = (r1^2+g^2)^(aL/aN) - g^2.
    """
    g2 = geom.gamma * geom.gamma
    b2 = (r1 * r1 + g2) ** (geom.alpha_los / geom.alpha_nlos) - g2
    return math.sqrt(b2) if b2 > 0.0 else 0.0


def bound_los_given_nlos_serving(r1: float, geom: LinkGeometry) -> float:
    """Smallest distance beyond which LOS UAVs are weaker than an NLOS
    serving UAV at r1, clamped to the cone radius.

    b = u means every LOS UAV must lie outside the coverage window.
    The power comparison is done on logs first so the exponentiation
    cannot overflow when the bound lands far outside the window.
    """
    g2 = geom.gamma * geom.gamma
    u2 = geom.u * geom.u
    ratio = geom.alpha_nlos / geom.alpha_los
    if ratio * math.log(r1 * r1 + g2) >= math.log(u2 + g2):
        return geom.u
    b2 = (r1 * r1 + g2) ** ratio - g2
    return math.sqrt(b2) if b2 > 0.0 else 0.0
