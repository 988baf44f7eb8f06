"""Square-grid urban blockage model.

Buildings sit on a square lattice (`beta` per m^2), each occupying a
centered square footprint so that a fraction `delta` of ground is built
up, with i.i.d. Rayleigh(`kappa`) heights.  A ground-to-air link of
horizontal length r crosses d = floor(r*sqrt(beta*delta)) buildings on
average, which makes the LOS probability a step function of r with
breakpoints every 1/sqrt(beta*delta) meters.

Two views of the same model live here: the closed-form step function
(`p_los`) and an explicit sampled grid (`sample_grid` + `is_los_explicit`)
whose empirical LOS frequency the step function approximates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class UrbanEnvironment:
    beta: float    # buildings per m^2
    delta: float   # built-up area fraction
    kappa: float   # Rayleigh scale of building heights, m

    @property
    def step_pitch(self) -> float:
        """Width of one LOS-probability step, 1/sqrt(beta*delta), m."""
        return 1.0 / math.sqrt(self.beta * self.delta)


@dataclass(frozen=True)
class BuildingGridRealization:
    """One sampled building grid around a user standing at the origin."""

    pitch: float           # grid cell side, m
    side: float            # building footprint side, m (side <= pitch)
    heights: np.ndarray    # (n, n) sampled building heights, m
    offset: np.ndarray     # world xy of the lower-left corner of cell (0, 0)

    def footprint(self, i: int, j: int) -> tuple[float, float, float, float]:
        """(xmin, xmax, ymin, ymax) of the building in cell (i, j)."""
        cx = self.offset[0] + (i + 0.5) * self.pitch
        cy = self.offset[1] + (j + 0.5) * self.pitch
        h = self.side / 2.0
        return cx - h, cx + h, cy - h, cy + h


def p_los_for_crossings(env: UrbanEnvironment, gamma: float, d: int) -> float:
    """LOS probability of a link that crosses exactly d buildings.

    The n-th crossed building is met where the link is at height
    gamma*(1 - (n+1/2)/d), and blocks unless its Rayleigh-distributed
    height falls below that.  d = 0 (no buildings crossed) is certain LOS.
    """
    if d <= 0:
        return 1.0
    prod = 1.0
    two_k2 = 2.0 * env.kappa ** 2
    for n in range(d):
        link_h = gamma - (n + 0.5) * gamma / d
        prod *= 1.0 - math.exp(-link_h * link_h / two_k2)
    return prod


def p_los(env: UrbanEnvironment, gamma: float, r: float) -> float:
    """LOS probability of a ground user to a UAV at height gamma and
    horizontal distance r; piecewise constant in r."""
    if gamma <= 0:
        raise ValueError("gamma must be > 0")
    if r < 0:
        raise ValueError("r must be >= 0")
    d = int(math.floor(r * math.sqrt(env.beta * env.delta)))
    return p_los_for_crossings(env, gamma, d)


def p_los_table(env: UrbanEnvironment, gamma: float, d_max: int) -> np.ndarray:
    """p_los values indexed by crossing count d = 0..d_max."""
    return np.array([p_los_for_crossings(env, gamma, d)
                     for d in range(d_max + 1)])


def los_breakpoints(env: UrbanEnvironment, r_max: float) -> list[float]:
    """Distances where p_los steps, in [0, r_max], plus r_max itself.

    Strictly increasing; p_los is constant on each open interval between
    consecutive entries.
    """
    if r_max <= 0:
        raise ValueError("r_max must be > 0")
    pitch = env.step_pitch
    points = [0.0]
    j = 1
    while j * pitch < r_max * (1.0 - 1e-12):
        points.append(j * pitch)
        j += 1
    points.append(r_max)
    return points


def sample_grid(env: UrbanEnvironment, window_radius: float,
                rng: np.random.Generator) -> BuildingGridRealization:
    """Sample one building-grid realization covering the window disc.

    The grid offset is uniform over one cell, redrawn until the user at
    the origin stands on street (outside every footprint).
    """
    if window_radius <= 0:
        raise ValueError("window_radius must be > 0")
    pitch = 1.0 / math.sqrt(env.beta)
    side = math.sqrt(env.delta / env.beta)
    half_cells = int(math.ceil(window_radius / pitch)) + 1
    n = 2 * half_cells + 1

    while True:
        sub = rng.random(2) * pitch
        offset = sub - half_cells * pitch
        # cell containing the origin, and its footprint
        i = int(math.floor((0.0 - offset[0]) / pitch))
        j = int(math.floor((0.0 - offset[1]) / pitch))
        cx = offset[0] + (i + 0.5) * pitch
        cy = offset[1] + (j + 0.5) * pitch
        if abs(cx) > side / 2.0 or abs(cy) > side / 2.0:
            break

    heights = rng.rayleigh(env.kappa, size=(n, n))
    return BuildingGridRealization(pitch=pitch, side=side, heights=heights,
                                   offset=offset)


def is_los_explicit(grid: BuildingGridRealization, gamma: float,
                    uav_xy) -> bool:
    """Ray test: does the link origin->(uav_xy, gamma) clear every building?

    The link height rises linearly from 0 at the user to gamma at the UAV,
    so a footprint crossed over the parameter range [t0, t1] blocks iff the
    building is at least gamma*t0 tall (minimum link height over the
    crossed sub-segment).
    """
    x, y = float(uav_xy[0]), float(uav_xy[1])
    if x == 0.0 and y == 0.0:
        return True  # vertical link; user stands on street

    n = grid.heights.shape[0]
    pitch, side = grid.pitch, grid.side
    pad = (pitch - side) / 2.0  # street margin inside each cell

    # candidate cells: all cells whose footprint bbox meets the segment bbox
    lo_i = int(math.floor((min(0.0, x) - pad - grid.offset[0]) / pitch))
    hi_i = int(math.floor((max(0.0, x) + pad - grid.offset[0]) / pitch))
    lo_j = int(math.floor((min(0.0, y) - pad - grid.offset[1]) / pitch))
    hi_j = int(math.floor((max(0.0, y) + pad - grid.offset[1]) / pitch))
    lo_i, hi_i = max(lo_i, 0), min(hi_i, n - 1)
    lo_j, hi_j = max(lo_j, 0), min(hi_j, n - 1)
    if lo_i > hi_i or lo_j > hi_j:
        return True

    ii, jj = np.meshgrid(np.arange(lo_i, hi_i + 1),
                         np.arange(lo_j, hi_j + 1), indexing="ij")
    cx = grid.offset[0] + (ii + 0.5) * pitch
    cy = grid.offset[1] + (jj + 0.5) * pitch

    # slab intersection of t -> (t*x, t*y) with each footprint AABB
    t0 = np.zeros_like(cx)
    t1 = np.ones_like(cx)
    for coord, c in ((x, cx), (y, cy)):
        amin, amax = c - side / 2.0, c + side / 2.0
        if coord != 0.0:
            ta = amin / coord
            tb = amax / coord
            t_lo = np.minimum(ta, tb)
            t_hi = np.maximum(ta, tb)
        else:
            inside = (amin <= 0.0) & (0.0 <= amax)
            t_lo = np.where(inside, 0.0, 2.0)   # 2.0 > 1 kills the interval
            t_hi = np.where(inside, 1.0, -1.0)
        t0 = np.maximum(t0, t_lo)
        t1 = np.minimum(t1, t_hi)

    crossed = t0 <= t1
    if not crossed.any():
        return True
    entry_height = gamma * t0
    blocked = crossed & (grid.heights[ii, jj] >= entry_height)
    return not bool(blocked.any())


def p_los_sigmoid(a: float, b: float, gamma: float, r) -> float:
    """Elevation-angle sigmoid LOS model used by other air-to-ground work.

    Parameters (a, b) are environment fits that must be supplied by the
    caller; none are shipped.  At r = 0 the elevation angle is 90 degrees.
    """
    if gamma <= 0:
        raise ValueError("gamma must be > 0")
    angle_deg = np.degrees(np.arctan2(gamma, r))
    return 1.0 / (1.0 + a * np.exp(-b * (angle_deg - a)))
