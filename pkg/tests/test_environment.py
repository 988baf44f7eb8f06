import math

import numpy as np
import pytest

from uavcov import (BuildingGridRealization, UrbanEnvironment,
                    is_los_explicit, los_breakpoints, p_los, p_los_sigmoid,
                    sample_grid)

PITCH = 81.64965809277261  # 1/sqrt(300e-6 * 0.5)


def test_p_los_no_buildings_crossed(env_table1):
    # r*sqrt(beta*delta) < 1 -> zero crossings -> certain LOS
    assert p_los(env_table1, 100.0, 50.0) == 1.0
    assert p_los(env_table1, 100.0, 0.0) == 1.0


def test_p_los_single_crossing(env_table1):
    # one building met at link height 50: 1 - exp(-50^2 / (2*50^2))
    expected = 1.0 - math.exp(-0.5)
    assert p_los(env_table1, 100.0, 100.0) == pytest.approx(expected,
                                                            rel=1e-12)


def test_p_los_two_crossings(env_table1):
    # crossings at link heights 75 and 25
    expected = ((1.0 - math.exp(-75.0 ** 2 / 5000.0))
                * (1.0 - math.exp(-25.0 ** 2 / 5000.0)))
    assert p_los(env_table1, 100.0, 200.0) == pytest.approx(expected,
                                                            rel=1e-12)


def test_p_los_bounds_and_monotone(env_table1):
    rs = np.linspace(0.0, 10.0 * PITCH, 400)
    for gamma in (25.0, 50.0, 100.0, 200.0):
        vals = [p_los(env_table1, gamma, r) for r in rs]
        assert all(0.0 <= v <= 1.0 for v in vals)
        # checked numerically on the breakpoint grid
        steps = [p_los(env_table1, gamma, (j + 0.5) * PITCH)
                 for j in range(10)]
        assert all(a >= b for a, b in zip(steps, steps[1:]))


def test_p_los_piecewise_constant(env_table1):
    bps = los_breakpoints(env_table1, 500.0)
    for lo, hi in zip(bps, bps[1:]):
        a = p_los(env_table1, 100.0, lo + 0.25 * (hi - lo))
        b = p_los(env_table1, 100.0, lo + 0.75 * (hi - lo))
        assert a == b


def test_p_los_kappa_to_zero():
    env = UrbanEnvironment(beta=300e-6, delta=0.5, kappa=1e-12)
    for r in (50.0, 200.0, 800.0):
        assert p_los(env, 100.0, r) == pytest.approx(1.0)


def test_breakpoints_table1(env_table1):
    bps = los_breakpoints(env_table1, 200.0)
    assert bps == pytest.approx([0.0, PITCH, 2 * PITCH, 200.0])


def test_breakpoints_short_window(env_table1):
    assert los_breakpoints(env_table1, 50.0) == [0.0, 50.0]


def test_breakpoints_no_duplicate_endpoint(env_table1):
    bps = los_breakpoints(env_table1, PITCH)
    assert bps == [0.0, PITCH]
    assert len(bps) == len(set(bps))


def test_sample_grid_dimensions(env_table1):
    rng = np.random.default_rng(0)
    grid = sample_grid(env_table1, 200.0, rng)
    assert grid.pitch == pytest.approx(1.0 / math.sqrt(300e-6))
    assert grid.side == pytest.approx(math.sqrt(0.5 / 300e-6))
    assert grid.side <= grid.pitch
    assert np.all(grid.heights >= 0.0)
    # grid covers the window square
    n = grid.heights.shape[0]
    assert grid.offset[0] <= -200.0
    assert grid.offset[0] + n * grid.pitch >= 200.0


def test_sample_grid_user_on_street(env_table1):
    rng = np.random.default_rng(1)
    for _ in range(50):
        grid = sample_grid(env_table1, 100.0, rng)
        i = int(math.floor(-grid.offset[0] / grid.pitch))
        j = int(math.floor(-grid.offset[1] / grid.pitch))
        xmin, xmax, ymin, ymax = grid.footprint(i, j)
        assert not (xmin <= 0.0 <= xmax and ymin <= 0.0 <= ymax)


def test_sample_grid_height_distribution(env_table1):
    rng = np.random.default_rng(2)
    heights = []
    while len(heights) < 100_000:
        heights.extend(sample_grid(env_table1, 300.0, rng).heights.ravel())
    h = np.array(heights[:100_000])
    mean = 50.0 * math.sqrt(math.pi / 2.0)           # Rayleigh mean
    se = 50.0 * math.sqrt((4.0 - math.pi) / 2.0) / math.sqrt(len(h))
    assert abs(h.mean() - mean) < 3.0 * se


def _grid_with_one_building(height: float) -> BuildingGridRealization:
    # 4x4 grid, pitch 100, side 50, cell centers at -150, -50, 50, 150 on
    # each axis, so the origin sits mid-street; only the building centered
    # at (150, 150) (footprint [125,175]^2) has nonzero height.
    heights = np.zeros((4, 4))
    heights[3, 3] = height
    return BuildingGridRealization(pitch=100.0, side=50.0, heights=heights,
                                   offset=np.array([-200.0, -200.0]))


def test_is_los_explicit_vertical_link():
    grid = _grid_with_one_building(1000.0)
    assert is_los_explicit(grid, 100.0, (0.0, 0.0))


def test_is_los_explicit_blocking_threshold():
    # the diagonal link to (300, 300) enters the footprint at (125, 125),
    # i.e. at parameter 125/300, where the link height is 100*125/300;
    # the building blocks iff at least that tall
    entry_height = 100.0 * 125.0 / 300.0
    assert is_los_explicit(_grid_with_one_building(entry_height - 1.0),
                           100.0, (300.0, 300.0))
    assert not is_los_explicit(_grid_with_one_building(entry_height + 1.0),
                               100.0, (300.0, 300.0))


def test_is_los_explicit_misses_building():
    # the +y axis threads the street between the footprint columns
    grid = BuildingGridRealization(pitch=100.0, side=50.0,
                                   heights=np.full((4, 4), 1000.0),
                                   offset=np.array([-200.0, -200.0]))
    assert is_los_explicit(grid, 100.0, (0.0, 140.0))


def test_is_los_explicit_delta_to_zero():
    env = UrbanEnvironment(beta=300e-6, delta=1e-12, kappa=50.0)
    rng = np.random.default_rng(3)
    for _ in range(200):
        grid = sample_grid(env, 150.0, rng)
        phi = 2 * math.pi * rng.random()
        r = 140.0 * rng.random()
        assert is_los_explicit(grid, 80.0, (r * math.cos(phi),
                                            r * math.sin(phi)))


def test_is_los_explicit_kappa_to_zero():
    env = UrbanEnvironment(beta=300e-6, delta=0.5, kappa=1e-12)
    rng = np.random.default_rng(4)
    for _ in range(200):
        grid = sample_grid(env, 150.0, rng)
        assert is_los_explicit(grid, 80.0, (120.0, 35.0))


def test_sigmoid_saturates_overhead():
    assert p_los_sigmoid(9.61, 0.16, 100.0, 0.0) > 0.9999


def test_sigmoid_angle_equals_a():
    # elevation angle of a degrees makes the exponent zero
    a = 30.0
    r = 100.0 / math.tan(math.radians(a))
    assert p_los_sigmoid(a, a, 100.0, r) == pytest.approx(1.0 / (1.0 + a))


def test_sigmoid_monotone_in_height():
    vals = [p_los_sigmoid(9.61, 0.16, g, 200.0) for g in (10, 50, 100, 300)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
