"""Attention providers: analytic formula, uniform ablation, file masks."""

import math

import numpy as np
import pytest

from terpnav.attention import (ATTENTION_EPS, analytic_attention,
                               attention_from_gradient, load_mask, save_mask,
                               uniform_mask)
from terpnav.errors import ContractError, GridFormatError
from terpnav.grids import ElevationGrid, gradient_field
from terpnav.simulate import RobotState


def grid_of(values, res=0.25):
    return ElevationGrid.from_values(np.asarray(values, dtype=float), res)


def test_flat_terrain_mask_is_eps_everywhere():
    n = 16
    elev = grid_of(np.zeros((n, n)))
    grad = gradient_field(elev)
    state = RobotState(x=0, y=0, yaw=0, start=(0, 0), goal=(5.0, 0.0))
    mask = analytic_attention(elev, grad, state)
    assert np.allclose(mask.values, ATTENTION_EPS)


def test_goal_side_ridge_gets_more_attention_than_mirror_ridge():
    n, res = 16, 0.25
    h = n // 2
    vals = np.zeros((n, n))
    # identical ridges ahead of and behind the robot
    vals[h + 4, :] = 0.8
    vals[h - 4, :] = 0.8
    elev = grid_of(vals, res)
    grad = gradient_field(elev)
    state = RobotState(x=0, y=0, yaw=0, start=(0, 0), goal=(5.0, 0.0))
    mask = analytic_attention(elev, grad, state)
    # compare symmetric cells on the near edge of each ridge, where the
    # gradient actually lives
    assert mask.values[h + 3, h] > mask.values[h - 3, h]
    # formula oracle at the goal-side edge cell
    g_hat = (grad.magnitudes - grad.magnitudes.min()) / (
        grad.magnitudes.max() - grad.magnitudes.min())
    lam_dist = 1 + (ATTENTION_EPS - 1) * (3 / h)
    expect = np.clip(ATTENTION_EPS + lam_dist * 1.0 * g_hat[h + 3, h], 0, 1)
    assert mask.values[h + 3, h] == pytest.approx(expect, abs=1e-12)


def test_mask_always_in_unit_interval():
    rng = np.random.default_rng(13)
    for _ in range(20):
        elev = grid_of(rng.uniform(-2, 4, (12, 12)))
        grad = gradient_field(elev)
        state = RobotState(x=0, y=0, yaw=rng.uniform(-3, 3), start=(0, 0),
                           goal=(rng.uniform(-9, 9), rng.uniform(-9, 9)))
        mask = analytic_attention(elev, grad, state)
        assert mask.values.min() >= 0.0 and mask.values.max() <= 1.0


def test_rotation_consistency_90_degrees():
    # rotating the gradient field and the goal bearing together rotates the
    # mask; checked away from the boundary ring that rotation clips
    n = 16
    h = n // 2
    rng = np.random.default_rng(21)
    mags = np.zeros((n, n))
    mags[h - 4:h + 4, h - 4:h + 4] = rng.uniform(0, 1, (8, 8))
    bearing = 0.3
    base = attention_from_gradient(mags, bearing)
    rot = np.zeros_like(mags)
    for i in range(-h + 1, h):
        for j in range(-h + 1, h):
            # left rotation by 90 deg about the robot cell: (i, j) -> (-j, i)
            if -h <= -j < h:
                rot[-j + h, i + h] = mags[i + h, j + h]
    rotated = attention_from_gradient(rot, bearing + math.pi / 2)
    for i in range(-h + 1, h):
        for j in range(-h + 1, h):
            if -h <= -j < h:
                assert rotated[-j + h, i + h] == pytest.approx(
                    base[i + h, j + h], abs=1e-12)


def test_analytic_attention_invariant_to_elevation_offset():
    n = 12
    rng = np.random.default_rng(8)
    vals = rng.uniform(0, 1.5, (n, n))
    state = RobotState(x=0, y=0, yaw=0.4, start=(0, 0), goal=(3.0, 2.0))
    elev_a = grid_of(vals)
    elev_b = grid_of(vals + 11.0)
    mask_a = analytic_attention(elev_a, gradient_field(elev_a), state)
    mask_b = analytic_attention(elev_b, gradient_field(elev_b), state)
    assert np.allclose(mask_a.values, mask_b.values, atol=1e-9)


def test_size_mismatch_rejected():
    elev = grid_of(np.zeros((8, 8)))
    grad = gradient_field(grid_of(np.zeros((12, 12))))
    state = RobotState(x=0, y=0, yaw=0, start=(0, 0), goal=(1.0, 0.0))
    with pytest.raises(ContractError):
        analytic_attention(elev, grad, state)


# ---------------------------------------------------------------------------
# uniform mask


def test_uniform_mask_is_all_ones():
    mask = uniform_mask(40)
    assert mask.values.shape == (40, 40)
    assert np.all(mask.values == 1.0)
    assert mask.provider == "uniform"


def test_uniform_mask_keeps_costmap_equal_to_elevation():
    from terpnav.planning import build_costmap
    rng = np.random.default_rng(19)
    elev = grid_of(rng.uniform(-0.5, 0.5, (8, 8)))
    cost = build_costmap(elev, uniform_mask(8), c_max=10.0)
    assert np.array_equal(cost.values, np.abs(elev.values))


# ---------------------------------------------------------------------------
# file masks


def test_load_uniform_file(tmp_path):
    from terpnav.grids import save_grid_file
    path = tmp_path / "m.txt"
    save_grid_file(path, np.full((6, 6), 0.5), 0.25, provider="analytic")
    mask = load_mask(path)
    assert np.all(mask.values == 0.5)
    assert mask.provider == "analytic"


def test_load_clamps_out_of_range_with_warning(tmp_path):
    from terpnav.grids import save_grid_file
    vals = np.full((4, 4), 0.5)
    vals[0, 0] = 1.3
    path = tmp_path / "m.txt"
    save_grid_file(path, vals, 0.25, provider="learned")
    with pytest.warns(UserWarning):
        mask = load_mask(path)
    assert mask.values[0, 0] == 1.0


def test_mask_round_trip_byte_identical(tmp_path):
    rng = np.random.default_rng(3)
    from terpnav.grids import AttentionMask
    mask = AttentionMask(n=5, values=rng.uniform(0, 1, (5, 5)), provider="learned")
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    save_mask(mask, a, 0.25)
    save_mask(load_mask(a), b, 0.25)
    assert a.read_bytes() == b.read_bytes()


def test_load_rejects_nonfinite(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text("2 0.25\n0.5 nan\n0.5 0.5\n")
    with pytest.raises(GridFormatError):
        load_mask(path)


def test_load_rejects_size_mismatch(tmp_path):
    from terpnav.grids import save_grid_file
    path = tmp_path / "m.txt"
    save_grid_file(path, np.zeros((4, 4)), 0.25)
    with pytest.raises(GridFormatError):
        load_mask(path, expected_n=8)
