"""Attention-mask providers.

The analytic provider is the deterministic primary path: it emphasizes
terrain gradient in the goal direction, decaying with distance from the
robot.  Learned masks arrive through grid exchange files; the uniform mask
is the no-attention ablation (cost-map = normalized elevation).
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import ContractError, GridFormatError
from .grids import (AttentionMask, GradientField, ElevationGrid,
                    centered_indices, load_grid_file, save_grid_file)
from .simulate import RobotState, goal_geometry

ATTENTION_EPS = 0.05
ATTENTION_POWER = 2.0


def attention_from_gradient(magnitudes: np.ndarray, goal_bearing: float,
                            eps: float = ATTENTION_EPS,
                            power: float = ATTENTION_POWER) -> np.ndarray:
    """Core mask formula on a gradient-magnitude array.

    A = clamp(eps + dist_falloff * angular_focus * normalized_gradient, 0, 1)
    with the angular focus a cosine cone around the goal bearing and the
    distance falloff linear from 1 at the robot to eps at the grid edge.
    """
    mags = np.asarray(magnitudes, dtype=float)
    n = mags.shape[0]
    lo, hi = float(mags.min()), float(mags.max())
    if hi > lo:
        g_hat = (mags - lo) / (hi - lo)
    else:
        g_hat = np.zeros_like(mags)
    ii, jj = centered_indices(n)
    radius = np.hypot(ii, jj)
    edge = n / 2.0
    lam_dist = 1.0 + (eps - 1.0) * np.minimum(radius / edge, 1.0)
    bearing = np.arctan2(jj, ii)
    lam_ang = np.maximum(0.0, np.cos(bearing - goal_bearing)) ** power
    # the robot's own cell has no bearing; it is always fully attended
    lam_ang = np.where(radius == 0, 1.0, lam_ang)
    return np.clip(eps + lam_dist * lam_ang * g_hat, 0.0, 1.0)


def analytic_attention(elev_norm: ElevationGrid, gradient: GradientField,
                       state: RobotState, goal=None, *,
                       eps: float = ATTENTION_EPS,
                       power: float = ATTENTION_POWER) -> AttentionMask:
    """Deterministic mask emphasizing goal-directed elevation changes."""
    if elev_norm.n != gradient.n:
        raise ContractError(
            f"grid sizes differ: elevation n={elev_norm.n}, gradient n={gradient.n}")
    if goal is not None:
        state = RobotState(x=state.x, y=state.y, yaw=state.yaw,
                           start=state.start, goal=(float(goal[0]), float(goal[1])))
    _, goal_bearing, _ = goal_geometry(state)
    values = attention_from_gradient(gradient.magnitudes, goal_bearing,
                                     eps=eps, power=power)
    return AttentionMask(n=elev_norm.n, values=values, provider="analytic")


def uniform_mask(n: int) -> AttentionMask:
    """All-ones mask: the no-attention ablation arm."""
    if n < 4:
        raise ContractError("mask side must be >= 4")
    return AttentionMask(n=n, values=np.ones((n, n)), provider="uniform")


def load_mask(path, expected_n: int | None = None) -> AttentionMask:
    """Read a mask from a grid exchange file, clamping values into [0, 1].

    Out-of-range entries are clamped with a warning; non-finite entries are
    a format error.  The ``# provider:`` comment is recorded (``file`` when
    absent).
    """
    values, _res, provider = load_grid_file(path)
    if expected_n is not None and values.shape[0] != expected_n:
        raise GridFormatError(
            f"{path}: mask is {values.shape[0]}x{values.shape[0]}, expected n={expected_n}")
    if not np.all(np.isfinite(values)):
        raise GridFormatError(f"{path}: mask contains non-finite entries")
    if values.min() < 0.0 or values.max() > 1.0:
        warnings.warn(f"{path}: mask values outside [0, 1] were clamped",
                      stacklevel=2)
        values = np.clip(values, 0.0, 1.0)
    return AttentionMask(n=values.shape[0], values=values,
                         provider=provider or "file")


def save_mask(mask: AttentionMask, path, res: float) -> None:
    save_grid_file(path, mask.values, res, provider=mask.provider)


class AnalyticAttentionProvider:
    """Per-frame analytic masks."""

    name = "analytic"

    def __init__(self, eps: float = ATTENTION_EPS, power: float = ATTENTION_POWER):
        self.eps = eps
        self.power = power

    def __call__(self, elev_norm, gradient, state) -> AttentionMask:
        return analytic_attention(elev_norm, gradient, state,
                                  eps=self.eps, power=self.power)


class UniformAttentionProvider:
    """Same all-ones mask for every frame (ablation)."""

    name = "uniform"

    def __call__(self, elev_norm, gradient, state) -> AttentionMask:
        return uniform_mask(elev_norm.n)


class FileAttentionProvider:
    """Replays masks from files, in filename order, one per frame.

    The last mask repeats once the files run out; useful for driving the
    planner with masks exported by a trained network.
    """

    name = "file"

    def __init__(self, paths):
        if not paths:
            raise ContractError("FileAttentionProvider needs at least one mask file")
        self.paths = list(paths)
        self._index = 0

    def __call__(self, elev_norm, gradient, state) -> AttentionMask:
        path = self.paths[min(self._index, len(self.paths) - 1)]
        self._index += 1
        return load_mask(path, expected_n=elev_norm.n)
