"""Dynamic-window path tracker.

Samples velocity commands reachable within one control period, rolls each
out over a short horizon, discards rollouts that enter forbidden cost-map
cells, and scores the rest on path deviation, heading to a carrot point and
speed.  Always returns a command inside the dynamic window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SimConfig, TrackerConfig
from .errors import ContractError
from .grids import CostMap
from .simulate import RobotState, rollout_poses, wrap_angle


@dataclass(frozen=True)
class DynamicWindow:
    v_lo: float
    v_hi: float
    w_lo: float
    w_hi: float

    def contains(self, v: float, w: float, tol: float = 1e-9) -> bool:
        return (self.v_lo - tol <= v <= self.v_hi + tol
                and self.w_lo - tol <= w <= self.w_hi + tol)


def dynamic_window(state: RobotState, cfg: SimConfig) -> DynamicWindow:
    """Forward velocities and turn rates reachable within one tick."""
    return DynamicWindow(
        v_lo=max(0.0, state.v - cfg.accel_v * cfg.dt),
        v_hi=min(cfg.v_max, state.v + cfg.accel_v * cfg.dt),
        w_lo=max(-cfg.w_max, state.w - cfg.accel_w * cfg.dt),
        w_hi=min(cfg.w_max, state.w + cfg.accel_w * cfg.dt),
    )


def _frame_cells(xs: np.ndarray, ys: np.ndarray, frame_pose, n: int, res: float):
    """Map world points into the frame grid; returns (rows, cols, in_grid)."""
    x0, y0, yaw0 = frame_pose
    cos_y, sin_y = math.cos(yaw0), math.sin(yaw0)
    dx = xs - x0
    dy = ys - y0
    i = np.rint((cos_y * dx + sin_y * dy) / res).astype(int)
    j = np.rint((-sin_y * dx + cos_y * dy) / res).astype(int)
    h = n // 2
    inside = (i >= -h) & (i < h) & (j >= -h) & (j < h)
    return i + h, j + h, inside


def rollout_blocked(xs: np.ndarray, ys: np.ndarray, cost: CostMap,
                    frame_pose) -> np.ndarray:
    """True per rollout when any pose lands on a +inf cell (out-of-grid poses
    are treated as free)."""
    rows, cols, inside = _frame_cells(xs, ys, frame_pose, cost.n, cost.res)
    rows = np.where(inside, rows, 0)
    cols = np.where(inside, cols, 0)
    hit = np.isinf(cost.values[rows, cols]) & inside
    return hit.any(axis=1)


def polyline_distance(points: np.ndarray, path: np.ndarray) -> np.ndarray:
    """Distance from each point to the nearest path segment."""
    points = np.asarray(points, dtype=float)
    if len(path) == 1:
        return np.hypot(points[:, 0] - path[0, 0], points[:, 1] - path[0, 1])
    a = path[:-1]
    d = path[1:] - a
    seg_len2 = np.maximum((d * d).sum(axis=1), 1e-12)
    rel = points[:, None, :] - a[None, :, :]
    t = np.clip((rel * d[None, :, :]).sum(axis=2) / seg_len2, 0.0, 1.0)
    closest = a[None, :, :] + t[:, :, None] * d[None, :, :]
    dist = np.hypot(points[:, None, 0] - closest[:, :, 0],
                    points[:, None, 1] - closest[:, :, 1])
    return dist.min(axis=1)


def carrot_point(path_world: np.ndarray, x: float, y: float,
                 lookahead: float) -> np.ndarray:
    """Path point roughly ``lookahead`` meters past the nearest path vertex."""
    d = np.hypot(path_world[:, 0] - x, path_world[:, 1] - y)
    nearest = int(np.argmin(d))
    seg = np.hypot(np.diff(path_world[nearest:, 0]), np.diff(path_world[nearest:, 1]))
    along = np.concatenate([[0.0], np.cumsum(seg)])
    ahead = np.searchsorted(along, lookahead)
    return path_world[min(nearest + ahead, len(path_world) - 1)]


def track_path(state: RobotState, path_world: np.ndarray, cost: CostMap,
               frame_pose, sim: SimConfig, cfg: TrackerConfig) -> tuple[float, float]:
    """Best admissible command toward the path.

    When every sampled rollout crosses a forbidden cell, brakes as hard as
    the window allows while turning toward the carrot (rotate-in-place once
    stopped).
    """
    path_world = np.asarray(path_world, dtype=float)
    if path_world.ndim != 2 or len(path_world) == 0:
        raise ContractError("track_path needs a non-empty world-frame path")
    window = dynamic_window(state, sim)
    carrot = carrot_point(path_world, state.x, state.y, cfg.carrot_distance)

    vs = np.linspace(window.v_lo, window.v_hi, cfg.v_samples)
    ws = np.linspace(window.w_lo, window.w_hi, cfg.w_samples)
    vv, ww = np.meshgrid(vs, ws, indexing="ij")
    vv = vv.ravel()
    ww = ww.ravel()
    steps = max(1, int(round(cfg.horizon / sim.dt)))
    xs, ys, yaws = rollout_poses(state.x, state.y, state.yaw, vv, ww, sim.dt, steps)
    blocked = rollout_blocked(xs, ys, cost, frame_pose)

    if blocked.all():
        bearing = math.atan2(carrot[1] - state.y, carrot[0] - state.x)
        err = wrap_angle(bearing - state.yaw)
        w_cmd = min(max(math.copysign(sim.w_max, err), window.w_lo), window.w_hi)
        return window.v_lo, w_cmd

    end_x, end_y, end_yaw = xs[:, -1], ys[:, -1], yaws[:, -1]
    deviation = polyline_distance(np.column_stack([end_x, end_y]), path_world)
    heading_err = np.abs(wrap_angle(np.arctan2(carrot[1] - end_y, carrot[0] - end_x)
                                    - end_yaw))
    score = (-cfg.deviation_weight * deviation
             - cfg.heading_weight * heading_err
             + cfg.velocity_weight * vv)
    score = np.where(blocked, -np.inf, score)
    best = int(np.argmax(score))
    return float(vv[best]), float(ww[best])
