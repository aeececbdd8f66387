"""Comparison planners: classic DWA over slope-derived obstacles, and the
ego-graph family scoring a fixed fan of constant-curvature arcs.

These are single-step policies: each call maps (state, latest sensed
terrain, goal) to one velocity command.  They consume the raw elevation
grid's gradient, never the attention cost-map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import BaselineConfig, SimConfig
from .errors import ContractError
from .grids import GradientField, centered_indices
from .simulate import RobotState, goal_geometry, rollout_poses, wrap_angle
from .tracking import dynamic_window


@dataclass(frozen=True)
class SensedFrame:
    """Gradient field plus the pose it was sensed at."""

    gradient: GradientField
    pose: tuple  # (x, y, yaw)

    def obstacle_points(self, threshold: float) -> np.ndarray:
        """World positions of cells steeper than ``threshold`` (m/m)."""
        mags = self.gradient.magnitudes
        ii, jj = centered_indices(self.gradient.n)
        steep = mags > threshold
        if not steep.any():
            return np.zeros((0, 2))
        x0, y0, yaw0 = self.pose
        fwd = ii[steep] * self.gradient.res
        left = jj[steep] * self.gradient.res
        cos_y, sin_y = math.cos(yaw0), math.sin(yaw0)
        return np.column_stack([x0 + cos_y * fwd - sin_y * left,
                                y0 + sin_y * fwd + cos_y * left])

    def gradient_at(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Gradient magnitude under world points; 0 outside the grid."""
        x0, y0, yaw0 = self.pose
        cos_y, sin_y = math.cos(yaw0), math.sin(yaw0)
        dx = xs - x0
        dy = ys - y0
        i = np.rint((cos_y * dx + sin_y * dy) / self.gradient.res).astype(int)
        j = np.rint((-sin_y * dx + cos_y * dy) / self.gradient.res).astype(int)
        h = self.gradient.n // 2
        inside = (i >= -h) & (i < h) & (j >= -h) & (j < h)
        out = np.zeros(np.shape(xs))
        out[inside] = self.gradient.magnitudes[i[inside] + h, j[inside] + h]
        return out


def dwa_plan(state: RobotState, frame: SensedFrame, goal,
             sim: SimConfig, cfg: BaselineConfig) -> tuple[float, float]:
    """Classic dynamic-window command: heading + clearance + velocity, with
    slope-threshold cells as obstacles."""
    obstacles = frame.obstacle_points(cfg.slope_threshold)
    window = dynamic_window(state, sim)
    vs = np.linspace(window.v_lo, window.v_hi, 5)
    ws = np.linspace(window.w_lo, window.w_hi, 11)
    vv, ww = np.meshgrid(vs, ws, indexing="ij")
    vv = vv.ravel()
    ww = ww.ravel()
    steps = max(1, int(round(cfg.sense_period * 3 / sim.dt)))
    xs, ys, yaws = rollout_poses(state.x, state.y, state.yaw, vv, ww, sim.dt, steps)

    if len(obstacles):
        # only obstacles reachable within the horizon matter
        reach = sim.v_max * steps * sim.dt + cfg.clearance_cap
        near = (np.hypot(obstacles[:, 0] - state.x, obstacles[:, 1] - state.y)
                <= reach)
        obstacles = obstacles[near]
    if len(obstacles):
        d = np.hypot(xs[:, :, None] - obstacles[None, None, :, 0],
                     ys[:, :, None] - obstacles[None, None, :, 1])
        clearance = d.min(axis=(1, 2))
    else:
        clearance = np.full(vv.shape, cfg.clearance_cap)
    collides = clearance < cfg.collision_radius

    bearing = np.arctan2(goal[1] - ys[:, -1], goal[0] - xs[:, -1])
    heading = 1.0 - np.abs(wrap_angle(bearing - yaws[:, -1])) / math.pi
    clear_score = np.minimum(clearance, cfg.clearance_cap) / cfg.clearance_cap
    score = (cfg.dwa_heading * heading
             + cfg.dwa_clearance * clear_score
             + cfg.dwa_velocity * vv / sim.v_max)
    # the null command is always available as the fallback; scoring it would
    # let the robot idle forever in front of wide obstacle bands
    still = (vv == 0.0) & (ww == 0.0)
    score = np.where(collides | still, -np.inf, score)
    if np.isneginf(score).all():
        # boxed in: brake and rotate toward the goal
        _, alpha_goal, _ = goal_geometry(state)
        w_cmd = min(max(math.copysign(sim.w_max, alpha_goal), window.w_lo), window.w_hi)
        return window.v_lo, w_cmd
    best = int(np.argmax(score))
    return float(vv[best]), float(ww[best])


# ---------------------------------------------------------------------------
# ego-graph


def ego_arcs(cfg: BaselineConfig, step: float = 0.1) -> list[dict]:
    """The fixed candidate arc set in the robot frame.

    Each arc is constant curvature, ``arc_length`` meters long, with total
    heading change spread evenly across [-arc_span, +arc_span].
    """
    if cfg.arc_count < 1:
        raise ContractError("arc_count must be >= 1")
    arcs = []
    count = max(1, int(round(cfg.arc_length / step)))
    s = (np.arange(count) + 1) * step
    for delta in np.linspace(-cfg.arc_span, cfg.arc_span, cfg.arc_count):
        kappa = delta / cfg.arc_length
        if abs(kappa) < 1e-12:
            px, py = s, np.zeros_like(s)
            headings = np.zeros_like(s)
        else:
            px = np.sin(kappa * s) / kappa
            py = (1.0 - np.cos(kappa * s)) / kappa
            headings = kappa * s
        arcs.append({"curvature": float(kappa), "points": np.column_stack([px, py]),
                     "headings": headings})
    return arcs


def _ego_costs(state: RobotState, frame: SensedFrame, goal,
               cfg: BaselineConfig, with_distance: bool) -> np.ndarray:
    cos_y, sin_y = math.cos(state.yaw), math.sin(state.yaw)
    costs = []
    for arc in ego_arcs(cfg):
        pts = arc["points"]
        wx = state.x + cos_y * pts[:, 0] - sin_y * pts[:, 1]
        wy = state.y + sin_y * pts[:, 0] + cos_y * pts[:, 1]
        end_heading = state.yaw + arc["headings"][-1]
        bearing = math.atan2(goal[1] - wy[-1], goal[0] - wx[-1])
        alpha_end = abs(wrap_angle(bearing - end_heading))
        grad_sum = float(frame.gradient_at(wx, wy).sum())
        cost = cfg.w_heading * alpha_end + cfg.w_gradient * grad_sum
        if with_distance:
            cost += cfg.w_distance * math.hypot(goal[0] - wx[-1], goal[1] - wy[-1])
        costs.append(cost)
    return np.array(costs)


def _arc_command(index: int, cfg: BaselineConfig, sim: SimConfig) -> tuple[float, float]:
    deltas = np.linspace(-cfg.arc_span, cfg.arc_span, cfg.arc_count)
    kappa = deltas[index] / cfg.arc_length
    v = sim.v_max
    w = kappa * v
    if abs(w) > sim.w_max:
        v = sim.w_max / abs(kappa)
        w = math.copysign(sim.w_max, kappa)
    return v, w


def ego_graph_plan(state: RobotState, frame: SensedFrame, goal,
                   sim: SimConfig, cfg: BaselineConfig) -> tuple[float, float]:
    """Min-cost arc by end-heading error plus accumulated gradient."""
    costs = _ego_costs(state, frame, goal, cfg, with_distance=False)
    return _arc_command(int(np.argmin(costs)), cfg, sim)


def ego_graph_plus_plan(state: RobotState, frame: SensedFrame, goal,
                        sim: SimConfig, cfg: BaselineConfig) -> tuple[float, float]:
    """Ego-graph with an added distance-to-goal term at the arc end."""
    costs = _ego_costs(state, frame, goal, cfg, with_distance=True)
    return _arc_command(int(np.argmin(costs)), cfg, sim)
