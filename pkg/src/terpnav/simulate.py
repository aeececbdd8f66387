"""Differential-drive simulation: robot-centric sensing with occlusion,
terrain-derived attitude, unicycle kinematics, rewards and termination.

Sensed elevations are relative to the terrain height under the robot, so a
cell's value is how far it rises above (or drops below) the robot's own
ground contact.  That is what ground-clearance normalization operates on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .config import RewardWeights, SimConfig
from .errors import ContractError, SensingError
from .grids import CostMap, ElevationGrid, centered_indices
from .worlds import TerrainWorld


def wrap_angle(a):
    """Wrap to (-pi, pi]."""
    out = np.remainder(np.asarray(a, dtype=float) + math.pi, 2 * math.pi)
    # remainder returns [0, 2pi); 0 corresponds to exactly -pi -> map to +pi
    out = np.where(out == 0.0, 2 * math.pi, out) - math.pi
    if np.isscalar(a):
        return float(out)
    return out


@dataclass(frozen=True)
class RobotState:
    """World-frame pose, attitude, commanded velocities and episode anchors."""

    x: float
    y: float
    yaw: float
    roll: float = 0.0
    pitch: float = 0.0
    v: float = 0.0
    w: float = 0.0
    t: float = 0.0
    start: tuple = (0.0, 0.0)
    goal: tuple = (0.0, 0.0)

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class Status:
    """Episode status: running, success, or failure with a reason."""

    kind: str  # "running" | "success" | "failure"
    reason: str | None = None

    @property
    def terminal(self) -> bool:
        return self.kind != "running"


@dataclass(frozen=True)
class RewardBreakdown:
    total: float
    dist: float
    head: float
    stable: float
    grad: float


def initial_state(world: TerrainWorld, start, goal, cfg: SimConfig) -> RobotState:
    x, y, yaw = float(start[0]), float(start[1]), float(start[2])
    roll, pitch = estimate_attitude(world, x, y, yaw, cfg.footprint,
                                    samples=cfg.footprint_samples)
    return RobotState(x=x, y=y, yaw=wrap_angle(yaw), roll=roll, pitch=pitch,
                      start=(x, y), goal=(float(goal[0]), float(goal[1])))


# ---------------------------------------------------------------------------
# sensing


def sense_elevation(world: TerrainWorld, state: RobotState, n: int, res: float,
                    r_sense: float, *, sensor_height: float = 0.8,
                    ray_step: float = 0.05,
                    occlusion_margin: float = 0.01,
                    cell_subsamples: int = 3) -> ElevationGrid:
    """Sample the terrain into a heading-aligned grid with range and
    line-of-sight gaps marked missing.

    Each cell stores the maximum height over a ``cell_subsamples`` x
    ``cell_subsamples`` grid spanning the cell, the way point-cloud
    elevation maps keep the highest return per cell; a step anywhere inside
    a cell therefore raises that whole cell.  A cell is missing when its
    center lies beyond ``r_sense`` or when the ray from the sensor mast to
    the cell's terrain point passes more than ``occlusion_margin`` below
    the terrain at any intermediate sample (marched every ``ray_step``
    meters).  Values are heights relative to the terrain under the robot.
    """
    if not world.contains(state.x, state.y):
        raise SensingError(f"robot at ({state.x:.2f}, {state.y:.2f}) is outside the world extent")
    ii, jj = centered_indices(n)
    x_fwd = ii * res
    y_left = jj * res
    cos_y, sin_y = math.cos(state.yaw), math.sin(state.yaw)
    wx = state.x + cos_y * x_fwd - sin_y * y_left
    wy = state.y + sin_y * x_fwd + cos_y * y_left

    z_robot = world.height(state.x, state.y)
    if cell_subsamples > 1:
        offs = np.linspace(-res / 2, res / 2, cell_subsamples)
        z_abs = np.full((n, n), -np.inf)
        for du in offs:
            for dv in offs:
                sx = wx + cos_y * du - sin_y * dv
                sy = wy + sin_y * du + cos_y * dv
                z_abs = np.maximum(z_abs, world.height(sx, sy))
    else:
        z_abs = world.height(wx, wy)

    dist = np.hypot(x_fwd, y_left)
    missing = dist > r_sense

    visible = ~missing & (dist > 0)
    if visible.any():
        vx = wx[visible]
        vy = wy[visible]
        vz = z_abs[visible]
        vd = dist[visible]
        z_sensor = z_robot + sensor_height
        max_steps = int(math.ceil(vd.max() / ray_step)) - 1
        if max_steps > 0:
            k = np.arange(1, max_steps + 1)
            # fraction along each ray for every candidate sample
            frac = (k[None, :] * ray_step) / vd[:, None]
            valid = frac < 1.0
            frac = np.where(valid, frac, 0.0)
            px = state.x + frac * (vx[:, None] - state.x)
            py = state.y + frac * (vy[:, None] - state.y)
            sight = z_sensor + frac * (vz[:, None] - z_sensor)
            terrain = world.height(px, py)
            blocked = np.any(valid & (terrain - sight > occlusion_margin), axis=1)
            occluded = np.zeros_like(missing)
            occluded[visible] = blocked
            missing = missing | occluded

    values = z_abs - z_robot
    values = np.where(missing, np.nan, values)
    return ElevationGrid(n=n, res=res, values=values, missing=missing)


def estimate_attitude(world: TerrainWorld, x: float, y: float, yaw: float,
                      footprint: float, samples: int = 5) -> tuple[float, float]:
    """Roll and pitch from a least-squares plane fit under the footprint.

    Pitch is the fitted slope along the heading (positive nose-up on rising
    ground); roll is the slope across it (positive when the ground rises to
    the robot's left).
    """
    if footprint <= 0:
        raise ContractError("footprint must be > 0")
    offs = np.linspace(-footprint / 2, footprint / 2, samples)
    u, v = np.meshgrid(offs, offs, indexing="ij")
    cos_y, sin_y = math.cos(yaw), math.sin(yaw)
    px = x + cos_y * u - sin_y * v
    py = y + sin_y * u + cos_y * v
    z = world.height(px, py).ravel()
    basis = np.column_stack([u.ravel(), v.ravel(), np.ones(z.size)])
    (slope_fwd, slope_left, _), *_ = np.linalg.lstsq(basis, z, rcond=None)
    return math.atan(slope_left), math.atan(slope_fwd)


# ---------------------------------------------------------------------------
# kinematics


def step_kinematics(world: TerrainWorld, state: RobotState, v: float, w: float,
                    dt: float, cfg: SimConfig) -> RobotState:
    """Unicycle update with attitude re-estimated from the terrain."""
    if dt <= 0:
        raise ContractError("dt must be > 0")
    if abs(v) > cfg.v_max + 1e-9 or abs(w) > cfg.w_max + 1e-9:
        raise ContractError(f"commanded velocities ({v:.3f}, {w:.3f}) exceed limits")
    x = state.x + v * math.cos(state.yaw) * dt
    y = state.y + v * math.sin(state.yaw) * dt
    yaw = wrap_angle(state.yaw + w * dt)
    roll, pitch = estimate_attitude(world, x, y, yaw, cfg.footprint,
                                    samples=cfg.footprint_samples)
    return replace(state, x=x, y=y, yaw=yaw, roll=roll, pitch=pitch,
                   v=v, w=w, t=state.t + dt)


def rollout_poses(x: float, y: float, yaw: float, v, w, dt: float,
                  steps: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Euler-integrate constant commands for ``steps`` ticks.

    v and w may be arrays of shape (S,); returns x, y, yaw arrays of shape
    (S, steps) holding the pose after each tick (matching repeated
    step_kinematics updates).
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    w = np.atleast_1d(np.asarray(w, dtype=float))
    count = v.shape[0]
    xs = np.empty((count, steps))
    ys = np.empty((count, steps))
    yaws = np.empty((count, steps))
    cx = np.full(count, x)
    cy = np.full(count, y)
    cyaw = np.full(count, yaw)
    for k in range(steps):
        cx = cx + v * np.cos(cyaw) * dt
        cy = cy + v * np.sin(cyaw) * dt
        cyaw = cyaw + w * dt
        xs[:, k] = cx
        ys[:, k] = cy
        yaws[:, k] = cyaw
    return xs, ys, yaws


# ---------------------------------------------------------------------------
# goal geometry, rewards, termination


def goal_geometry(state: RobotState) -> tuple[float, float, float]:
    """(d_goal, alpha_goal, alpha_relative).

    d_goal is the planar distance to the goal; alpha_goal the wrapped angle
    from the heading to the goal bearing; alpha_relative the angle at the
    start point between (start -> robot) and (start -> goal), zero while the
    robot is still at its start.
    """
    gx, gy = state.goal
    dx, dy = gx - state.x, gy - state.y
    d_goal = math.hypot(dx, dy)
    alpha_goal = wrap_angle(math.atan2(dy, dx) - state.yaw) if d_goal > 1e-12 else 0.0
    sx, sy = state.start
    to_robot = (state.x - sx, state.y - sy)
    to_goal = (gx - sx, gy - sy)
    nr = math.hypot(*to_robot)
    ng = math.hypot(*to_goal)
    if nr < 1e-12 or ng < 1e-12:
        alpha_relative = 0.0
    else:
        cross = to_robot[0] * to_goal[1] - to_robot[1] * to_goal[0]
        dot = to_robot[0] * to_goal[0] + to_robot[1] * to_goal[1]
        alpha_relative = abs(math.atan2(cross, dot))
    return d_goal, alpha_goal, alpha_relative


def compute_reward(state: RobotState, elev_norm: ElevationGrid, h: np.ndarray,
                   weights: RewardWeights) -> RewardBreakdown:
    """Weighted sum of goal-distance, heading, stability and heading-gradient
    terms; the components come back unweighted."""
    h = np.asarray(h, dtype=float)
    if h.shape != (elev_norm.n // 2,):
        raise ContractError(f"heading vector must have n/2 entries, got {h.shape}")
    if len(weights.w) != h.shape[0]:
        raise ContractError("weight vector length does not match heading vector")
    d_goal, alpha_goal, _ = goal_geometry(state)
    r_dist = -d_goal
    r_head = -abs(alpha_goal)
    r_stable = math.cos(state.roll) ** 2 + math.cos(state.pitch) ** 2
    r_grad = -float(np.dot(weights.w, h))
    b1, b2, b3, b4 = weights.betas
    total = b1 * r_dist + b2 * r_head + b3 * r_stable + b4 * r_grad
    return RewardBreakdown(total=total, dist=r_dist, head=r_head,
                           stable=r_stable, grad=r_grad)


def cell_of_pose(x: float, y: float, frame_pose, n: int, res: float):
    """Centered cell of a world position in the grid sensed at frame_pose
    (x0, y0, yaw0); None when it falls outside the grid."""
    x0, y0, yaw0 = frame_pose
    dx, dy = x - x0, y - y0
    cos_y, sin_y = math.cos(yaw0), math.sin(yaw0)
    fwd = cos_y * dx + sin_y * dy
    left = -sin_y * dx + cos_y * dy
    i = int(np.rint(fwd / res))
    j = int(np.rint(left / res))
    h = n // 2
    if -h <= i < h and -h <= j < h:
        return i, j
    return None


def episode_status(state: RobotState, cfg: SimConfig,
                   costmap: CostMap | None = None,
                   costmap_pose=None) -> Status:
    """success when inside the goal radius; failure on tipping, standing in a
    forbidden cell of the active cost-map, or running out of time."""
    d_goal, _, _ = goal_geometry(state)
    if d_goal < cfg.goal_radius:
        return Status("success")
    if abs(state.roll) > cfg.stability_limit or abs(state.pitch) > cfg.stability_limit:
        return Status("failure", "tipped")
    if costmap is not None and costmap_pose is not None:
        cell = cell_of_pose(state.x, state.y, costmap_pose, costmap.n, costmap.res)
        if cell is not None and math.isinf(costmap.at(*cell)):
            return Status("failure", "entered_infinite_cost")
    if state.t > cfg.t_max:
        return Status("failure", "timeout")
    return Status("running")
