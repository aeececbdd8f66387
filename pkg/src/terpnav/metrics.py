"""Episode metrics computed from the logged trajectory and the world.

All metrics are pure functions of (trajectory, world, start, goal), so they
can be recomputed bit-exactly from an audit dump.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .simulate import RobotState, goal_geometry
from .worlds import TerrainWorld


@dataclass(frozen=True)
class EpisodeMetrics:
    success: bool
    ceg: float            # cumulative elevation gradient, meters
    norm_length: float    # trajectory length / straight-line distance
    heading_dev: float    # summed |goal heading error| per step, radians
    sim_time: float
    wall_time: float = 0.0
    failure_reason: str | None = None


def compute_metrics(trajectory, world: TerrainWorld, start, goal, *,
                    success: bool = False, sim_time: float = 0.0,
                    wall_time: float = 0.0,
                    failure_reason: str | None = None) -> EpisodeMetrics:
    """Metrics over a pose log.

    CEG sums |elevation delta| between successive poses; the length is
    normalized by the straight start-goal distance; heading deviation sums
    |alpha_goal| over every logged pose.
    """
    traj = np.asarray(trajectory, dtype=float)
    if traj.ndim != 2 or len(traj) == 0 or traj.shape[1] < 3:
        raise ContractError("trajectory must be a non-empty (T, >=3) pose array")
    xs, ys, yaws = traj[:, 0], traj[:, 1], traj[:, 2]
    z = world.height(xs, ys)
    ceg = float(np.abs(np.diff(z)).sum())
    length = float(np.hypot(np.diff(xs), np.diff(ys)).sum())
    d_straight = math.hypot(goal[0] - start[0], goal[1] - start[1])
    norm_length = length / d_straight if d_straight > 0 else 0.0
    heading_dev = 0.0
    for x, y, yaw in zip(xs, ys, yaws):
        state = RobotState(x=x, y=y, yaw=yaw, start=tuple(start[:2]),
                           goal=(goal[0], goal[1]))
        _, alpha_goal, _ = goal_geometry(state)
        heading_dev += abs(alpha_goal)
    return EpisodeMetrics(success=success, ceg=ceg, norm_length=norm_length,
                          heading_dev=float(heading_dev), sim_time=sim_time,
                          wall_time=wall_time, failure_reason=failure_reason)


def metrics_for_result(result, world: TerrainWorld, start, goal,
                       wall_time: float = 0.0) -> EpisodeMetrics:
    return compute_metrics(result.trajectory, world, start, goal,
                           success=result.status.kind == "success",
                           sim_time=result.sim_time,
                           wall_time=wall_time,
                           failure_reason=result.status.reason)


def aggregate(metrics: list[EpisodeMetrics]) -> dict:
    """Suite-level summary.

    Success rate is exact (successes/episodes).  CEG and normalized length
    aggregate over every episode, successful or not: both are means over the
    elevation and distance the robot actually experienced, and a planner
    that stalls or wanders pays for it here rather than being dropped from
    the statistic.  Success-only CEG is reported alongside.  Heading
    deviation sums goal-bearing error up to goal arrival, so it is only
    defined for successful episodes.
    """
    episodes = len(metrics)
    successes = sum(1 for m in metrics if m.success)
    succ = [m for m in metrics if m.success]
    finite = [m for m in metrics if math.isfinite(m.ceg)]

    def med(vals):
        return float(np.median(vals)) if len(vals) else math.nan

    def mean(vals):
        return float(np.mean(vals)) if len(vals) else math.nan

    return {
        "episodes": episodes,
        "successes": successes,
        "success_rate_exact": f"{successes}/{episodes}" if episodes else "0/0",
        "success_rate": successes / episodes if episodes else math.nan,
        "ceg_median": med([m.ceg for m in finite]),
        "ceg_mean": mean([m.ceg for m in finite]),
        "ceg_median_success": med([m.ceg for m in succ]),
        "norm_length_median": med([m.norm_length for m in finite]),
        "norm_length_mean": mean([m.norm_length for m in finite]),
        "heading_dev_median": med([m.heading_dev for m in succ]),
        "heading_dev_mean": mean([m.heading_dev for m in succ]),
    }
