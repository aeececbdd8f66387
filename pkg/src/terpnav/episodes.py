"""Episode runners: the sense-plan-track replanning loop and the baseline
control loops, with optional per-frame audit dumps.

Planner names (CLI spelling): ``terp`` (analytic attention), ``terp-noattn``
(uniform mask), ``terp-file`` (masks from files), ``dwa``, ``ego``, ``ego+``.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .attention import (AnalyticAttentionProvider, FileAttentionProvider,
                        UniformAttentionProvider)
from .config import Scenario
from .errors import (ContractError, DegenerateRegionError, PlannerStuckError,
                     SensingError)
from .grids import (CostMap, ElevationGrid, gradient_field, infill_missing,
                    normalize_elevation, save_elevation, save_grid_file)
from .planning import WaypointPlan, build_costmap, dijkstra_field, explore_radius, select_waypoint
from .simulate import (Status, episode_status, initial_state,
                       sense_elevation, step_kinematics)
from .tracking import track_path
from . import baselines

TERP_PLANNERS = ("terp", "terp-noattn", "terp-file")
BASELINE_PLANNERS = ("dwa", "ego", "ego+")
ALL_PLANNERS = TERP_PLANNERS + BASELINE_PLANNERS


@dataclass
class FrameRecord:
    """Everything one planning cycle produced, for audit and invariants."""

    index: int
    pose: tuple                      # (x, y, yaw) at sensing time
    attitude: tuple                  # (roll, pitch) at sensing time
    r_explore: float
    elevation: ElevationGrid         # raw sensed grid (with missing cells)
    infilled: ElevationGrid
    elev_norm: ElevationGrid
    mask: object
    cost: CostMap
    plan: WaypointPlan | None
    executed: list = field(default_factory=list)  # poses tracked on this plan


@dataclass
class EpisodeResult:
    planner: str
    scenario_name: str
    seed: int
    status: Status
    trajectory: np.ndarray           # (T, 4): x, y, yaw, t
    sim_time: float
    frames: list = field(default_factory=list)
    frame_count: int = 0


def _sense_pipeline(world, state, scenario: Scenario):
    sim = scenario.sim
    raw = sense_elevation(world, state, sim.n, sim.res, sim.r_sense,
                          sensor_height=sim.sensor_height,
                          ray_step=sim.ray_step,
                          occlusion_margin=sim.occlusion_margin,
                          cell_subsamples=sim.cell_subsamples)
    filled = infill_missing(raw)
    elev_norm = normalize_elevation(filled, sim.clearance)
    grad = gradient_field(filled)
    return raw, filled, elev_norm, grad


def make_mask_provider(planner: str, scenario: Scenario, mask_files=None):
    if planner == "terp":
        return AnalyticAttentionProvider(eps=scenario.planner.attention_eps,
                                         power=scenario.planner.attention_power)
    if planner == "terp-noattn":
        return UniformAttentionProvider()
    if planner == "terp-file":
        return FileAttentionProvider(mask_files or [])
    raise ContractError(f"no mask provider for planner {planner!r}")


def robot_to_world(pose, xy):
    x0, y0, yaw0 = pose
    c, s = math.cos(yaw0), math.sin(yaw0)
    x, y = xy
    return (x0 + c * x - s * y, y0 + s * x + c * y)


def world_to_robot(pose, xy):
    x0, y0, yaw0 = pose
    c, s = math.cos(yaw0), math.sin(yaw0)
    dx, dy = xy[0] - x0, xy[1] - y0
    return (c * dx + s * dy, -s * dx + c * dy)


def run_terp_episode(scenario: Scenario, planner: str = "terp", *,
                     mask_files=None, keep_grids: bool = False,
                     audit_dir=None) -> EpisodeResult:
    """Sense -> infill -> normalize -> gradient -> attention -> cost-map ->
    radius -> waypoint -> track, repeated until the episode ends.

    ``keep_grids`` retains every frame's grids in memory (tests, audits);
    otherwise only poses, plans and cost-maps are kept.
    """
    world = scenario.world
    sim = scenario.sim
    pcfg = scenario.planner
    keep_grids = keep_grids or audit_dir is not None
    provider = make_mask_provider(planner, scenario, mask_files)
    state = initial_state(world, scenario.start, scenario.goal, sim)
    trajectory = [(state.x, state.y, state.yaw, state.t)]
    frames: list[FrameRecord] = []
    r_prior = sim.r_sense - sim.res
    status = episode_status(state, sim)

    while not status.terminal:
        try:
            raw, filled, elev_norm, grad = _sense_pipeline(world, state, scenario)
        except SensingError as exc:
            status = Status("failure", f"sensing: {exc}")
            break
        mask = provider(elev_norm, grad, state)
        cost = build_costmap(elev_norm, mask, pcfg.c_max)
        try:
            r_explore = explore_radius(cost, r_prior, pcfg.k1, pcfg.k2, sim.r_sense)
        except DegenerateRegionError:
            r_explore = r_prior
        frame_pose = (state.x, state.y, state.yaw)
        field_ = dijkstra_field(cost, base_cost=pcfg.base_cost)
        goal_robot = world_to_robot(frame_pose, scenario.goal)
        frame = FrameRecord(index=len(frames), pose=frame_pose,
                            attitude=(state.roll, state.pitch),
                            r_explore=r_explore,
                            elevation=raw if keep_grids else None,
                            infilled=filled if keep_grids else None,
                            elev_norm=elev_norm if keep_grids else None,
                            mask=mask if keep_grids else None,
                            cost=cost, plan=None)
        try:
            plan = select_waypoint(cost, pcfg, goal_robot, field_, r_explore)
        except PlannerStuckError:
            frames.append(frame)
            status = Status("failure", "planner_stuck")
            break
        frame.plan = plan
        frames.append(frame)
        r_prior = r_explore

        waypoint_world = robot_to_world(frame_pose, plan.waypoint)
        path_world = np.array([robot_to_world(frame_pose,
                                              (i * sim.res, j * sim.res))
                               for i, j in plan.path])
        deadline = state.t + pcfg.replan_period
        while state.t < deadline - 1e-9:
            v, w = track_path(state, path_world, cost, frame_pose,
                              sim, scenario.tracker)
            state = step_kinematics(world, state, v, w, sim.dt, sim)
            trajectory.append((state.x, state.y, state.yaw, state.t))
            frame.executed.append((state.x, state.y, state.yaw, state.t))
            status = episode_status(state, sim, cost, frame_pose)
            if status.terminal:
                break
            if math.hypot(state.x - waypoint_world[0],
                          state.y - waypoint_world[1]) < pcfg.waypoint_radius:
                break

    result = EpisodeResult(planner=planner, scenario_name=scenario.name,
                           seed=scenario.seed, status=status,
                           trajectory=np.array(trajectory),
                           sim_time=state.t, frames=frames,
                           frame_count=len(frames))
    if audit_dir is not None:
        dump_audit(result, scenario, audit_dir)
    return result


def run_baseline_episode(scenario: Scenario, planner: str) -> EpisodeResult:
    """Fixed-rate control loop for dwa / ego / ego+ over cached sensed frames."""
    if planner not in BASELINE_PLANNERS:
        raise ContractError(f"unknown baseline {planner!r}")
    world = scenario.world
    sim = scenario.sim
    bcfg = scenario.baselines
    state = initial_state(world, scenario.start, scenario.goal, sim)
    trajectory = [(state.x, state.y, state.yaw, state.t)]
    status = episode_status(state, sim)
    frame = None
    next_sense = -1.0
    frame_count = 0

    while not status.terminal:
        if state.t >= next_sense:
            try:
                _raw, _filled, _norm, grad = _sense_pipeline(world, state, scenario)
            except SensingError as exc:
                status = Status("failure", f"sensing: {exc}")
                break
            frame = baselines.SensedFrame(gradient=grad,
                                          pose=(state.x, state.y, state.yaw))
            frame_count += 1
            next_sense = state.t + bcfg.sense_period
        if planner == "dwa":
            v, w = baselines.dwa_plan(state, frame, scenario.goal, sim, bcfg)
        elif planner == "ego":
            v, w = baselines.ego_graph_plan(state, frame, scenario.goal, sim, bcfg)
        else:
            v, w = baselines.ego_graph_plus_plan(state, frame, scenario.goal, sim, bcfg)
        state = step_kinematics(world, state, v, w, sim.dt, sim)
        trajectory.append((state.x, state.y, state.yaw, state.t))
        status = episode_status(state, sim)

    return EpisodeResult(planner=planner, scenario_name=scenario.name,
                         seed=scenario.seed, status=status,
                         trajectory=np.array(trajectory),
                         sim_time=state.t, frames=[], frame_count=frame_count)


def run_episode(scenario: Scenario, planner: str, *, mask_files=None,
                keep_grids: bool = False, audit_dir=None) -> EpisodeResult:
    if planner in TERP_PLANNERS:
        return run_terp_episode(scenario, planner, mask_files=mask_files,
                                keep_grids=keep_grids, audit_dir=audit_dir)
    if planner in BASELINE_PLANNERS:
        return run_baseline_episode(scenario, planner)
    raise ContractError(f"unknown planner {planner!r}; choose from {ALL_PLANNERS}")


# ---------------------------------------------------------------------------
# audit dumps


def dump_audit(result: EpisodeResult, scenario: Scenario, audit_dir) -> None:
    """Write per-frame grids plus JSON records for offline recomputation."""
    os.makedirs(audit_dir, exist_ok=True)
    meta = {
        "planner": result.planner,
        "scenario": scenario.to_dict(),
        "status": {"kind": result.status.kind, "reason": result.status.reason},
        "sim_time": result.sim_time,
        "frame_count": result.frame_count,
        "trajectory": [list(p) for p in result.trajectory.tolist()],
    }
    with open(os.path.join(audit_dir, "episode.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")
    for frame in result.frames:
        tag = f"frame_{frame.index:04d}"
        if frame.elevation is not None:
            save_elevation(os.path.join(audit_dir, f"{tag}_elevation.txt"),
                           frame.elevation)
        if frame.mask is not None:
            save_grid_file(os.path.join(audit_dir, f"{tag}_mask.txt"),
                           frame.mask.values, scenario.sim.res,
                           provider=frame.mask.provider)
        save_grid_file(os.path.join(audit_dir, f"{tag}_cost.txt"),
                       frame.cost.values, scenario.sim.res)
        record = {
            "index": frame.index,
            "pose": list(frame.pose),
            "roll": frame.attitude[0],
            "pitch": frame.attitude[1],
            "r_explore": frame.r_explore,
            "executed": [list(p) for p in frame.executed],
        }
        if frame.plan is not None:
            record["plan"] = {
                "waypoint": list(frame.plan.waypoint),
                "cell": list(frame.plan.cell),
                "cost": frame.plan.cost,
                "generation": frame.plan.generation,
                "radius": frame.plan.radius,
                "path": [list(c) for c in frame.plan.path],
                "candidates": [[list(c), cost] for c, cost in frame.plan.candidates],
            }
        with open(os.path.join(audit_dir, f"{tag}.json"), "w", encoding="utf-8") as fh:
            json.dump(record, fh, indent=1, sort_keys=True)
            fh.write("\n")
