"""Scenario configuration: simulation, reward, planner and tracker settings.

A scenario JSON file fully determines an episode: the world primitives,
start pose, goal, class tag, seed and every numeric default below.  Episodes
are bit-exact reproducible from (config, seed).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import ConfigError
from .worlds import TerrainWorld


@dataclass(frozen=True)
class SimConfig:
    """Kinematics, sensing and termination settings."""

    dt: float = 0.1
    v_max: float = 1.0
    w_max: float = 1.0
    accel_v: float = 1.0
    accel_w: float = 2.0
    goal_radius: float = 0.5
    t_max: float = 120.0
    clearance: float = 0.12
    stability_limit: float = math.radians(35.0)
    n: int = 40
    res: float = 0.25
    r_sense: float = 4.5
    sensor_height: float = 0.8
    ray_step: float = 0.05
    occlusion_margin: float = 0.01
    cell_subsamples: int = 3
    footprint: float = 0.6
    footprint_samples: int = 5

    def __post_init__(self):
        if self.dt <= 0 or self.v_max <= 0 or self.w_max <= 0:
            raise ConfigError("dt, v_max and w_max must be positive")
        if self.n % 2 != 0 or self.n < 4:
            raise ConfigError("grid side n must be even and >= 4")
        if self.res <= 0 or self.r_sense <= 0:
            raise ConfigError("res and r_sense must be positive")


@dataclass(frozen=True)
class RewardWeights:
    """Reward mixing factors and the heading-gradient weight vector.

    ``w`` matches the heading vector order (far to near) and weighs cells
    closer to the robot higher; it is strictly ascending with unit sum.
    """

    betas: tuple = (1.0, 0.5, 1.0, 1.0)
    w: np.ndarray = field(default_factory=lambda: RewardWeights.default_w(40))

    def __post_init__(self):
        if len(self.betas) != 4 or any(b < 0 for b in self.betas):
            raise ConfigError("betas must be 4 non-negative factors")
        w = np.asarray(self.w, dtype=float)
        if w.ndim != 1 or np.any(np.diff(w) <= 0):
            raise ConfigError("w must be strictly ascending toward the robot")
        object.__setattr__(self, "w", w)

    @staticmethod
    def default_w(n: int) -> np.ndarray:
        raw = np.linspace(0.1, 1.0, n // 2)
        return raw / raw.sum()

    @classmethod
    def default(cls, n: int) -> "RewardWeights":
        return cls(w=cls.default_w(n))


@dataclass(frozen=True)
class PlannerConfig:
    """Cost-map and waypoint-selection settings."""

    c_max: float = 0.3
    gamma_explore: float = math.pi / 3
    k1: float = 1.0
    k2: float = 0.5
    base_cost: float = 1.0
    waypoint_radius: float = 0.4
    replan_period: float = 1.5
    attention_eps: float = 0.05
    attention_power: float = 2.0

    def __post_init__(self):
        if self.k1 <= 0 or self.k2 < 0:
            raise ConfigError("k1 must be > 0 and k2 >= 0")
        if not (0 < self.gamma_explore <= math.pi):
            raise ConfigError("gamma_explore must lie in (0, pi]")
        if self.c_max <= 0:
            raise ConfigError("c_max must be > 0")


@dataclass(frozen=True)
class TrackerConfig:
    """Dynamic-window path-tracker settings."""

    horizon: float = 1.5
    v_samples: int = 5
    w_samples: int = 11
    deviation_weight: float = 1.0
    heading_weight: float = 0.6
    velocity_weight: float = 0.3
    carrot_distance: float = 0.8


@dataclass(frozen=True)
class BaselineConfig:
    """Settings for the comparison planners (DWA, ego-graph, ego-graph+)."""

    sense_period: float = 0.5
    slope_threshold: float = 0.55
    # ego-graph arc set and cost weights
    arc_count: int = 11
    arc_length: float = 2.0
    arc_span: float = math.radians(60.0)
    w_heading: float = 1.0
    w_gradient: float = 1.0
    w_distance: float = 0.5
    # classic DWA scoring
    dwa_heading: float = 1.0
    dwa_clearance: float = 0.3
    dwa_velocity: float = 0.7
    collision_radius: float = 0.25
    clearance_cap: float = 0.8


@dataclass(frozen=True)
class Scenario:
    """One episode definition: world, endpoints and all settings."""

    name: str
    world: TerrainWorld
    start: tuple  # (x, y, yaw)
    goal: tuple   # (x, y)
    seed: int = 0
    sim: SimConfig = field(default_factory=SimConfig)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    baselines: BaselineConfig = field(default_factory=BaselineConfig)
    rewards: RewardWeights | None = None

    def __post_init__(self):
        if self.rewards is None:
            object.__setattr__(self, "rewards", RewardWeights.default(self.sim.n))
        if len(self.rewards.w) != self.sim.n // 2:
            raise ConfigError("reward weight vector length must equal n/2")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "seed": self.seed,
            "world": self.world.to_dict(),
            "start": list(self.start),
            "goal": list(self.goal),
            "sim": asdict(self.sim),
            "planner": asdict(self.planner),
            "tracker": asdict(self.tracker),
            "baselines": asdict(self.baselines),
            "rewards": {"betas": list(self.rewards.betas),
                        "w": [float(v) for v in self.rewards.w]},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        try:
            sim = SimConfig(**d.get("sim", {}))
            rewards = None
            if "rewards" in d:
                rd = d["rewards"]
                rewards = RewardWeights(betas=tuple(rd.get("betas", (1.0, 0.5, 1.0, 1.0))),
                                        w=np.asarray(rd["w"], dtype=float)
                                        if "w" in rd else RewardWeights.default_w(sim.n))
            return cls(
                name=d.get("name", "scenario"),
                world=TerrainWorld.from_dict(d["world"]),
                start=tuple(float(v) for v in d["start"]),
                goal=tuple(float(v) for v in d["goal"]),
                seed=int(d.get("seed", 0)),
                sim=sim,
                planner=PlannerConfig(**d.get("planner", {})),
                tracker=TrackerConfig(**d.get("tracker", {})),
                baselines=BaselineConfig(**d.get("baselines", {})),
                rewards=rewards,
            )
        except KeyError as exc:
            raise ConfigError(f"scenario config missing field {exc}") from exc
        except TypeError as exc:
            raise ConfigError(f"bad scenario config: {exc}") from exc


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return Scenario.from_dict(data)


def save_scenario(scenario: Scenario, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
