"""Elevation-aware local navigation with attention-weighted cost-maps.

The pipeline: sense a robot-centric elevation grid (with occlusion), infill
and normalize it, weight it by an attention mask, threshold into a cost-map,
pick a least-cost waypoint on an adaptive exploration arc via Dijkstra, and
track the path with a dynamic-window controller.  A benchmark harness runs
seeded scenario suites against DWA and ego-graph baselines, and an
environment server exposes episodes over line-delimited JSON for training.
"""

from .attention import analytic_attention, load_mask, save_mask, uniform_mask
from .config import (BaselineConfig, PlannerConfig, RewardWeights, Scenario,
                     SimConfig, TrackerConfig, load_scenario, save_scenario)
from .episodes import ALL_PLANNERS, EpisodeResult, run_episode
from .errors import (ConfigError, ContractError, DegenerateRegionError,
                     GridFormatError, PlannerStuckError, SensingError,
                     TerpNavError)
from .grids import (AttentionMask, CostMap, ElevationGrid, GradientField,
                    gradient_field, index_to_world, infill_missing,
                    load_grid_file, normalize_elevation, save_grid_file,
                    world_to_index)
from .metrics import EpisodeMetrics, compute_metrics
from .planning import (WaypointPlan, build_costmap, candidate_arc,
                       dijkstra_field, explore_radius, select_waypoint)
from .scenarios import expand_suite, generate_scenario, load_suite
from .simulate import (RobotState, compute_reward, episode_status,
                       estimate_attitude, goal_geometry, sense_elevation,
                       step_kinematics)
from .suite import run_suite
from .tracking import track_path
from .worlds import Box, Hill, Plane, Ramp, TerrainWorld

__version__ = "0.1.0"
