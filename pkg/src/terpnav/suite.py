"""Benchmark suite runner: (scenario x seed) episodes for one planner,
aggregated into a deterministic CSV with a summary block.

Episodes run in parallel worker processes; results merge in (scenario,
seed) order, so identical (config, seeds) runs produce byte-identical
output.  Wall-clock timing is reported on stdout only, never in the CSV,
to keep it reproducible.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .episodes import run_episode
from .errors import ConfigError, TerpNavError
from .metrics import EpisodeMetrics, aggregate, metrics_for_result
from .render import render_trajectory
from .scenarios import expand_suite, jitter_start, load_suite

CSV_FIELDS = ["scenario", "seed", "planner", "success", "failure_reason",
              "ceg", "norm_length", "heading_dev", "sim_time", "frames"]


@dataclass
class SuiteRun:
    suite_name: str
    planner: str
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    metrics: list = field(default_factory=list)
    results: list = field(default_factory=list)
    wall_time: float = 0.0


def _episode_task(args):
    scenario, episode_seed, planner, keep_frames, audit_dir = args
    episode = jitter_start(scenario, episode_seed)
    t0 = time.perf_counter()
    try:
        result = run_episode(episode, planner, keep_grids=False, audit_dir=audit_dir)
        wall = time.perf_counter() - t0
        metrics = metrics_for_result(result, episode.world, episode.start,
                                     episode.goal, wall_time=wall)
    except TerpNavError as exc:
        # a crashed episode is a failure, the suite keeps going
        wall = time.perf_counter() - t0
        result = None
        metrics = EpisodeMetrics(success=False, ceg=math.nan, norm_length=math.nan,
                                 heading_dev=math.nan, sim_time=0.0, wall_time=wall,
                                 failure_reason=f"crash: {exc}")
    if result is not None and not keep_frames:
        result.frames = []
    return episode, result, metrics


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def write_csv(path, rows: list[dict], summary: dict) -> None:
    lines = [",".join(CSV_FIELDS)]
    for row in rows:
        lines.append(",".join(_fmt(row[k]) for k in CSV_FIELDS))
    lines.append("# summary")
    for key in sorted(summary):
        lines.append(f"{key},{_fmt(summary[key])}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def run_suite(suite, planner: str, seeds=(0,), *, out_csv=None, render_dir=None,
              audit_dir=None, workers: int | None = None,
              keep_frames: bool = False) -> SuiteRun:
    """Run every (scenario, seed) episode of a suite with one planner.

    ``suite`` is a path or an already-loaded suite dict.  Returns the rows,
    the aggregate summary and per-episode metrics; with ``keep_frames`` the
    full per-frame planning records stay attached to each result.
    """
    if isinstance(suite, (str, os.PathLike)):
        suite = load_suite(suite)
    scenarios = expand_suite(suite)
    if not scenarios:
        raise ConfigError("suite contains no scenarios")
    suite_name = suite.get("name", suite.get("class", "suite"))
    seeds = list(seeds)

    tasks = []
    for scenario in scenarios:
        for seed in seeds:
            episode_audit = None
            if audit_dir is not None:
                episode_audit = os.path.join(
                    audit_dir, f"{scenario.name}_s{seed}_{planner}")
            tasks.append((scenario, seed, planner, keep_frames, episode_audit))

    t0 = time.perf_counter()
    if workers is None:
        workers = min(os.cpu_count() or 1, 8)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_episode_task, tasks))
    else:
        outcomes = [_episode_task(t) for t in tasks]
    wall = time.perf_counter() - t0

    run = SuiteRun(suite_name=suite_name, planner=planner, wall_time=wall)
    for (scenario, seed, _, _, episode_audit), (episode, result, metrics) in zip(tasks, outcomes):
        if episode_audit is not None and result is not None:
            stored = dataclasses.asdict(metrics)
            stored.pop("wall_time", None)
            with open(os.path.join(episode_audit, "metrics.json"), "w",
                      encoding="utf-8") as fh:
                json.dump(stored, fh, indent=1, sort_keys=True)
                fh.write("\n")
        run.metrics.append(metrics)
        run.results.append(result)
        run.rows.append({
            "scenario": scenario.name,
            "seed": seed,
            "planner": planner,
            "success": metrics.success,
            "failure_reason": metrics.failure_reason,
            "ceg": metrics.ceg,
            "norm_length": metrics.norm_length,
            "heading_dev": metrics.heading_dev,
            "sim_time": metrics.sim_time,
            "frames": result.frame_count if result is not None else 0,
        })
        if render_dir is not None and result is not None:
            os.makedirs(render_dir, exist_ok=True)
            out = os.path.join(render_dir, f"{scenario.name}_s{seed}_{planner}.svg")
            render_trajectory(episode.world, [(planner, result.trajectory)], out,
                              start=episode.start, goal=episode.goal)
    run.summary = aggregate(run.metrics)
    if out_csv is not None:
        write_csv(out_csv, run.rows, run.summary)
    return run
