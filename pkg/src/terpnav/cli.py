"""Command-line interface.

  terpnav run --suite suites/high.json --planner terp --seeds 0..0 \
      --out results.csv [--render dir] [--audit dir] [--workers N]
  terpnav serve --transport stdio|tcp:<port> --scenario scenario.json
  terpnav metrics --audit dir

``run`` exits 0 when the suite completes, whatever the episode outcomes;
configuration problems exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .config import load_scenario
from .errors import ConfigError, TerpNavError
from .episodes import ALL_PLANNERS
from .metrics import compute_metrics
from .server import parse_transport, serve_stdio, serve_tcp
from .suite import run_suite
from .worlds import TerrainWorld


def parse_seeds(spec: str) -> list[int]:
    """'a..b' (inclusive), a single integer, or a comma list."""
    spec = spec.strip()
    if ".." in spec:
        a, b = spec.split("..", 1)
        lo, hi = int(a), int(b)
        if hi < lo:
            raise ConfigError(f"empty seed range {spec!r}")
        return list(range(lo, hi + 1))
    if "," in spec:
        return [int(s) for s in spec.split(",") if s.strip()]
    return [int(spec)]


def _cmd_run(args) -> int:
    seeds = parse_seeds(args.seeds)
    run = run_suite(args.suite, args.planner, seeds, out_csv=args.out,
                    render_dir=args.render, audit_dir=args.audit,
                    workers=args.workers)
    s = run.summary
    print(f"suite {run.suite_name} planner={run.planner}: "
          f"{s['success_rate_exact']} success "
          f"(ceg median {s['ceg_median']:.3f}, norm length median "
          f"{s['norm_length_median']:.3f}) in {run.wall_time:.1f}s wall")
    if args.out:
        print(f"wrote {args.out}")
    return 0


def _cmd_serve(args) -> int:
    kind, port = parse_transport(args.transport)
    scenario = load_scenario(args.scenario)
    if kind == "stdio":
        serve_stdio(scenario)
        return 0
    server = serve_tcp(port, scenario)
    print(f"env server listening on tcp:{server.server_address[1]}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def _recompute_episode(episode_dir: str):
    with open(os.path.join(episode_dir, "episode.json"), "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    scenario = meta["scenario"]
    world = TerrainWorld.from_dict(scenario["world"])
    trajectory = np.array(meta["trajectory"])
    return compute_metrics(trajectory, world, scenario["start"], scenario["goal"],
                           success=meta["status"]["kind"] == "success",
                           sim_time=meta["sim_time"],
                           failure_reason=meta["status"]["reason"])


def _cmd_metrics(args) -> int:
    mismatches = 0
    found = 0
    print("episode,success,ceg,norm_length,heading_dev,sim_time,check")
    for root, _dirs, files in sorted(os.walk(args.audit)):
        if "episode.json" not in files:
            continue
        found += 1
        metrics = _recompute_episode(root)
        check = ""
        stored_path = os.path.join(root, "metrics.json")
        if os.path.exists(stored_path):
            with open(stored_path, "r", encoding="utf-8") as fh:
                stored = json.load(fh)
            same = all(
                (math.isnan(stored[k]) and math.isnan(getattr(metrics, k)))
                or stored[k] == getattr(metrics, k)
                for k in ("ceg", "norm_length", "heading_dev"))
            check = "ok" if same else "MISMATCH"
            mismatches += 0 if same else 1
        print(f"{os.path.basename(root)},{str(metrics.success).lower()},"
              f"{metrics.ceg!r},{metrics.norm_length!r},{metrics.heading_dev!r},"
              f"{metrics.sim_time!r},{check}")
    if found == 0:
        print(f"no audit episodes under {args.audit}", file=sys.stderr)
        return 2
    return 1 if mismatches else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="terpnav",
                                     description="Elevation-aware navigation benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario suite with one planner")
    p_run.add_argument("--suite", required=True, help="suite JSON file")
    p_run.add_argument("--planner", required=True, choices=ALL_PLANNERS)
    p_run.add_argument("--seeds", default="0..0", help="episode seeds, e.g. 0..4")
    p_run.add_argument("--out", default=None, help="CSV output path")
    p_run.add_argument("--render", default=None, help="directory for SVG renders")
    p_run.add_argument("--audit", default=None, help="directory for per-frame dumps")
    p_run.add_argument("--workers", type=int, default=None,
                       help="parallel episode workers (default: auto)")
    p_run.set_defaults(func=_cmd_run)

    p_serve = sub.add_parser("serve", help="serve episodes over a wire protocol")
    p_serve.add_argument("--transport", required=True, help="stdio or tcp:<port>")
    p_serve.add_argument("--scenario", required=True, help="scenario JSON file")
    p_serve.set_defaults(func=_cmd_serve)

    p_metrics = sub.add_parser("metrics", help="recompute metrics from audit dumps")
    p_metrics.add_argument("--audit", required=True, help="audit directory")
    p_metrics.set_defaults(func=_cmd_metrics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except TerpNavError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
