"""Line-delimited JSON environment server over stdio or TCP.

Protocol (one JSON object per line):
  {"cmd": "reset"}                       -> {"obs": [...], "info": {...}}
  {"cmd": "step", "action": [a0, a1]}    -> {"obs", "reward", "components",
                                             "done", "info"}
  {"cmd": "close"}                       -> {"ok": true, "closed": true}

Actions live in [-1, 1]^2 and scale linearly to (v_max, w_max); numeric
values outside that range are clipped.  The observation is the flattened
normalized elevation map (n^2 values), then [d_goal, alpha_goal,
alpha_relative, |roll|, |pitch|], then the heading gradient vector (n/2).
Malformed messages get an {"error": ...} reply and the session continues;
stepping before reset or after done is a protocol error.  One client is
served at a time.
"""

from __future__ import annotations

import json
import socketserver
import sys

import numpy as np

from .config import Scenario
from .errors import ConfigError
from .grids import gradient_field, infill_missing, normalize_elevation
from .simulate import (compute_reward, episode_status, goal_geometry,
                       initial_state, sense_elevation, step_kinematics)


class EnvSession:
    """Transport-agnostic protocol handler for one client."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.state = None
        self.done = False
        self.closed = False

    def _observe(self):
        scn = self.scenario
        sim = scn.sim
        raw = sense_elevation(scn.world, self.state, sim.n, sim.res, sim.r_sense,
                              sensor_height=sim.sensor_height,
                              ray_step=sim.ray_step,
                              occlusion_margin=sim.occlusion_margin,
                              cell_subsamples=sim.cell_subsamples)
        filled = infill_missing(raw)
        elev_norm = normalize_elevation(filled, sim.clearance)
        grad = gradient_field(filled)
        d_goal, alpha_goal, alpha_rel = goal_geometry(self.state)
        obs = np.concatenate([
            elev_norm.values.ravel(),
            [d_goal, alpha_goal, alpha_rel, abs(self.state.roll), abs(self.state.pitch)],
            grad.heading,
        ])
        return obs, elev_norm, grad

    def _info(self, status):
        return {"status": status.kind, "reason": status.reason,
                "t": self.state.t, "x": self.state.x, "y": self.state.y}

    def handle_line(self, line: str) -> dict:
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            return {"error": f"invalid JSON: {exc}"}
        if not isinstance(msg, dict) or "cmd" not in msg:
            return {"error": "message must be an object with a 'cmd' field"}
        cmd = msg["cmd"]
        if cmd == "reset":
            return self._reset()
        if cmd == "step":
            return self._step(msg)
        if cmd == "close":
            self.closed = True
            return {"ok": True, "closed": True}
        return {"error": f"unknown cmd {cmd!r}"}

    def _reset(self) -> dict:
        scn = self.scenario
        self.state = initial_state(scn.world, scn.start, scn.goal, scn.sim)
        self.done = False
        obs, _, _ = self._observe()
        status = episode_status(self.state, scn.sim)
        return {"obs": obs.tolist(), "info": self._info(status)}

    def _step(self, msg: dict) -> dict:
        if self.state is None:
            return {"error": "protocol: step before reset"}
        if self.done:
            return {"error": "protocol: episode is done, reset first"}
        action = msg.get("action")
        if (not isinstance(action, (list, tuple)) or len(action) != 2
                or not all(isinstance(a, (int, float)) for a in action)):
            return {"error": "action must be a list of 2 numbers in [-1, 1]"}
        sim = self.scenario.sim
        a0 = min(max(float(action[0]), -1.0), 1.0)
        a1 = min(max(float(action[1]), -1.0), 1.0)
        self.state = step_kinematics(self.scenario.world, self.state,
                                     a0 * sim.v_max, a1 * sim.w_max, sim.dt, sim)
        obs, elev_norm, grad = self._observe()
        reward = compute_reward(self.state, elev_norm, grad.heading,
                                self.scenario.rewards)
        status = episode_status(self.state, sim)
        self.done = status.terminal
        return {
            "obs": obs.tolist(),
            "reward": reward.total,
            "components": {"dist": reward.dist, "head": reward.head,
                           "stable": reward.stable, "grad": reward.grad},
            "done": self.done,
            "info": self._info(status),
        }


def _encode(reply: dict) -> str:
    return json.dumps(reply, sort_keys=True, separators=(",", ":")) + "\n"


def serve_stdio(scenario: Scenario, stdin=None, stdout=None) -> None:
    """Serve one session over stdin/stdout until close or EOF."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    session = EnvSession(scenario)
    for line in stdin:
        if not line.strip():
            continue
        reply = session.handle_line(line)
        stdout.write(_encode(reply))
        stdout.flush()
        if session.closed:
            break


class _EnvHandler(socketserver.StreamRequestHandler):
    def handle(self):
        session = EnvSession(self.server.scenario)
        while not session.closed:
            line = self.rfile.readline()
            if not line:
                break
            text = line.decode("utf-8").strip()
            if not text:
                continue
            reply = session.handle_line(text)
            self.wfile.write(_encode(reply).encode("utf-8"))
            self.wfile.flush()


class EnvServer(socketserver.TCPServer):
    """Serial TCP server: one client at a time, sessions end on close/EOF."""

    allow_reuse_address = True

    def __init__(self, address, scenario: Scenario):
        super().__init__(address, _EnvHandler)
        self.scenario = scenario


def serve_tcp(port: int, scenario: Scenario, host: str = "127.0.0.1") -> EnvServer:
    return EnvServer((host, port), scenario)


def parse_transport(spec: str):
    """'stdio' or 'tcp:<port>'."""
    if spec == "stdio":
        return ("stdio", None)
    if spec.startswith("tcp:"):
        try:
            return ("tcp", int(spec.split(":", 1)[1]))
        except ValueError as exc:
            raise ConfigError(f"bad tcp transport {spec!r}") from exc
    raise ConfigError(f"transport must be 'stdio' or 'tcp:<port>', got {spec!r}")
