"""Environment server: line protocol, observation layout, reward parity."""

import json
import math
import socket
import threading

import numpy as np
import pytest

from terpnav.config import Scenario
from terpnav.scenarios import generate_scenario
from terpnav.server import EnvSession, parse_transport, serve_tcp
from terpnav.errors import ConfigError


@pytest.fixture(scope="module")
def flat_scenario():
    return generate_scenario("flat", 0)


@pytest.fixture(scope="module")
def tiny_scenario():
    # n=16 keeps per-step sensing cheap
    return generate_scenario("flat", 0, overrides={"sim": {"n": 16}})


def test_reset_observation_length_n40(flat_scenario):
    session = EnvSession(flat_scenario)
    reply = session.handle_line('{"cmd": "reset"}')
    n = flat_scenario.sim.n
    assert len(reply["obs"]) == n * n + 5 + n // 2 == 1625


def test_observation_layout(tiny_scenario):
    session = EnvSession(tiny_scenario)
    reply = session.handle_line('{"cmd": "reset"}')
    n = tiny_scenario.sim.n
    obs = np.array(reply["obs"])
    assert obs.shape == (n * n + 5 + n // 2,)
    d_goal, alpha_goal, alpha_rel, roll, pitch = obs[n * n:n * n + 5]
    assert d_goal == pytest.approx(
        math.hypot(flatten_goal(tiny_scenario)[0], flatten_goal(tiny_scenario)[1]), abs=1e-9)
    assert alpha_goal == pytest.approx(0.0, abs=1e-9)
    assert roll >= 0 and pitch >= 0


def flatten_goal(scenario):
    sx, sy, _ = scenario.start
    gx, gy = scenario.goal
    return gx - sx, gy - sy


def test_step_reward_matches_inprocess_computation(tiny_scenario):
    from terpnav.grids import gradient_field, infill_missing, normalize_elevation
    from terpnav.simulate import (compute_reward, initial_state,
                                  sense_elevation, step_kinematics)
    session = EnvSession(tiny_scenario)
    session.handle_line('{"cmd": "reset"}')
    reply = session.handle_line('{"cmd": "step", "action": [0.5, 0.1]}')
    scn = tiny_scenario
    sim = scn.sim
    state = initial_state(scn.world, scn.start, scn.goal, sim)
    state = step_kinematics(scn.world, state, 0.5 * sim.v_max, 0.1 * sim.w_max,
                            sim.dt, sim)
    raw = sense_elevation(scn.world, state, sim.n, sim.res, sim.r_sense,
                          sensor_height=sim.sensor_height, ray_step=sim.ray_step,
                          occlusion_margin=sim.occlusion_margin,
                          cell_subsamples=sim.cell_subsamples)
    grad = gradient_field(infill_missing(raw))
    elev_norm = normalize_elevation(infill_missing(raw), sim.clearance)
    expect = compute_reward(state, elev_norm, grad.heading, scn.rewards)
    assert reply["reward"] == pytest.approx(expect.total, abs=1e-12)
    assert reply["components"]["stable"] == pytest.approx(expect.stable, abs=1e-12)
    assert reply["done"] is False


def test_step_action_scaling_zero_action_is_stationary(tiny_scenario):
    session = EnvSession(tiny_scenario)
    r0 = session.handle_line('{"cmd": "reset"}')
    r1 = session.handle_line('{"cmd": "step", "action": [0, 0]}')
    assert r1["info"]["x"] == pytest.approx(r0["info"]["x"])
    assert r1["info"]["y"] == pytest.approx(r0["info"]["y"])


def test_step_before_reset_is_protocol_error(tiny_scenario):
    session = EnvSession(tiny_scenario)
    reply = session.handle_line('{"cmd": "step", "action": [0, 0]}')
    assert "error" in reply and "reset" in reply["error"]


def test_malformed_json_keeps_session_alive(tiny_scenario):
    session = EnvSession(tiny_scenario)
    reply = session.handle_line("{nope")
    assert "error" in reply
    assert "obs" in session.handle_line('{"cmd": "reset"}')


def test_bad_action_shape_rejected(tiny_scenario):
    session = EnvSession(tiny_scenario)
    session.handle_line('{"cmd": "reset"}')
    assert "error" in session.handle_line('{"cmd": "step", "action": [1, 2, 3]}')
    assert "error" in session.handle_line('{"cmd": "step", "action": "fast"}')


def test_step_after_done_is_protocol_error(tiny_scenario):
    # drop the goal on the start line so the first step finishes the episode
    scn = tiny_scenario
    near = Scenario(name="near", world=scn.world,
                    start=scn.start, goal=(scn.start[0] + 0.45, scn.start[1]),
                    sim=scn.sim)
    session = EnvSession(near)
    session.handle_line('{"cmd": "reset"}')
    reply = session.handle_line('{"cmd": "step", "action": [0.1, 0]}')
    assert reply["done"] is True
    reply = session.handle_line('{"cmd": "step", "action": [0.1, 0]}')
    assert "error" in reply and "done" in reply["error"]


def test_close_ends_session(tiny_scenario):
    session = EnvSession(tiny_scenario)
    reply = session.handle_line('{"cmd": "close"}')
    assert reply == {"ok": True, "closed": True}
    assert session.closed


def test_parse_transport():
    assert parse_transport("stdio") == ("stdio", None)
    assert parse_transport("tcp:5005") == ("tcp", 5005)
    with pytest.raises(ConfigError):
        parse_transport("udp:1")
    with pytest.raises(ConfigError):
        parse_transport("tcp:abc")


def test_tcp_round_trip(tiny_scenario):
    server = serve_tcp(0, tiny_scenario)
    port = server.server_address[1]
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        with socket.create_connection(("127.0.0.1", port), timeout=5) as sock:
            fh = sock.makefile("rw", encoding="utf-8")
            fh.write('{"cmd": "reset"}\n')
            fh.flush()
            reply = json.loads(fh.readline())
            n = tiny_scenario.sim.n
            assert len(reply["obs"]) == n * n + 5 + n // 2
            fh.write('{"cmd": "step", "action": [0.3, 0.0]}\n')
            fh.flush()
            reply = json.loads(fh.readline())
            assert "reward" in reply and "done" in reply
            fh.write('{"cmd": "close"}\n')
            fh.flush()
            assert json.loads(fh.readline())["closed"] is True
    finally:
        server.shutdown()
        server.server_close()
        thread.join(timeout=5)
