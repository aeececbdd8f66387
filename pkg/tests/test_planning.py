"""Cost-maps, exploration radius, candidate arcs, Dijkstra and waypoints."""

import math

import numpy as np
import pytest

from terpnav.config import PlannerConfig
from terpnav.errors import (ContractError, DegenerateRegionError,
                            PlannerStuckError)
from terpnav.grids import AttentionMask, CostMap, ElevationGrid
from terpnav.planning import (build_costmap, candidate_arc, dijkstra_field,
                              explore_radius, select_waypoint)

SQRT2 = math.sqrt(2.0)


def elev_of(values, res=0.25):
    return ElevationGrid.from_values(np.asarray(values, dtype=float), res)


def mask_of(values):
    values = np.asarray(values, dtype=float)
    return AttentionMask(n=values.shape[0], values=values)


def cost_of(values, res=0.25, c_max=None):
    values = np.asarray(values, dtype=float)
    finite = values[np.isfinite(values)]
    cm = c_max if c_max is not None else (float(finite.max()) if finite.size else 1.0)
    return CostMap(n=values.shape[0], res=res, values=values, c_max=cm)


# ---------------------------------------------------------------------------
# cost-map construction


def test_zero_elevation_gives_zero_cost():
    cost = build_costmap(elev_of(np.zeros((8, 8))), mask_of(np.ones((8, 8))), 0.3)
    assert np.all(cost.values == 0.0)


def test_uniform_mask_cost_is_abs_elevation():
    rng = np.random.default_rng(1)
    vals = rng.uniform(-0.4, 0.4, (8, 8))
    cost = build_costmap(elev_of(vals), mask_of(np.ones((8, 8))), 0.5)
    assert np.array_equal(cost.values, np.abs(vals))


def test_costmap_cellwise_oracle_random():
    rng = np.random.default_rng(2)
    for _ in range(50):
        vals = rng.uniform(-2, 2, (6, 6))
        mask = rng.uniform(0, 1, (6, 6))
        c_max = rng.uniform(0.1, 1.5)
        cost = build_costmap(elev_of(vals), mask_of(mask), c_max)
        for r in range(6):
            for c in range(6):
                raw = abs(vals[r, c] * mask[r, c])
                expect = math.inf if raw > c_max else raw
                assert cost.values[r, c] == expect


def test_thresholded_set_is_exactly_above_cmax():
    rng = np.random.default_rng(3)
    vals = rng.uniform(-2, 2, (10, 10))
    mask = rng.uniform(0, 1, (10, 10))
    cost = build_costmap(elev_of(vals), mask_of(mask), 0.4)
    assert np.array_equal(np.isinf(cost.values), np.abs(vals * mask) > 0.4)


def test_costmap_size_mismatch_rejected():
    with pytest.raises(ContractError):
        build_costmap(elev_of(np.zeros((8, 8))), mask_of(np.ones((6, 6))), 0.3)


# ---------------------------------------------------------------------------
# exploration radius


def test_high_mean_cost_shrinks_radius_to_k1():
    vals = np.full((16, 16), 100.0)
    cost = cost_of(vals, c_max=200.0)
    r = explore_radius(cost, 2.0, k1=1.0, k2=0.5, r_sense=4.5)
    assert r == pytest.approx(1.0, abs=0.01)


def test_zero_mean_cost_caps_radius():
    cost = cost_of(np.zeros((16, 16)))
    assert explore_radius(cost, 2.0, 1.0, 0.5, 4.5) == 4.5 - 0.25


def test_direct_radius_evaluation():
    cost = cost_of(np.full((40, 40), 0.5), c_max=1.0)
    r = explore_radius(cost, 3.0, k1=1.0, k2=0.5, r_sense=40.0)
    assert r == pytest.approx(2.0, abs=1e-12)


def test_all_infinite_circle_raises_degenerate():
    vals = np.full((8, 8), np.inf)
    cost = cost_of(vals, c_max=1.0)
    with pytest.raises(DegenerateRegionError):
        explore_radius(cost, 1.0, 1.0, 0.5, 4.5)


def test_radius_monotone_in_mean_cost():
    r_prev = math.inf
    for level in [0.1, 0.2, 0.4, 0.8, 1.6]:
        cost = cost_of(np.full((16, 16), level), c_max=2.0)
        r = explore_radius(cost, 2.0, 1.0, 0.5, 100.0)
        assert r <= r_prev
        r_prev = r


# ---------------------------------------------------------------------------
# candidate arcs


def test_full_circle_arc_is_a_ring():
    cost = cost_of(np.zeros((40, 40)))
    cells = candidate_arc(cost, 2.0, 2 * math.pi, 0.0, generation=1)
    radii = [math.hypot(i, j) * 0.25 for i, j in cells]
    assert min(radii) > 1.5 and max(radii) < 2.5
    bearings = sorted(math.atan2(j, i) for i, j in cells)
    gaps = np.diff(bearings)
    assert gaps.max() < 0.4  # ring has no large angular holes


def test_tiny_arc_is_single_cell_at_goal_bearing():
    cost = cost_of(np.zeros((40, 40)))
    cells = candidate_arc(cost, 2.0, 1e-6, 0.5, generation=1)
    assert len(cells) == 1
    i, j = cells[0]
    assert math.atan2(j, i) == pytest.approx(0.5, abs=0.2)


def test_generation_two_disjoint_from_generation_one():
    cost = cost_of(np.zeros((40, 40)))
    rng = np.random.default_rng(4)
    for _ in range(20):
        r = rng.uniform(0.6, 4.0)
        gamma = rng.uniform(0.2, math.pi)
        bearing = rng.uniform(-math.pi, math.pi)
        one = set(candidate_arc(cost, r, gamma, bearing, 1))
        two = set(candidate_arc(cost, r, gamma, bearing, 2))
        assert not (one & two)


def test_arc_cells_sorted_by_bearing_error():
    cost = cost_of(np.zeros((40, 40)))
    cells = candidate_arc(cost, 3.0, math.pi / 2, 0.3, generation=1)
    errs = [abs(math.atan2(j, i) - 0.3) for i, j in cells]
    assert errs == sorted(errs)


def test_arc_requires_min_radius():
    cost = cost_of(np.zeros((40, 40)))
    with pytest.raises(ContractError):
        candidate_arc(cost, 0.3, math.pi, 0.0, 1)


# ---------------------------------------------------------------------------
# Dijkstra


def brute_force_field(cost: CostMap, source=(0, 0), base_cost=1.0):
    """Relax every edge to a fixed point (Bellman-Ford style); accumulates
    in the same order as any shortest-path expansion, so on non-negative
    weights it reproduces Dijkstra's float results exactly."""
    n = cost.n
    h = n // 2
    vals = cost.values
    dist = np.full((n, n), np.inf)
    dist[source[0] + h, source[1] + h] = 0.0
    moves = [(-1, -1, SQRT2), (-1, 0, 1.0), (-1, 1, SQRT2), (0, -1, 1.0),
             (0, 1, 1.0), (1, -1, SQRT2), (1, 0, 1.0), (1, 1, SQRT2)]
    changed = True
    while changed:
        changed = False
        for r in range(n):
            for c in range(n):
                if not np.isfinite(dist[r, c]):
                    continue
                for dr, dc, step in moves:
                    rr, cc = r + dr, c + dc
                    if not (0 <= rr < n and 0 <= cc < n):
                        continue
                    if not np.isfinite(vals[rr, cc]):
                        continue
                    nd = dist[r, c] + step * cost.res * (base_cost + vals[rr, cc])
                    if nd < dist[rr, cc]:
                        dist[rr, cc] = nd
                        changed = True
    return dist


def floyd_warshall_from_source(cost: CostMap, source=(0, 0), base_cost=1.0):
    n = cost.n
    h = n // 2
    vals = cost.values
    size = n * n
    d = np.full((size, size), np.inf)
    for r in range(n):
        for c in range(n):
            u = r * n + c
            d[u, u] = 0.0
            if not np.isfinite(vals[r, c]):
                continue
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    if dr == dc == 0:
                        continue
                    rr, cc = r + dr, c + dc
                    if not (0 <= rr < n and 0 <= cc < n):
                        continue
                    if not np.isfinite(vals[rr, cc]):
                        continue
                    step = SQRT2 if dr and dc else 1.0
                    d[rr * n + cc, r * n + c] = min(
                        d[rr * n + cc, r * n + c],
                        step * cost.res * (base_cost + vals[r, c]))
    for k in range(size):
        d = np.minimum(d, d[:, k:k + 1] + d[k:k + 1, :])
    src = (source[0] + h) * n + (source[1] + h)
    return d[src].reshape(n, n)


def random_cost(rng, n=6, p_inf=0.2, res=0.25):
    vals = rng.uniform(0, 3.0, (n, n))
    vals[rng.random((n, n)) < p_inf] = np.inf
    vals[n // 2, n // 2] = rng.uniform(0, 3.0)  # keep the source finite
    return cost_of(vals, res=res, c_max=3.0)


def test_dijkstra_uniform_grid_matches_chebyshev_geodesic():
    cost = cost_of(np.zeros((6, 6)), res=1.0)
    field = dijkstra_field(cost, base_cost=1.0)
    h = 3
    for i in range(-h, h):
        for j in range(-h, h):
            diag = min(abs(i), abs(j))
            straight = max(abs(i), abs(j)) - diag
            expect = diag * SQRT2 + straight
            assert field.dist[i + h, j + h] == pytest.approx(expect, abs=1e-12)


def test_dijkstra_wall_disconnects_far_side():
    vals = np.zeros((8, 8))
    vals[5, :] = np.inf
    field = dijkstra_field(cost_of(vals))
    assert np.isinf(field.dist[6:, :]).all()
    assert np.isfinite(field.dist[:5, :]).all()


def test_dijkstra_matches_brute_force_exactly_on_random_grids():
    rng = np.random.default_rng(12)
    for _ in range(60):
        cost = random_cost(rng, n=6)
        field = dijkstra_field(cost, base_cost=1.0)
        oracle = brute_force_field(cost)
        assert np.array_equal(field.dist, oracle)


def test_dijkstra_close_to_floyd_warshall():
    # Floyd-Warshall associates sums differently, so exactness is only up to
    # accumulated rounding
    rng = np.random.default_rng(13)
    for _ in range(10):
        cost = random_cost(rng, n=6)
        field = dijkstra_field(cost)
        fw = floyd_warshall_from_source(cost)
        both = np.isfinite(field.dist) & np.isfinite(fw)
        assert np.array_equal(np.isfinite(field.dist), np.isfinite(fw))
        assert np.allclose(field.dist[both], fw[both], rtol=1e-9, atol=1e-9)


def test_dijkstra_path_reconstruction():
    rng = np.random.default_rng(14)
    cost = random_cost(rng, n=6, p_inf=0.15)
    field = dijkstra_field(cost)
    h = 3
    for i in range(-h, h):
        for j in range(-h, h):
            if not np.isfinite(field.dist[i + h, j + h]):
                continue
            path = field.path_to((i, j))
            assert path[0] == (0, 0) and path[-1] == (i, j)
            for (a, b), (c, d) in zip(path, path[1:]):
                assert max(abs(a - c), abs(b - d)) == 1


def test_dijkstra_infinite_source_rejected():
    vals = np.zeros((6, 6))
    vals[3, 3] = np.inf
    with pytest.raises(ContractError):
        dijkstra_field(cost_of(vals))


# ---------------------------------------------------------------------------
# waypoint selection


def test_uniform_cost_picks_goalward_arc_cell():
    cost = cost_of(np.zeros((40, 40)))
    cfg = PlannerConfig()
    field = dijkstra_field(cost, base_cost=cfg.base_cost)
    goal = (8.0, 0.0)
    plan = select_waypoint(cost, cfg, goal, field, 3.0)
    assert plan.generation == 1
    i, j = plan.cell
    assert abs(math.atan2(j, i)) < 0.35
    assert plan.path[0] == (0, 0)
    plan.validate(cost)


def test_ridge_forces_waypoint_to_free_side():
    vals = np.zeros((40, 40))
    h = 20
    # infinite ridge covering the goal-side half of the arc, skewed up
    vals[h + 6:h + 14, h:] = np.inf
    cost = cost_of(vals)
    cfg = PlannerConfig(gamma_explore=math.pi / 2)
    field = dijkstra_field(cost, base_cost=cfg.base_cost)
    plan = select_waypoint(cost, cfg, (8.0, 0.0), field, 2.5)
    i, j = plan.cell
    assert j < 0  # free side
    best = plan.cost
    for cell, c in plan.candidates:
        if math.isfinite(c):
            assert best <= c
    plan.validate(cost)


def test_cost_ties_break_toward_goal():
    cost = cost_of(np.zeros((40, 40)))
    cfg = PlannerConfig(gamma_explore=math.pi)
    field = dijkstra_field(cost, base_cost=cfg.base_cost)
    goal = (4.0, 3.0)
    plan = select_waypoint(cost, cfg, goal, field, 2.0)
    gx, gy = goal
    d_goal = math.hypot(plan.waypoint[0] - gx, plan.waypoint[1] - gy)
    for cell, c in plan.candidates:
        if c == plan.cost:
            d = math.hypot(cell[0] * 0.25 - gx, cell[1] * 0.25 - gy)
            assert d_goal <= d + 1e-12


def test_generation_two_fallback_when_cone_blocked():
    vals = np.zeros((40, 40))
    h = 20
    # block a wide frontal wedge at all radii
    for i in range(40):
        for j in range(40):
            ci, cj = i - h, j - h
            r = math.hypot(ci, cj)
            if r >= 2 and abs(math.atan2(cj, ci)) < math.pi / 4:
                vals[i, j] = np.inf
    cost = cost_of(vals)
    cfg = PlannerConfig(gamma_explore=math.pi / 3)
    field = dijkstra_field(cost, base_cost=cfg.base_cost)
    plan = select_waypoint(cost, cfg, (8.0, 0.0), field, 2.0)
    assert plan.generation == 2
    plan.validate(cost)


def test_planner_stuck_when_fully_enclosed():
    vals = np.zeros((40, 40))
    h = 20
    for i in range(40):
        for j in range(40):
            r = math.hypot(i - h, j - h) * 0.25
            if 0.5 <= r:
                vals[i, j] = np.inf
    cost = cost_of(vals)
    cfg = PlannerConfig()
    field = dijkstra_field(cost, base_cost=cfg.base_cost)
    with pytest.raises(PlannerStuckError):
        select_waypoint(cost, cfg, (8.0, 0.0), field, 4.0)
