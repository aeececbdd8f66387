"""Navigation core: cost-map construction, adaptive exploration circle, arc
candidates, Dijkstra least-cost fields and waypoint selection.

All cells here are centered indices (i, j) with +i along the robot heading;
the planner works entirely in the robot frame of the sensing instant.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .config import PlannerConfig
from .errors import ContractError, DegenerateRegionError, PlannerStuckError
from .grids import AttentionMask, CostMap, ElevationGrid, centered_indices
from .simulate import wrap_angle

SQRT2 = math.sqrt(2.0)

# 8-connected neighborhood and per-step lengths (in cells)
_NEIGHBORS = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
_STEP_LEN = [SQRT2, 1.0, SQRT2, 1.0, 1.0, SQRT2, 1.0, SQRT2]


def build_costmap(elev_norm: ElevationGrid, mask: AttentionMask,
                  c_max: float) -> CostMap:
    """Element-wise |normalized elevation * mask| with costs above c_max
    promoted to +inf (forbidden)."""
    if elev_norm.n != mask.n:
        raise ContractError(
            f"grid sizes differ: elevation n={elev_norm.n}, mask n={mask.n}")
    if not elev_norm.is_complete:
        raise ContractError("cost-map needs a fully infilled elevation grid")
    cost = np.abs(elev_norm.values * mask.values)
    cost = np.where(cost > c_max, np.inf, cost)
    return CostMap(n=elev_norm.n, res=elev_norm.res, values=cost, c_max=c_max)


def explore_radius(cost: CostMap, prior_radius: float, k1: float, k2: float,
                   r_sense: float) -> float:
    """Adapt the exploration radius to the mean finite cost inside the
    current circle: r = min(r_sense - res, k1 + k2 / mean); zero mean (or
    k2 = 0 on free terrain) caps at r_sense - res."""
    ii, jj = centered_indices(cost.n)
    in_circle = np.hypot(ii, jj) * cost.res <= prior_radius
    vals = cost.values[in_circle]
    finite = vals[np.isfinite(vals)]
    if finite.size == 0:
        raise DegenerateRegionError("all cells inside the exploration circle are infinite")
    cap = r_sense - cost.res
    mean = float(finite.mean())
    if mean == 0.0:
        return cap
    return min(cap, k1 + k2 / mean)


def candidate_arc(cost: CostMap, r_explore: float, gamma: float,
                  goal_bearing: float, generation: int = 1) -> list[tuple[int, int]]:
    """Cells crossed by the exploration arc centered on the goal bearing.

    Generation 1 covers angular width gamma; generation 2 returns the cells
    of the 2*gamma arc that generation 1 did not already contain.  Cells are
    deduplicated, clipped to the grid and ordered by |bearing - goal_bearing|
    ascending (ties toward smaller (i, j)).
    """
    if generation not in (1, 2):
        raise ContractError("arc generation must be 1 or 2")
    if r_explore < 2 * cost.res:
        raise ContractError(f"r_explore={r_explore} must be >= 2*res")
    width = gamma if generation == 1 else 2 * gamma

    def arc_cells(half_width: float) -> set[tuple[int, int]]:
        step = cost.res / r_explore
        count = int(math.ceil(half_width / step))
        offsets = np.arange(-count, count + 1) * step
        offsets = np.clip(offsets, -half_width, half_width)
        angles = goal_bearing + offsets
        ci = np.rint(r_explore * np.cos(angles) / cost.res).astype(int)
        cj = np.rint(r_explore * np.sin(angles) / cost.res).astype(int)
        h = cost.n // 2
        keep = (ci >= -h) & (ci < h) & (cj >= -h) & (cj < h)
        return set(zip(ci[keep].tolist(), cj[keep].tolist()))

    cells = arc_cells(width / 2)
    if generation == 2:
        cells -= arc_cells(gamma / 2)

    def sort_key(cell):
        bearing = math.atan2(cell[1], cell[0])
        return (abs(wrap_angle(bearing - goal_bearing)), cell[0], cell[1])

    ordered = sorted(cells, key=sort_key)
    if not ordered:
        raise ContractError("exploration arc has no cells inside the grid")
    return ordered


@dataclass(frozen=True)
class DijkstraField:
    """Cost-to-reach field plus parents for path reconstruction."""

    n: int
    res: float
    dist: np.ndarray     # (n, n) array-indexed, +inf where unreachable
    parent: np.ndarray   # (n, n) flat parent index, -1 at source/unreached
    source: tuple

    def cost_at(self, i: int, j: int) -> float:
        h = self.n // 2
        return float(self.dist[i + h, j + h])

    def path_to(self, cell: tuple[int, int]) -> list[tuple[int, int]]:
        """Least-cost 8-connected cell path from the source to ``cell``."""
        h = self.n // 2
        r, c = cell[0] + h, cell[1] + h
        if not np.isfinite(self.dist[r, c]):
            raise ContractError(f"cell {cell} is unreachable")
        flat = r * self.n + c
        out = []
        while flat >= 0:
            out.append((flat // self.n - h, flat % self.n - h))
            flat = int(self.parent.ravel()[flat])
        out.reverse()
        if out[0] != self.source:
            raise ContractError("parent chain does not reach the source")
        return out


def dijkstra_field(cost: CostMap, source: tuple[int, int] = (0, 0),
                   base_cost: float = 1.0) -> DijkstraField:
    """Single-source least-cost field over 8-connected finite cells.

    Edge weight into a cell = step length (res or res*sqrt(2)) times
    (base_cost + cell cost), so zero-cost terrain still pays distance.
    """
    n = cost.n
    h = n // 2
    sr, sc = source[0] + h, source[1] + h
    vals = cost.values
    if not (0 <= sr < n and 0 <= sc < n):
        raise ContractError(f"source {source} outside the grid")
    if not np.isfinite(vals[sr, sc]):
        raise ContractError("Dijkstra source cell has infinite cost")
    dist = np.full((n, n), np.inf)
    parent = np.full(n * n, -1, dtype=np.int64)
    dist[sr, sc] = 0.0
    heap = [(0.0, sr * n + sc)]
    dist_flat = dist.ravel()
    res = cost.res
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist_flat[u]:
            continue
        ur, uc = divmod(u, n)
        for (di, dj), step in zip(_NEIGHBORS, _STEP_LEN):
            vr, vc = ur + di, uc + dj
            if not (0 <= vr < n and 0 <= vc < n):
                continue
            cell_cost = vals[vr, vc]
            if not np.isfinite(cell_cost):
                continue
            nd = d + step * res * (base_cost + cell_cost)
            v = vr * n + vc
            if nd < dist_flat[v]:
                dist_flat[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd, v))
    return DijkstraField(n=n, res=res, dist=dist,
                         parent=parent.reshape(n, n), source=source)


@dataclass(frozen=True)
class WaypointPlan:
    """Selected waypoint with its reconstructed least-cost path."""

    waypoint: tuple            # (x, y) robot frame, meters
    cell: tuple                # centered (i, j)
    path: tuple                # centered cells from (0, 0) to cell
    cost: float                # cumulative Dijkstra cost
    generation: int            # arc generation used (1 or 2)
    radius: float              # exploration radius that produced the arc
    least_cost_cells: tuple    # every candidate tying at the minimum cost
    candidates: tuple          # ((i, j), cost) over the evaluated arc

    def validate(self, cost: CostMap) -> None:
        """Assert the plan invariants against its cost-map."""
        if self.path[0] != (0, 0):
            raise ContractError("path must start at the robot cell")
        for (a, b), (c, d) in zip(self.path, self.path[1:]):
            if max(abs(a - c), abs(b - d)) != 1:
                raise ContractError("path must be 8-connected")
        for cell in self.path:
            if math.isinf(cost.at(*cell)):
                raise ContractError("path crosses a forbidden cell")
        if not math.isfinite(self.cost):
            raise ContractError("plan cost must be finite")


def select_waypoint(cost: CostMap, config: PlannerConfig, goal_robot,
                    field: DijkstraField, r_explore: float) -> WaypointPlan:
    """Least-cost waypoint on the exploration arc, with fallbacks.

    Tries the generation-1 arc, then generation 2, then both again at half
    the radius.  Among least-cost candidates it prefers the one closest to
    the goal, then the smallest bearing error.  Raises PlannerStuckError
    when every fallback is exhausted.
    """
    goal_bearing = math.atan2(goal_robot[1], goal_robot[0])
    attempts = [(1, r_explore), (2, r_explore),
                (1, r_explore / 2), (2, r_explore / 2)]
    for generation, radius in attempts:
        if radius < 2 * cost.res:
            continue
        try:
            cells = candidate_arc(cost, radius, config.gamma_explore,
                                  goal_bearing, generation)
        except ContractError:
            continue
        scored = [(cell, field.cost_at(*cell)) for cell in cells]
        finite = [(cell, c) for cell, c in scored if math.isfinite(c)]
        if not finite:
            continue
        best_cost = min(c for _, c in finite)
        least = [cell for cell, c in finite if c == best_cost]

        def tie_key(cell):
            x, y = cell[0] * cost.res, cell[1] * cost.res
            d_goal = math.hypot(x - goal_robot[0], y - goal_robot[1])
            bearing_err = abs(wrap_angle(math.atan2(cell[1], cell[0]) - goal_bearing))
            return (d_goal, bearing_err, cell[0], cell[1])

        chosen = min(least, key=tie_key)
        path = tuple(field.path_to(chosen))
        return WaypointPlan(
            waypoint=(chosen[0] * cost.res, chosen[1] * cost.res),
            cell=chosen,
            path=path,
            cost=best_cost,
            generation=generation,
            radius=radius,
            least_cost_cells=tuple(least),
            candidates=tuple(scored),
        )
    raise PlannerStuckError("no finite-cost waypoint after arc and radius fallbacks")
