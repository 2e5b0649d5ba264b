"""Best-response trajectory planning over the implicit time-extended roadmap.

Space-time nodes are (vertex, step) with step an integer count of dt ticks
after the departure time; every edge traversal is rounded up to a whole
number of ticks, so edges may be traveled below v_max. Self-loop wait edges
of exactly one tick exist at every vertex. The search is least-arrival-time
best-first with the static-distance/v_max admissible heuristic; ties break
on fewer waits, then vertex index, making results deterministic.
"""

import heapq
import math
from dataclasses import dataclass

from .geometry import EPS_GEOM, Point, dist
from .roadmap import Roadmap
from .trajectory import (Trajectory, min_separation_linear_vs_trajectory,
                         point_vs_trajectory_min_separation)


class NoPath(Exception):
    """No goal node exists within the search horizon.

    horizon_exhausted distinguishes running out of time budget from plain
    graph disconnection.
    """

    def __init__(self, msg: str, horizon_exhausted: bool = False):
        super().__init__(msg)
        self.horizon_exhausted = horizon_exhausted


@dataclass(frozen=True)
class PlannerConfig:
    dt: float
    horizon: float
    v_max: float
    robot_radius: float

    def __post_init__(self):
        if self.dt <= 0 or self.v_max <= 0:
            raise ValueError("dt and v_max must be positive")


# DynamicObstacles: list of (radius, Trajectory)
DynamicObstacles = list


def edge_steps(edge_length: float, cfg: PlannerConfig) -> int:
    """Number of dt ticks an edge traversal occupies (>= 1; a zero-length
    wait edge takes exactly one tick)."""
    if edge_length <= 0.0:
        return 1
    return max(1, math.ceil(edge_length / (cfg.dt * cfg.v_max) - EPS_GEOM))


def edge_arrival_time(depart: float, edge_length: float,
                      cfg: PlannerConfig) -> float:
    """Arrival time after traversing an edge, ceiling-rounded to the tick
    lattice."""
    return depart + edge_steps(edge_length, cfg) * cfg.dt


def edge_is_free(p_from: Point, t_from: float, p_to: Point, steps: int,
                 obstacles: DynamicObstacles, cfg: PlannerConfig) -> bool:
    """True iff traversing the edge uniformly over `steps` ticks keeps the
    robot's disc clear of every obstacle on every tick-substep.

    Exactly-touching counts as in collision.
    """
    if not obstacles:
        return True
    dt = cfg.dt
    for m in range(steps):
        ua = m / steps
        ub = (m + 1) / steps
        qa = (p_from[0] + ua * (p_to[0] - p_from[0]),
              p_from[1] + ua * (p_to[1] - p_from[1]))
        qb = (p_from[0] + ub * (p_to[0] - p_from[0]),
              p_from[1] + ub * (p_to[1] - p_from[1]))
        ta = t_from + m * dt
        tb = ta + dt
        for radius, traj in obstacles:
            sep = min_separation_linear_vs_trajectory(qa, qb, ta, tb, traj)
            if sep < cfg.robot_radius + radius + EPS_GEOM:
                return False
    return True


def stay_is_free(p: Point, t_from: float, obstacles: DynamicObstacles,
                 cfg: PlannerConfig) -> bool:
    """True iff parking at p from t_from forever stays clear of every
    obstacle (finite check: obstacles are goal-terminal)."""
    for radius, traj in obstacles:
        sep = point_vs_trajectory_min_separation(p, t_from, traj)
        if sep < cfg.robot_radius + radius + EPS_GEOM:
            return False
    return True


def step_r_bound(rm: Roadmap, n_endpoints: int, cfg: PlannerConfig) -> float:
    """Worst endpoint-to-endpoint relocation duration on the tick lattice:
    max over endpoint pairs of the minimum total rounded-step duration along
    endpoint-avoiding paths. The continuous-time bound is too tight for the
    discretized planner; this one absorbs the ceiling rounding."""
    worst = 0
    for a in range(n_endpoints):
        for b in range(a + 1, n_endpoints):
            allowed = {a, b}
            src = rm.endpoint_vertices[a]
            dst = rm.endpoint_vertices[b]
            steps = [math.inf] * len(rm.vertices)
            steps[src] = 0
            heap = [(0, src)]
            while heap:
                sv, v = heapq.heappop(heap)
                if sv > steps[v]:
                    continue
                if v == dst:
                    break
                for w, eidx in rm.neighbors(v):
                    if not rm.blocking[eidx] <= allowed:
                        continue
                    ns = sv + edge_steps(rm.lengths[eidx], cfg)
                    if ns < steps[w]:
                        steps[w] = ns
                        heapq.heappush(heap, (ns, w))
            if math.isinf(steps[dst]):
                raise ValueError(f"endpoint pair ({a},{b}) unreachable")
            worst = max(worst, steps[dst])
    return worst * cfg.dt


def goal_distances(rm: Roadmap, goal_vertex: int):
    """Unrestricted Dijkstra distances to the goal vertex (heuristic)."""
    n = len(rm.vertices)
    d = [math.inf] * n
    d[goal_vertex] = 0.0
    heap = [(0.0, goal_vertex)]
    while heap:
        dv, v = heapq.heappop(heap)
        if dv > d[v] + EPS_GEOM:
            continue
        for w, eidx in rm.neighbors(v):
            nd = dv + rm.lengths[eidx]
            if nd < d[w] - EPS_GEOM:
                d[w] = nd
                heapq.heappush(heap, (nd, w))
    return d


def best_traj(s: Point, t_s: float, g: Point, obstacles: DynamicObstacles,
              rm: Roadmap, cfg: PlannerConfig,
              stats: dict = None) -> Trajectory:
    """Minimal-arrival-time, goal-terminal, collision-free trajectory from
    s (departing at t_s) to g against the committed obstacle trajectories.

    Raises NoPath when no goal node exists within cfg.horizon; goal
    acceptance requires that parking at g forever is also collision-free.
    """
    sv = rm.vertex_at(s)
    gv = rm.vertex_at(g)
    dt = cfg.dt
    h = goal_distances(rm, gv)
    if math.isinf(h[sv]):
        raise NoPath(f"goal vertex unreachable from start on the roadmap")
    max_steps = int(math.floor((cfg.horizon - t_s) / dt + EPS_GEOM))
    horizon_hit = False

    # node key: (vertex, step); heap entry ordered by
    # (f, arrival_step, waits, vertex)
    start_key = (sv, 0)
    best_seen = {start_key: (0, 0)}  # key -> (step, waits)
    heap = [(h[sv] / cfg.v_max, 0, 0, sv)]
    parents = {start_key: None}
    closed = set()
    expanded = 0

    while heap:
        f, step, waits, v = heapq.heappop(heap)
        key = (v, step)
        if key in closed:
            continue
        closed.add(key)
        expanded += 1
        t = t_s + step * dt
        p = rm.vertices[v]
        if v == gv and stay_is_free(p, t, obstacles, cfg):
            if stats is not None:
                stats["expanded"] = expanded
            return _reconstruct(parents, key, rm, t_s, dt)
        # wait edge
        succs = [(v, 1, waits + 1, p)]
        for w, eidx in rm.neighbors(v):
            succs.append((w, edge_steps(rm.lengths[eidx], cfg), waits,
                          rm.vertices[w]))
        for w, k, nwaits, q in succs:
            nstep = step + k
            if nstep > max_steps:
                horizon_hit = True
                continue
            nkey = (w, nstep)
            if nkey in closed:
                continue
            prev = best_seen.get(nkey)
            if prev is not None and prev <= (nstep, nwaits):
                continue
            if not edge_is_free(p, t, q, k, obstacles, cfg):
                continue
            best_seen[nkey] = (nstep, nwaits)
            parents[nkey] = key
            nf = nstep * dt + h[w] / cfg.v_max
            heapq.heappush(heap, (nf, nstep, nwaits, w))
    if stats is not None:
        stats["expanded"] = expanded
    raise NoPath("no collision-free goal-terminal trajectory within horizon",
                 horizon_exhausted=horizon_hit)


def _reconstruct(parents, key, rm: Roadmap, t_s: float, dt: float):
    chain = []
    while key is not None:
        chain.append(key)
        key = parents[key]
    chain.reverse()
    waypoints = [(rm.vertices[v], t_s + step * dt) for v, step in chain]
    return Trajectory(waypoints)


def brute_force_best_arrival(s: Point, t_s: float, g: Point,
                             obstacles: DynamicObstacles, rm: Roadmap,
                             cfg: PlannerConfig):
    """Independent oracle: build the explicit time-expanded graph up to the
    horizon and run uniform least-arrival search (no heuristic). Returns the
    minimal arrival time or None."""
    sv = rm.vertex_at(s)
    gv = rm.vertex_at(g)
    dt = cfg.dt
    max_steps = int(math.floor((cfg.horizon - t_s) / dt + EPS_GEOM))
    # frontier by step count (uniform-cost over integer arrival steps)
    reach = {(sv, 0)}
    frontier = {0: {sv}}
    for step in range(max_steps + 1):
        here = frontier.get(step, set())
        for v in sorted(here):
            t = t_s + step * dt
            p = rm.vertices[v]
            if v == gv and stay_is_free(p, t, obstacles, cfg):
                return t
            moves = [(v, 1, p)]
            for w, eidx in rm.neighbors(v):
                moves.append((w, edge_steps(rm.lengths[eidx], cfg),
                              rm.vertices[w]))
            for w, k, q in moves:
                nstep = step + k
                if nstep > max_steps or (w, nstep) in reach:
                    continue
                if edge_is_free(p, t, q, k, obstacles, cfg):
                    reach.add((w, nstep))
                    frontier.setdefault(nstep, set()).add(w)
    return None
