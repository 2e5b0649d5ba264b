"""Reactive baseline: roadmap-guided desired velocities plus reciprocal
half-plane collision avoidance.

Each tick a robot aims along the roadmap shortest path toward its goal at
full speed, then picks the feasible velocity closest to that desired
velocity under one reciprocal half-plane constraint per sensed neighbor
(responsibility share 0.5). Locally safe, globally deadlock-prone by
design; no global progress guarantee is intended.
"""

import math
from dataclasses import dataclass, field

from .geometry import Point, dist, segment_clearance
from .roadmap import Roadmap


class Unreachable(Exception):
    """Goal has no roadmap path from the robot's surroundings."""


ARRIVAL_TOL = 0.05
DEFAULT_TAU = 2.0
DEFAULT_SENSING = 10.0
DEFAULT_TICK = 0.1
_LP_EPS = 1e-10


@dataclass
class ReactiveAgentState:
    id: int
    position: Point
    velocity: tuple
    goal: int
    radius: float
    v_max: float


@dataclass(frozen=True)
class HalfPlaneConstraint:
    point: tuple      # a point on the boundary line, in velocity space
    direction: tuple  # unit vector along the line; feasible side is left


def _det(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1]


def _norm(a):
    return math.hypot(a[0], a[1])


def desired_velocity(state: ReactiveAgentState, rm: Roadmap,
                     dist_to_goal, goal_point: Point, workspace) -> tuple:
    """Unit direction toward the shortest-path lookahead vertex, scaled to
    v_max; zero within arrival tolerance of the goal."""
    p = state.position
    if dist(p, goal_point) <= ARRIVAL_TOL:
        return (0.0, 0.0)
    candidates = []
    for v, q in enumerate(rm.vertices):
        d = dist(p, q)
        if d > 2.2 * rm.cell or math.isinf(dist_to_goal[v]):
            continue
        candidates.append((d + dist_to_goal[v], v, d, q))
    # cheapest visible candidate; checking in cost order lets the usual
    # case stop after one line-of-sight test
    candidates.sort()
    best = None
    for _, v, d, q in candidates:
        if d <= 1e-9 or segment_clearance(p, q, workspace) >= state.radius:
            best = v
            break
    if best is None:
        raise Unreachable(f"no roadmap route from {p} to goal {state.goal}")
    target = rm.vertices[best]
    if dist(p, target) <= 1e-9:
        # sitting on a vertex: head for the best next vertex
        nxt = None
        nxt_cost = math.inf
        for w, eidx in rm.neighbors(best):
            c = rm.lengths[eidx] + dist_to_goal[w]
            if c < nxt_cost - 1e-12:
                nxt_cost = c
                nxt = w
        if nxt is None:
            raise Unreachable(f"vertex {best} has no outgoing route")
        target = rm.vertices[nxt]
    dx = target[0] - p[0]
    dy = target[1] - p[1]
    n = math.hypot(dx, dy)
    return (dx / n * state.v_max, dy / n * state.v_max)


def _avoidance_line(self_state: ReactiveAgentState,
                    other: ReactiveAgentState, tau: float,
                    dt: float) -> HalfPlaneConstraint:
    rel_pos = (other.position[0] - self_state.position[0],
               other.position[1] - self_state.position[1])
    rel_vel = (self_state.velocity[0] - other.velocity[0],
               self_state.velocity[1] - other.velocity[1])
    dist_sq = rel_pos[0] ** 2 + rel_pos[1] ** 2
    combined = self_state.radius + other.radius
    combined_sq = combined * combined
    if dist_sq > combined_sq:
        inv_tau = 1.0 / tau
        w = (rel_vel[0] - inv_tau * rel_pos[0],
             rel_vel[1] - inv_tau * rel_pos[1])
        w_len_sq = w[0] ** 2 + w[1] ** 2
        dot1 = _dot(w, rel_pos)
        if dot1 < 0.0 and dot1 * dot1 > combined_sq * w_len_sq:
            # project on the cut-off circle
            w_len = math.sqrt(w_len_sq)
            unit_w = (w[0] / w_len, w[1] / w_len)
            direction = (unit_w[1], -unit_w[0])
            u = ((combined * inv_tau - w_len) * unit_w[0],
                 (combined * inv_tau - w_len) * unit_w[1])
        else:
            # project on the nearer leg of the truncated cone
            leg = math.sqrt(dist_sq - combined_sq)
            if _det(rel_pos, w) > 0.0:
                direction = ((rel_pos[0] * leg - rel_pos[1] * combined)
                             / dist_sq,
                             (rel_pos[0] * combined + rel_pos[1] * leg)
                             / dist_sq)
            else:
                direction = (-(rel_pos[0] * leg + rel_pos[1] * combined)
                             / dist_sq,
                             -(-rel_pos[0] * combined + rel_pos[1] * leg)
                             / dist_sq)
            dot2 = _dot(rel_vel, direction)
            u = (dot2 * direction[0] - rel_vel[0],
                 dot2 * direction[1] - rel_vel[1])
    else:
        # already overlapping: push apart within one control tick
        inv_dt = 1.0 / dt
        w = (rel_vel[0] - inv_dt * rel_pos[0],
             rel_vel[1] - inv_dt * rel_pos[1])
        w_len = _norm(w)
        if w_len < 1e-12:
            unit_w = (1.0, 0.0)
        else:
            unit_w = (w[0] / w_len, w[1] / w_len)
        direction = (unit_w[1], -unit_w[0])
        u = ((combined * inv_dt - w_len) * unit_w[0],
             (combined * inv_dt - w_len) * unit_w[1])
    point = (self_state.velocity[0] + 0.5 * u[0],
             self_state.velocity[1] + 0.5 * u[1])
    return HalfPlaneConstraint(point=point, direction=direction)


def _lp1(lines, line_no, radius, opt_vel, direction_opt):
    """Optimize along line line_no inside the speed disc and the earlier
    half-planes; returns the point or None."""
    pt = lines[line_no].point
    dr = lines[line_no].direction
    dot_product = _dot(pt, dr)
    discriminant = dot_product * dot_product + radius * radius - _dot(pt, pt)
    if discriminant < 0.0:
        return None
    sqrt_disc = math.sqrt(discriminant)
    t_left = -dot_product - sqrt_disc
    t_right = -dot_product + sqrt_disc
    for i in range(line_no):
        denom = _det(dr, lines[i].direction)
        numer = _det(lines[i].direction,
                     (pt[0] - lines[i].point[0], pt[1] - lines[i].point[1]))
        if abs(denom) <= _LP_EPS:
            if numer < 0.0:
                return None
            continue
        t = numer / denom
        if denom >= 0.0:
            t_right = min(t_right, t)
        else:
            t_left = max(t_left, t)
        if t_left > t_right:
            return None
    if direction_opt:
        t = t_right if _dot(opt_vel, dr) > 0.0 else t_left
    else:
        t = _dot(dr, (opt_vel[0] - pt[0], opt_vel[1] - pt[1]))
        t = max(t_left, min(t_right, t))
    return (pt[0] + t * dr[0], pt[1] + t * dr[1])


def _lp2(lines, radius, opt_vel, direction_opt):
    """Closest feasible point to opt_vel in the speed disc; returns
    (fail index or len(lines), result)."""
    if direction_opt:
        result = (opt_vel[0] * radius, opt_vel[1] * radius)
    elif _dot(opt_vel, opt_vel) > radius * radius:
        n = _norm(opt_vel)
        result = (opt_vel[0] / n * radius, opt_vel[1] / n * radius)
    else:
        result = opt_vel
    for i, line in enumerate(lines):
        if _det(line.direction, (line.point[0] - result[0],
                                 line.point[1] - result[1])) > 0.0:
            new = _lp1(lines, i, radius, opt_vel, direction_opt)
            if new is None:
                return i, result
            result = new
    return len(lines), result


def _lp3(lines, begin_line, radius, result):
    """Least-penetration fallback when the half-planes are jointly
    infeasible."""
    distance = 0.0
    for i in range(begin_line, len(lines)):
        if _det(lines[i].direction,
                (lines[i].point[0] - result[0],
                 lines[i].point[1] - result[1])) > distance:
            proj = []
            for j in range(i):
                denom = _det(lines[i].direction, lines[j].direction)
                if abs(denom) <= _LP_EPS:
                    if _dot(lines[i].direction, lines[j].direction) > 0.0:
                        continue
                    point = (0.5 * (lines[i].point[0] + lines[j].point[0]),
                             0.5 * (lines[i].point[1] + lines[j].point[1]))
                else:
                    t = _det(lines[j].direction,
                             (lines[i].point[0] - lines[j].point[0],
                              lines[i].point[1] - lines[j].point[1])) / denom
                    point = (lines[i].point[0] + t * lines[i].direction[0],
                             lines[i].point[1] + t * lines[i].direction[1])
                d = (lines[j].direction[0] - lines[i].direction[0],
                     lines[j].direction[1] - lines[i].direction[1])
                n = _norm(d)
                if n < 1e-12:
                    continue
                proj.append(HalfPlaneConstraint(point=point,
                                                direction=(d[0] / n,
                                                           d[1] / n)))
            opt = (-lines[i].direction[1], lines[i].direction[0])
            fail, new = _lp2(proj, radius, opt, True)
            if fail >= len(proj):
                result = new
            distance = _det(lines[i].direction,
                            (lines[i].point[0] - result[0],
                             lines[i].point[1] - result[1]))
    return result


def orca_step(self_state: ReactiveAgentState, neighbors, v_pref: tuple,
              tau: float = DEFAULT_TAU, dt: float = DEFAULT_TICK,
              sensing: float = DEFAULT_SENSING) -> tuple:
    """One reciprocal-avoidance step: feasible velocity closest to v_pref.

    Symmetric head-on ties are broken by rotating every preferred velocity
    1e-6 rad counterclockwise (a shared traffic-rule convention, so
    opposing robots dodge to opposite world sides); deterministic.
    """
    lines = []
    for other in sorted(neighbors, key=lambda a: a.id):
        if other.id == self_state.id:
            continue
        if dist(self_state.position, other.position) > sensing:
            continue
        lines.append(_avoidance_line(self_state, other, tau, dt))
    if not lines:
        return v_pref
    bias = 1e-6
    v_opt = (v_pref[0] - bias * v_pref[1], v_pref[1] + bias * v_pref[0])
    fail, result = _lp2(lines, self_state.v_max, v_opt, False)
    if fail < len(lines):
        result = _lp3(lines, fail, self_state.v_max, result)
    return result
