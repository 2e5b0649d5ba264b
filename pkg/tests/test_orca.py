import math
import random

import pytest

from fleetplan.geometry import dist, rect_region
from fleetplan.orca import (ARRIVAL_TOL, ReactiveAgentState, _avoidance_line,
                            desired_velocity, orca_step)
from fleetplan.planner import goal_distances
from fleetplan.roadmap import build_grid_roadmap


def _agent(i, pos, vel=(0.0, 0.0), goal=0):
    return ReactiveAgentState(id=i, position=pos, velocity=vel, goal=goal,
                              radius=0.5, v_max=1.0)


def test_no_neighbors_passthrough():
    a = _agent(0, (0, 0))
    assert orca_step(a, [], (0.7, -0.2)) == (0.7, -0.2)
    # out of sensing range counts as no neighbor
    far = _agent(1, (100, 0))
    assert orca_step(a, [far], (0.7, -0.2)) == (0.7, -0.2)


def test_speed_cap_under_random_pressure():
    rng = random.Random(5)
    for _ in range(200):
        a = _agent(0, (0, 0), (rng.uniform(-1, 1), rng.uniform(-1, 1)))
        others = [_agent(i + 1,
                         (rng.uniform(-3, 3), rng.uniform(-3, 3)),
                         (rng.uniform(-1, 1), rng.uniform(-1, 1)))
                  for i in range(rng.randint(1, 4))]
        others = [o for o in others if dist(o.position, a.position) > 1e-6]
        pref = (rng.uniform(-1, 1), rng.uniform(-1, 1))
        v = orca_step(a, others, pref)
        assert math.hypot(*v) <= 1.0 + 1e-6


def test_result_satisfies_constraints_when_feasible():
    # two well-separated neighbors: the LP must satisfy every half-plane
    a = _agent(0, (0, 0), (1, 0))
    others = [_agent(1, (4, 0), (-1, 0)), _agent(2, (0, 4), (0, -1))]
    lines = [_avoidance_line(a, o, 2.0, 0.1) for o in others]
    v = orca_step(a, others, (1.0, 0.0))
    for line in lines:
        det = (line.direction[0] * (line.point[1] - v[1])
               - line.direction[1] * (line.point[0] - v[0]))
        assert det <= 1e-9


def test_point_symmetry():
    # configurations that map onto each other under rotation by pi produce
    # velocities that are exact negatives (the shared rotation bias
    # commutes with the symmetry)
    a = _agent(0, (0, 0), (0.9, 0.0))
    b = _agent(2, (4, 0), (-0.9, 0.0))
    va = orca_step(a, [b], (1.0, 0.0))
    vb = orca_step(b, [_agent(0, (0, 0), (0.9, 0.0))], (-1.0, 0.0))
    assert va[0] == pytest.approx(-vb[0], abs=1e-9)
    assert va[1] == pytest.approx(-vb[1], abs=1e-9)


def test_head_on_robots_pass_in_open_space():
    a = _agent(0, (0, 0), (1, 0))
    b = _agent(1, (6, 0), (-1, 0))
    dt = 0.1
    min_sep = math.inf
    for _ in range(120):
        va = orca_step(a, [b], (1.0, 0.0), dt=dt)
        vb = orca_step(b, [a], (-1.0, 0.0), dt=dt)
        a.velocity, b.velocity = va, vb
        a.position = (a.position[0] + va[0] * dt, a.position[1] + va[1] * dt)
        b.position = (b.position[0] + vb[0] * dt, b.position[1] + vb[1] * dt)
        min_sep = min(min_sep, dist(a.position, b.position))
    assert a.position[0] > 4.5
    assert b.position[0] < 1.5
    assert min_sep >= 1.0 - 0.05  # reciprocal avoidance keeps them apart


@pytest.fixture(scope="module")
def guidance():
    ws = rect_region(0, 0, 9.1, 6.5)
    endpoints = ((1.3, 1.3), (7.8, 5.2))
    rm = build_grid_roadmap(ws, 1.3, 0.5, endpoints)
    table = goal_distances(rm, rm.endpoint_vertices[1])
    return ws, endpoints, rm, table


def test_desired_velocity_heads_toward_goal(guidance):
    ws, endpoints, rm, table = guidance
    st = _agent(0, endpoints[0], goal=1)
    v = desired_velocity(st, rm, table, endpoints[1], ws)
    assert math.hypot(*v) == pytest.approx(1.0)
    # progress direction: positive dot with the goal direction
    gd = (endpoints[1][0] - st.position[0], endpoints[1][1] - st.position[1])
    assert v[0] * gd[0] + v[1] * gd[1] > 0


def test_desired_velocity_zero_at_goal(guidance):
    ws, endpoints, rm, table = guidance
    st = _agent(0, (endpoints[1][0] + ARRIVAL_TOL / 2, endpoints[1][1]),
                goal=1)
    assert desired_velocity(st, rm, table, endpoints[1], ws) == (0.0, 0.0)
