"""Acceptance gate: one test per headline guarantee, each printing a
single PASS line on success. Run with -s to see the lines."""

import heapq
import math
import random

import pytest
from starlette.testclient import TestClient

from fleetplan import SCENARIO_NAMES, scenario_path
from fleetplan.geometry import rect_region
from fleetplan.live_service import create_app
from fleetplan.planner import (NoPath, PlannerConfig, best_traj,
                               brute_force_best_arrival, edge_steps)
from fleetplan.roadmap import (Infrastructure, build_grid_roadmap,
                               check_valid_roadmap, EndpointDisconnected)
from fleetplan.sim import load_scenario, run
from fleetplan.trajectory import Trajectory
from fleetplan.bench_cli import scaling_table

from .oracles import random_instance, validity_oracle

ROBOT_COUNTS = (1, 2, 4, 8)
SEEDS = (11, 22, 33)


@pytest.fixture(scope="module")
def completeness_runs(shipped_roadmaps):
    """The shared >= 30 seeded runs behind the completeness, no-collision
    and token-invariant criteria."""
    results = []
    for name in SCENARIO_NAMES:
        sc0, rm = shipped_roadmaps[name]
        for n in ROBOT_COUNTS:
            for seed in SEEDS:
                sc = load_scenario(scenario_path(name), n_robots=n,
                                   seed=seed)
                results.append(((name, n, seed), run(sc, rm=rm)))
    assert len(results) >= 30
    return results


def test_completeness_all_tasks_succeed(completeness_runs):
    for key, res in completeness_runs:
        assert res.valid_infrastructure, key
        assert res.success_rate == 1.0, key
        outcomes = {r.outcome for r in res.records}
        assert outcomes == {"Success"}, (key, outcomes)
        n = key[1]
        assert len(res.records) == 4 * n, key
    print(f"\nPASS completeness: {len(completeness_runs)} runs, "
          "success rate 100%, no PlanningFailure, no Timeout")


def test_no_collision_margin(completeness_runs):
    worst = math.inf
    for key, res in completeness_runs:
        worst = min(worst, res.min_pairwise_separation)
        assert res.min_pairwise_separation >= -1e-6, key
    print(f"\nPASS no-collision: worst per/inter-tick margin {worst:.6f} m "
          ">= -1e-6")


def test_token_invariant_monitors(completeness_runs):
    total = 0
    for key, res in completeness_runs:
        assert res.monitor_verdicts, key
        for t, where, verdicts in res.monitor_verdicts:
            assert all(verdicts.values()), (key, t, where, verdicts)
            total += len(verdicts)
    print(f"\nPASS token invariants: {total} monitor verdicts, all true")


def test_planner_optimality_oracle():
    ws = rect_region(0, 0, 7.8, 7.8)
    endpoints = [(1.3, 1.3), (6.5, 6.5)]
    rm = build_grid_roadmap(ws, 1.3, 0.5, endpoints)
    rng = random.Random(99)
    cfg0 = PlannerConfig(dt=0.65, horizon=1.0, v_max=1.0, robot_radius=0.5)

    def random_obstacle(t0):
        v = rng.randrange(len(rm.vertices))
        pts = [(rm.vertices[v], t0)]
        t = t0
        for _ in range(rng.randint(1, 4)):
            nbrs = rm.neighbors(v)
            w, eidx = rng.choice(nbrs)
            t += edge_steps(rm.lengths[eidx], cfg0) * 0.65
            pts.append((rm.vertices[w], t))
            v = w
        return Trajectory(pts)

    checked = 0
    while checked < 100:
        s = rm.vertices[rng.randrange(len(rm.vertices))]
        g = rm.vertices[rng.randrange(len(rm.vertices))]
        t_s = rng.uniform(0, 2)
        obstacles = [(0.5, random_obstacle(rng.uniform(0, 3)))
                     for _ in range(rng.randint(0, 2))]
        cfg = PlannerConfig(dt=0.65, horizon=t_s + 20.0, v_max=1.0,
                            robot_radius=0.5)
        oracle = brute_force_best_arrival(s, t_s, g, obstacles, rm, cfg)
        try:
            got = best_traj(s, t_s, g, obstacles, rm, cfg).terminal_time
        except NoPath:
            got = None
        assert got == oracle, (checked, got, oracle)
        checked += 1
    print("\nPASS planner optimality: 100 randomized instances match the "
          "explicit time-expanded search exactly")


def test_discretization_constants(shipped_roadmaps):
    cfg = PlannerConfig(dt=0.65, horizon=1.0, v_max=1.0, robot_radius=0.5)
    assert edge_steps(1.3, cfg) == 2
    assert edge_steps(1.3 * math.sqrt(2), cfg) == 3
    sc, rm = shipped_roadmaps["hall"]
    lengths = {round(l, 6) for l in rm.lengths}
    assert round(1.3, 6) in lengths
    assert round(1.3 * math.sqrt(2), 6) in lengths
    print("\nPASS discretization: cell 1.3 m / dt 0.65 s / v_max 1 m/s "
          "gives 2-step straight and 3-step diagonal edges")


def test_validity_checker_oracle():
    checked = 0
    seed = 0
    while checked < 50:
        seed += 1
        ws, endpoints, rbar = random_instance(seed)
        if len(endpoints) < 2:
            continue
        try:
            rm = build_grid_roadmap(ws, 1.3, rbar, endpoints)
        except EndpointDisconnected:
            continue
        report = check_valid_roadmap(rm, Infrastructure(ws, endpoints), rbar)
        assert report.failing_pairs == tuple(
            validity_oracle(rm, endpoints, rbar)), seed
        checked += 1
    # constructed analogues: passable and impassable mid-corridor endpoint
    for half_width, expect_valid in ((2.0, True), (0.8, False)):
        ws = rect_region(0, 0, 16, 6,
                         holes=[(6, 0.1, 10, 3 - half_width),
                                (6, 3 + half_width, 10, 5.9)])
        endpoints = ((2, 3), (14, 3), (8, 3))
        rm = build_grid_roadmap(ws, 1.3, 0.5, endpoints)
        report = check_valid_roadmap(rm, Infrastructure(ws, endpoints), 0.5)
        assert report.valid is expect_valid
        assert report.failing_pairs == tuple(
            validity_oracle(rm, endpoints, 0.5))
    print("\nPASS validity oracle: 50 random + 2 constructed instances "
          "match per-pair filtered BFS")


def _rounded_shortest_time(rm, s, g, dt=0.65, v_max=1.0):
    """Independent oracle: Dijkstra over integer tick weights."""
    src = rm.endpoint_vertices[s]
    dst = rm.endpoint_vertices[g]
    best = {src: 0}
    heap = [(0, src)]
    while heap:
        steps, v = heapq.heappop(heap)
        if steps > best.get(v, math.inf):
            continue
        if v == dst:
            return steps * dt
        for w, eidx in rm.neighbors(v):
            k = steps + max(1, math.ceil(rm.lengths[eidx] / (dt * v_max)
                                         - 1e-9))
            if k < best.get(w, math.inf):
                best[w] = k
                heapq.heappush(heap, (k, w))
    raise AssertionError("oracle: goal unreachable")


def test_prolongation_accounting(shipped_roadmaps):
    worst_overhead = 0.0
    for name in SCENARIO_NAMES:
        sc0, rm = shipped_roadmaps[name]
        for seed in SEEDS:
            res = run(load_scenario(scenario_path(name), n_robots=1,
                                    seed=seed), rm=rm)
            for rec in res.records:
                assert rec.prolongation >= 3.0 - 1e-9, (name, seed, rec)
                overhead = _rounded_shortest_time(rm, rec.s, rec.g) \
                    - rec.t_prime
                assert abs((rec.prolongation - 3.0) - overhead) <= 1e-6, \
                    (name, seed, rec, overhead)
                worst_overhead = max(worst_overhead,
                                     rec.prolongation - 3.0)
    print("\nPASS prolongation accounting: single-robot p >= 3 s and "
          f"p - 3 is pure rounding overhead (max {worst_overhead:.3f} s)")


def test_baseline_contrast_in_narrow_corridors(shipped_roadmaps):
    sc0, rm = shipped_roadmaps["office"]
    n = max(ROBOT_COUNTS)
    orca_done = 0
    orca_total = 0
    for seed in range(20):
        res = run(load_scenario(scenario_path("office"), n_robots=n,
                                seed=seed, algorithm="ORCA"), rm=rm)
        orca_done += sum(1 for r in res.records if r.outcome == "Success")
        orca_total += n * 4
        cobra = run(load_scenario(scenario_path("office"), n_robots=n,
                                  seed=seed), rm=rm)
        assert cobra.success_rate == 1.0, seed
    orca_rate = orca_done / orca_total
    assert orca_rate < 1.0
    print(f"\nPASS baseline contrast: office n={n}, 20 seeds: reactive "
          f"baseline {orca_rate:.1%} vs coordinated 100%")


def test_planning_time_scaling():
    rows, slope = scaling_table(scenario_path("hall"), [2, 4, 8, 16],
                                reps=2, seed=0)
    assert slope <= 2.3, (slope, rows)
    print(f"\nPASS scaling: log-log slope of mean planning time vs n is "
          f"{slope:.2f} <= 2.3")


def test_run_determinism(shipped_roadmaps):
    for name, algo, n in (("hall", "COBRA", 4), ("hall", "ORCA", 2),
                          ("office", "COBRA", 4)):
        sc0, rm = shipped_roadmaps[name]
        a = run(load_scenario(scenario_path(name), n_robots=n, seed=17,
                              algorithm=algo), rm=rm)
        b = run(load_scenario(scenario_path(name), n_robots=n, seed=17,
                              algorithm=algo), rm=rm)
        assert a.to_csv() == b.to_csv(), (name, algo)
    print("\nPASS determinism: repeated (scenario, seed) runs are "
          "byte-identical")


def test_dispatch_round_trip_live():
    app = create_app(scenario_path("hall"), speed=2000.0)
    with TestClient(app) as client:
        session = app.state.session
        with client.websocket_connect("/ws") as ws:
            hello = ws.receive_json()
            assert hello["type"] == "HELLO"
            # scripted click sequence: select robot 0, click a free endpoint
            goal = len(session.sc.infra.endpoints) - 1
            ws.send_json({"v": 1, "type": "DISPATCH", "id": "click-1",
                          "robot": 0, "goal": goal})
            msg = ws.receive_json()
            while msg["type"] not in ("ACK", "REJECT"):
                msg = ws.receive_json()
            assert msg["type"] == "ACK" and msg["id"] == "click-1"
            # trajectory visible within one snapshot of the ACK
            while True:
                msg = ws.receive_json()
                if msg["type"] == "SNAPSHOT":
                    break
            r0 = msg["robots"][0]
            assert r0["state"] == "Executing" and \
                r0["trajectory"]["waypoints"]
            # conflicting click: another robot's standing endpoint
            rev = session.server.token.revision
            ws.send_json({"v": 1, "type": "DISPATCH", "id": "click-2",
                          "robot": 1, "goal": session.agents[2].endpoint})
            while True:
                msg = ws.receive_json()
                if msg["type"] in ("ACK", "REJECT"):
                    break
            assert msg["type"] == "REJECT"
            assert msg["reason"] == "DestinationConflict"
            assert session.server.token.revision == rev
            # the accepted task eventually succeeds
            for _ in range(6000):
                msg = ws.receive_json()
                if msg["type"] == "SNAPSHOT" and \
                        msg["robots"][0]["state"] == "Idle":
                    break
            assert (0, goal, "Success") in session.task_outcomes
    print("\nPASS dispatch round-trip: ACK, visible trajectory, eventual "
          "success; conflicting dispatch rejected before the token")
