"""Discrete-time kinematic world: task workload generation, trajectory or
reactive execution, collision and timeout monitoring, per-task metrics.

Coordinated robots are moved by evaluating their committed trajectories
analytically (perfect execution); reactive robots integrate explicit Euler
steps. A single seeded generator owns all randomness, and all per-tick
iteration is in robot-id order, so identical (scenario, seed) runs are
byte-identical.
"""

import csv
import heapq
import io
import json
import math
import time
from dataclasses import dataclass, field

from . import orca as orca_mod
from .geometry import (EPS_GEOM, dist, moving_discs_min_separation,
                       point_clearance)
from .planner import PlannerConfig, goal_distances, step_r_bound
from .protocol import (AgentState, PlanningFailed, RobotAgent, TokenServer,
                       handle_task, register)
from .roadmap import (Infrastructure, Roadmap, build_grid_roadmap,
                      check_valid_roadmap, compute_r_bound, load_map,
                      static_shortest_path)

import random


class ScenarioInvalid(Exception):
    pass


_STALL_DIST = 0.25
_STALL_WINDOW = 30.0


@dataclass
class Scenario:
    infra: Infrastructure
    cell: float
    robot_radius: float
    v_max: float
    dt: float                  # space-time planner tick
    t_planning: float
    n_robots: int
    tasks_per_robot: int = 4
    initial_delay_range: tuple = (0.0, 30.0)
    seed: int = 0
    algorithm: str = "COBRA"
    sim_dt: float = 0.05
    timeout: float = 600.0
    orca_tau: float = orca_mod.DEFAULT_TAU
    orca_sensing: float = orca_mod.DEFAULT_SENSING
    orca_dt: float = orca_mod.DEFAULT_TICK
    name: str = ""

    def __post_init__(self):
        if self.n_robots < 1 or self.tasks_per_robot < 1:
            raise ScenarioInvalid("need >= 1 robot and >= 1 task per robot")
        if self.n_robots > len(self.infra.endpoints):
            raise ScenarioInvalid("more robots than endpoints")
        if self.algorithm not in ("COBRA", "ORCA"):
            raise ScenarioInvalid(f"unknown algorithm {self.algorithm}")


@dataclass
class TaskRecord:
    robot: int
    s: int
    g: int
    issue_time: float
    start_time: float
    arrival_time: float
    t_prime: float
    prolongation: float
    outcome: str  # Success | Timeout | PlanningFailure


@dataclass
class RunResult:
    scenario_name: str
    algorithm: str
    seed: int
    records: list
    success_rate: float
    min_pairwise_separation: float
    planning_wall_times: list
    valid_infrastructure: bool
    r_bound: float = 0.0
    monitor_verdicts: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["robot", "s", "g", "issue", "start", "arrival",
                    "t_prime", "p", "outcome"])
        for r in sorted(self.records, key=lambda r: (r.issue_time, r.robot)):
            w.writerow([r.robot, r.s, r.g, repr(r.issue_time),
                        repr(r.start_time), repr(r.arrival_time),
                        repr(r.t_prime), repr(r.prolongation), r.outcome])
        return buf.getvalue()

    def summary(self) -> dict:
        pts = self.planning_wall_times
        return {
            "scenario": self.scenario_name,
            "algorithm": self.algorithm,
            "seed": self.seed,
            "tasks": len(self.records),
            "success_rate": self.success_rate,
            "min_pairwise_separation": self.min_pairwise_separation,
            "valid_infrastructure": self.valid_infrastructure,
            "r_bound": self.r_bound,
            "mean_planning_wall_time": (sum(pts) / len(pts)) if pts else 0.0,
        }


def load_scenario(obj, **overrides) -> Scenario:
    """Scenario JSON = map schema + run fields (robots, seed, algorithm,
    ...). Keyword overrides win over file values."""
    infra, doc = load_map(obj)
    orca_doc = doc.get("orca", {})
    kw = {
        "infra": infra,
        "cell": doc.get("cell", 1.3),
        "robot_radius": doc.get("robot_radius", 0.5),
        "v_max": doc.get("v_max", 1.0),
        "dt": doc.get("dt", 0.65),
        "t_planning": doc.get("t_planning", 3.0),
        "n_robots": doc.get("robots", 1),
        "tasks_per_robot": doc.get("tasks_per_robot", 4),
        "initial_delay_range": tuple(doc.get("initial_delay_range", (0.0, 30.0))),
        "seed": doc.get("seed", 0),
        "algorithm": doc.get("algorithm", "COBRA"),
        "sim_dt": doc.get("sim_dt", 0.05),
        "timeout": doc.get("timeout", 600.0),
        "orca_tau": orca_doc.get("tau", orca_mod.DEFAULT_TAU),
        "orca_sensing": orca_doc.get("sensing", orca_mod.DEFAULT_SENSING),
        "orca_dt": orca_doc.get("dt", orca_mod.DEFAULT_TICK),
        "name": doc.get("name", ""),
    }
    kw.update(overrides)
    return Scenario(**kw)


def build_scenario_roadmap(sc: Scenario) -> Roadmap:
    return build_grid_roadmap(sc.infra.workspace, sc.cell, sc.robot_radius,
                              sc.infra.endpoints)


def collision_monitor_tick(positions) -> float:
    """Minimum pairwise separation margin |pi-pj| - ri - rj at one instant;
    +inf with fewer than two robots."""
    best = math.inf
    n = len(positions)
    for i in range(n):
        pi, ri = positions[i]
        for j in range(i + 1, n):
            pj, rj = positions[j]
            m = dist(pi, pj) - ri - rj
            if m < best:
                best = m
    return best


def _intertick_margin(prev, cur) -> float:
    """Margin accounting for straight-line motion between ticks (catches
    tunneling that endpoint-of-tick positions would miss)."""
    best = math.inf
    n = len(cur)
    for i in range(n):
        for j in range(i + 1, n):
            sep = moving_discs_min_separation(prev[i][0], cur[i][0],
                                              prev[j][0], cur[j][0])
            m = sep - cur[i][1] - cur[j][1]
            if m < best:
                best = m
    return best


def _shortest_time(rm: Roadmap, s: int, g: int, v_max: float) -> float:
    res = static_shortest_path(rm, rm.endpoint_vertices[s],
                               rm.endpoint_vertices[g])
    if res is None:
        raise ScenarioInvalid(f"endpoints {s}, {g} disconnected on roadmap")
    return res[1] / v_max


class _TaskGenerator:
    """Owns the single seeded random source; deals destinations that are
    not any robot's active destination, not any robot's current standing
    endpoint, and not the chooser's own position."""

    def __init__(self, seed: int, n_endpoints: int):
        self.rng = random.Random(seed)
        self.n_endpoints = n_endpoints

    def initial_delay(self, lo: float, hi: float) -> float:
        return self.rng.uniform(lo, hi)

    def pick_destination(self, own_endpoint: int, occupied, destinations):
        candidates = [e for e in range(self.n_endpoints)
                      if e != own_endpoint and e not in occupied
                      and e not in destinations]
        if not candidates:
            return None
        return self.rng.choice(candidates)


def run(sc: Scenario, rm: Roadmap = None, trace_path=None,
        event_log_path=None) -> RunResult:
    """Execute one scenario to completion or timeout."""
    if rm is None:
        rm = build_scenario_roadmap(sc)
    report = check_valid_roadmap(rm, sc.infra, sc.robot_radius)
    if sc.algorithm == "COBRA":
        result = _run_cobra(sc, rm, report, trace_path, event_log_path)
    else:
        result = _run_orca(sc, rm, report, trace_path)
    return result


def _run_cobra(sc, rm, report, trace_path, event_log_path):
    infra = sc.infra
    radii = {i: sc.robot_radius for i in range(sc.n_robots)}
    cfg = PlannerConfig(dt=sc.dt, horizon=math.inf, v_max=sc.v_max,
                        robot_radius=sc.robot_radius)
    if report.valid:
        r_bound = compute_r_bound(rm, infra, sc.v_max)
        # the per-task bound each best-response plan is guaranteed to beat:
        # worst rounded-step relocation plus one tick of wait alignment
        r_step = step_r_bound(rm, len(infra.endpoints), cfg) + sc.dt
    else:
        # no guarantee on a non-valid infrastructure; keep a finite horizon
        # but leave the active-horizon monitor off
        r_bound = _fallback_r_bound(rm, infra, sc.v_max)
        r_step = r_bound + sc.dt
    server = TokenServer(infra, radii,
                         r_bound=r_step if report.valid else None,
                         bound_slack=sc.t_planning,
                         log_path=event_log_path)
    agents = [RobotAgent(id=i, radius=sc.robot_radius, v_max=sc.v_max)
              for i in range(sc.n_robots)]
    for a in agents:
        register(a, a.id, server, 0.0)
    gen = _TaskGenerator(sc.seed, len(infra.endpoints))
    tasks_left = {a.id: sc.tasks_per_robot for a in agents}

    # event heap: (time, kind priority, robot); arrivals before issues
    events = []
    for a in agents:
        d = gen.initial_delay(*sc.initial_delay_range)
        heapq.heappush(events, (d, 1, a.id, "issue"))

    records = []
    planning_times = []
    trace = open(trace_path, "w") if trace_path else None
    min_margin = math.inf
    prev_positions = None
    t = 0.0
    tick = 0

    def process_event(te, rid):
        agent = agents[rid]
        if agent.state is AgentState.FAILED:
            return
        occupied = {a.endpoint for a in agents
                    if a.state is AgentState.IDLE or
                    (a.state is AgentState.EXECUTING and
                     dist(a.position(te), infra.endpoints[a.endpoint])
                     <= EPS_GEOM)}
        destinations = {a.goal for a in agents
                        if a.state is AgentState.EXECUTING}
        g = gen.pick_destination(agent.endpoint, occupied, destinations)
        if g is None:
            heapq.heappush(events, (te + sc.sim_dt, 1, rid, "issue"))
            return
        s = agent.endpoint
        t_prime = _shortest_time(rm, s, g, sc.v_max)
        t0 = time.perf_counter()
        try:
            traj = handle_task(agent, g, server, rm, cfg, te, sc.t_planning,
                               sc.n_robots, r_step, other_agents=agents)
        except PlanningFailed:
            planning_times.append(time.perf_counter() - t0)
            records.append(TaskRecord(rid, s, g, te, te, math.nan, t_prime,
                                      math.nan, "PlanningFailure"))
            return
        planning_times.append(time.perf_counter() - t0)
        arrival = traj.terminal_time
        outcome = "Success" if arrival <= sc.timeout else "Timeout"
        records.append(TaskRecord(
            rid, s, g, te, te + sc.t_planning, arrival, t_prime,
            (arrival - te) - t_prime, outcome))
        tasks_left[rid] -= 1
        heapq.heappush(events, (arrival, 0, rid, "arrive"))

    while True:
        while events and events[0][0] <= t + 1e-12:
            te, _, rid, kind = heapq.heappop(events)
            if te > sc.timeout:
                heapq.heappush(events, (te, 0 if kind == "arrive" else 1,
                                        rid, kind))
                break
            agent = agents[rid]
            if kind == "arrive":
                agent.endpoint = agent.goal
                agent.goal = -1
                agent.state = AgentState.IDLE
                if tasks_left[rid] > 0:
                    heapq.heappush(events, (te, 1, rid, "issue"))
            else:
                process_event(te, rid)
        positions = [(a.position(t), a.radius) for a in agents]
        m = collision_monitor_tick(positions)
        if m < min_margin:
            min_margin = m
        if prev_positions is not None:
            m = _intertick_margin(prev_positions, positions)
            if m < min_margin:
                min_margin = m
        prev_positions = positions
        if trace:
            trace.write(json.dumps(
                {"t": round(t, 6),
                 "positions": [[p[0], p[1]] for p, _ in positions]}) + "\n")
        if not events or t >= sc.timeout:
            break
        tick += 1
        t = tick * sc.sim_dt
    if trace:
        trace.close()
    server.close()

    # unissued tasks at timeout simply count against the success rate
    total = sc.n_robots * sc.tasks_per_robot
    done = [r for r in records if r.outcome == "Success"]
    success_rate = len(done) / total
    return RunResult(scenario_name=sc.name, algorithm="COBRA", seed=sc.seed,
                     records=records, success_rate=success_rate,
                     min_pairwise_separation=min_margin,
                     planning_wall_times=planning_times,
                     valid_infrastructure=report.valid, r_bound=r_bound,
                     monitor_verdicts=list(server.monitor_verdicts))


def _fallback_r_bound(rm, infra, v_max):
    # non-valid infrastructures still need a finite horizon; use the plain
    # all-pairs shortest-path bound
    worst = 0.0
    for a in range(len(infra.endpoints)):
        for b in range(a + 1, len(infra.endpoints)):
            res = static_shortest_path(rm, rm.endpoint_vertices[a],
                                       rm.endpoint_vertices[b])
            if res is not None:
                worst = max(worst, res[1])
    return worst / v_max


def _run_orca(sc, rm, report, trace_path):
    infra = sc.infra
    states = [orca_mod.ReactiveAgentState(
        id=i, position=infra.endpoints[i], velocity=(0.0, 0.0), goal=-1,
        radius=sc.robot_radius, v_max=sc.v_max) for i in range(sc.n_robots)]
    gen = _TaskGenerator(sc.seed, len(infra.endpoints))
    tasks_left = {i: sc.tasks_per_robot for i in range(sc.n_robots)}
    next_issue = {}
    for i in range(sc.n_robots):
        next_issue[i] = gen.initial_delay(*sc.initial_delay_range)
    issue_times = {}
    standing = {i: i for i in range(sc.n_robots)}  # robot -> endpoint | None
    goal_dist_cache = {}
    records = []
    trace = open(trace_path, "w") if trace_path else None
    min_margin = math.inf
    prev_positions = None
    ctrl_every = max(1, round(sc.orca_dt / sc.sim_dt))
    # deadlock cutoff: if no robot with an active goal moves more than
    # _STALL_DIST from its reference point for _STALL_WINDOW seconds, the
    # fleet is wedged and the run ends early (pending tasks time out)
    ref_positions = [st.position for st in states]
    ref_time = 0.0

    def dist_table(g):
        if g not in goal_dist_cache:
            goal_dist_cache[g] = goal_distances(rm, rm.endpoint_vertices[g])
        return goal_dist_cache[g]

    t = 0.0
    tick = 0
    while True:
        # issue tasks
        for i in range(sc.n_robots):
            if states[i].goal < 0 and tasks_left[i] > 0 and \
                    next_issue.get(i) is not None and next_issue[i] <= t:
                occupied = {standing[j] for j in range(sc.n_robots)
                            if standing.get(j) is not None}
                dests = {states[j].goal for j in range(sc.n_robots)
                         if states[j].goal >= 0}
                g = gen.pick_destination(standing.get(i, -1), occupied, dests)
                if g is None:
                    continue
                states[i].goal = g
                issue_times[i] = next_issue[i]
                next_issue[i] = None
        # control
        if tick % ctrl_every == 0:
            snapshot = list(states)
            new_v = []
            for st in states:
                if st.goal < 0:
                    new_v.append((0.0, 0.0))
                    continue
                try:
                    vd = orca_mod.desired_velocity(
                        st, rm, dist_table(st.goal),
                        infra.endpoints[st.goal], infra.workspace)
                except orca_mod.Unreachable:
                    vd = (0.0, 0.0)
                new_v.append(orca_mod.orca_step(
                    st, snapshot, vd, tau=sc.orca_tau, dt=sc.orca_dt,
                    sensing=sc.orca_sensing))
            for st, v in zip(states, new_v):
                st.velocity = v
        # integrate, clamping against walls: take the full step if the disc
        # stays inside, else slide along one axis, else stop
        for i, st in enumerate(states):
            if st.velocity != (0.0, 0.0):
                px, py = st.position
                vx, vy = st.velocity
                moved = None
                for cx, cy in ((px + vx * sc.sim_dt, py + vy * sc.sim_dt),
                               (px + vx * sc.sim_dt, py),
                               (px, py + vy * sc.sim_dt)):
                    if point_clearance((cx, cy), infra.workspace) \
                            >= st.radius:
                        moved = (cx, cy)
                        break
                if moved is not None and moved != st.position:
                    st.position = moved
                    standing[i] = None
        # arrivals
        for i, st in enumerate(states):
            if st.goal >= 0 and dist(st.position,
                                     infra.endpoints[st.goal]) \
                    <= orca_mod.ARRIVAL_TOL:
                g = st.goal
                s = None
                issue = issue_times.pop(i)
                # reconstruct origin from the record history
                s = _last_endpoint(records, i, default=i)
                t_prime = _shortest_time(rm, s, g, sc.v_max)
                records.append(TaskRecord(
                    i, s, g, issue, issue, t, t_prime,
                    (t - issue) - t_prime, "Success"))
                st.goal = -1
                st.position = infra.endpoints[g]
                st.velocity = (0.0, 0.0)
                standing[i] = g
                tasks_left[i] -= 1
                if tasks_left[i] > 0:
                    next_issue[i] = t
        positions = [(st.position, st.radius) for st in states]
        m = collision_monitor_tick(positions)
        if m < min_margin:
            min_margin = m
        if prev_positions is not None:
            m = _intertick_margin(prev_positions, positions)
            if m < min_margin:
                min_margin = m
        prev_positions = positions
        if trace:
            trace.write(json.dumps(
                {"t": round(t, 6),
                 "positions": [[p[0], p[1]] for p, _ in positions]}) + "\n")
        if any(st.goal >= 0 and
               dist(st.position, ref_positions[i]) > _STALL_DIST
               for i, st in enumerate(states)):
            ref_positions = [st.position for st in states]
            ref_time = t
        stalled = (t - ref_time > _STALL_WINDOW and
                   any(st.goal >= 0 for st in states))
        if all(v == 0 for v in tasks_left.values()) or t >= sc.timeout \
                or stalled:
            break
        tick += 1
        t = tick * sc.sim_dt
    if trace:
        trace.close()
    for i in range(sc.n_robots):
        if states[i].goal >= 0:
            s = _last_endpoint(records, i, default=i)
            records.append(TaskRecord(
                i, s, states[i].goal, issue_times.get(i, math.nan), math.nan,
                math.nan, math.nan, math.nan, "Timeout"))
    total = sc.n_robots * sc.tasks_per_robot
    done = [r for r in records if r.outcome == "Success"]
    return RunResult(scenario_name=sc.name, algorithm="ORCA", seed=sc.seed,
                     records=records, success_rate=len(done) / total,
                     min_pairwise_separation=min_margin,
                     planning_wall_times=[],
                     valid_infrastructure=report.valid)


def _last_endpoint(records, robot, default):
    last = default
    best_t = -math.inf
    for r in records:
        if r.robot == robot and r.outcome == "Success" and \
                r.arrival_time > best_t:
            best_t = r.arrival_time
            last = r.g
    return last
