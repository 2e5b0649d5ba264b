"""Token-passing coordination layer.

A single token holds every robot's committed trajectory. A token server
grants exclusive leases FIFO by request time (ties broken by robot id);
agents exchange REQUEST / GRANT / UPDATE / RELEASE messages with it. The
runtime invariant monitors (token endpoint-terminal, token collision-free,
active-horizon bound) run inside the critical section at every acquisition
and update, and every event lands in an append-only JSONL log.
"""

import json
from dataclasses import dataclass, field
from enum import Enum

from .geometry import EPS_GEOM, Point, dist
from .planner import NoPath, PlannerConfig, best_traj
from .roadmap import Infrastructure, Roadmap
from .trajectory import Trajectory, trajectories_min_separation


class MonitorViolation(Exception):
    """A runtime invariant monitor reported false."""


class EndpointOccupied(Exception):
    """Registration start endpoint already terminally occupied."""


class DestinationConflict(Exception):
    """Goal endpoint is already another robot's active destination."""


class PlanningFailed(Exception):
    """Trajectory planning returned no path (horizon exhaustion or a
    non-valid infrastructure)."""

    def __init__(self, msg: str, horizon_exhausted: bool = False):
        super().__init__(msg)
        self.horizon_exhausted = horizon_exhausted


@dataclass
class Token:
    entries: dict = field(default_factory=dict)  # robot id -> Trajectory
    revision: int = 0


class AgentState(Enum):
    UNREGISTERED = "Unregistered"
    IDLE = "Idle"
    PLANNING = "Planning"
    EXECUTING = "Executing"
    FAILED = "Failed"


@dataclass
class RobotAgent:
    id: int
    radius: float
    v_max: float
    state: AgentState = AgentState.UNREGISTERED
    endpoint: int = -1            # current / most recent endpoint index
    trajectory: Trajectory = None
    goal: int = -1                # active destination endpoint index

    def position(self, t: float) -> Point:
        if self.trajectory is None:
            raise RuntimeError(f"robot {self.id} has no trajectory")
        return self.trajectory.position(t)


def token_is_collision_free(token: Token, radii: dict) -> bool:
    """True iff every pair of token trajectories keeps center separation of
    at least the radius sum for all time."""
    ids = sorted(token.entries)
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            ta = token.entries[a]
            tb = token.entries[b]
            # compare from the later commitment onward: before that, the
            # earlier pairing (already checked) governed
            t0 = max(ta.departure_time, tb.departure_time)
            sep = trajectories_min_separation(ta, tb, t_start=t0)
            if sep < radii[a] + radii[b] - EPS_GEOM:
                return False
    return True


def token_is_E_terminal(token: Token, infra: Infrastructure) -> bool:
    """True iff every entry parks forever at some infrastructure endpoint."""
    for traj in token.entries.values():
        tp = traj.terminal_point
        if not any(dist(tp, e) <= EPS_GEOM for e in infra.endpoints):
            return False
    return True


def lemma_active_bound_holds(token: Token, t: float, r: float,
                             slack: float = 0.0) -> bool:
    """Active-trajectory horizon bound: the latest finish time among
    trajectories still moving at t is at most t + slack + (number active) * r.

    With r the worst single-relocation duration on the tick lattice (plus
    one tick of wait alignment) and slack the planning window, this is the
    bound each best-response plan is guaranteed to beat.
    """
    active = [traj for traj in token.entries.values()
              if traj.terminal_time >= t]
    if not active:
        return True
    latest = max(traj.terminal_time for traj in active)
    return latest <= t + slack + len(active) * r + EPS_GEOM


class TokenServer:
    """Serializes all token access. Leases are granted FIFO by request
    time; simultaneous requests break ties by robot id."""

    def __init__(self, infra: Infrastructure, radii: dict,
                 r_bound: float = None, bound_slack: float = 0.0,
                 log_path=None):
        self.token = Token()
        self.infra = infra
        self.radii = radii
        self.r_bound = r_bound
        self.bound_slack = bound_slack
        self._holder = None
        self._queue = []  # (request time, robot id)
        self._log = open(log_path, "w") if log_path else None
        self.monitor_verdicts = []

    def close(self):
        if self._log:
            self._log.close()
            self._log = None

    def _emit(self, kind: str, t: float, **payload):
        event = {"event": kind, "t": t, **payload}
        if self._log:
            self._log.write(json.dumps(event) + "\n")
        return event

    def _run_monitors(self, t: float, where: str):
        verdicts = {
            "token_endpoint_terminal": token_is_E_terminal(self.token,
                                                           self.infra),
            "token_collision_free": token_is_collision_free(self.token,
                                                            self.radii),
        }
        if self.r_bound is not None:
            verdicts["active_bound"] = lemma_active_bound_holds(
                self.token, t, self.r_bound, slack=self.bound_slack)
        self.monitor_verdicts.append((t, where, verdicts))
        self._emit("MONITOR", t, where=where, verdicts=verdicts)
        if not all(verdicts.values()):
            failed = [k for k, v in verdicts.items() if not v]
            raise MonitorViolation(f"monitor(s) {failed} false at t={t}")

    def request(self, robot_id: int, t: float) -> Token:
        """Acquire an exclusive lease (blocks are impossible here: the
        simulation serializes agents, so a queued request is granted as soon
        as the current holder releases)."""
        if self._holder is not None:
            raise RuntimeError(
                f"token held by {self._holder}, robot {robot_id} must queue")
        self._queue.append((t, robot_id))
        self._queue.sort()
        _, granted = self._queue.pop(0)
        self._holder = granted
        self._emit("REQUEST", t, robot=robot_id)
        self._emit("GRANT", t, robot=granted, revision=self.token.revision,
                   entries=sorted(self.token.entries))
        self._run_monitors(t, "acquire")
        return self.token

    def update(self, robot_id: int, t: float):
        if self._holder != robot_id:
            raise RuntimeError(f"robot {robot_id} does not hold the token")
        self.token.revision += 1
        self._emit("UPDATE", t, robot=robot_id,
                   revision=self.token.revision,
                   entries={str(k): v.to_json()
                            for k, v in sorted(self.token.entries.items())})
        self._run_monitors(t, "update")

    def release(self, robot_id: int, t: float):
        if self._holder != robot_id:
            raise RuntimeError(f"robot {robot_id} does not hold the token")
        self._holder = None
        self._emit("RELEASE", t, robot=robot_id)


def register(agent: RobotAgent, start: int, server: TokenServer,
             t: float) -> None:
    """Register a new robot: claim its start endpoint with a stay-forever
    trajectory."""
    if agent.state is not AgentState.UNREGISTERED:
        raise RuntimeError(f"robot {agent.id} already registered")
    start_point = server.infra.endpoints[start]
    token = server.request(agent.id, t)
    try:
        for rid, traj in token.entries.items():
            if dist(traj.terminal_point, start_point) <= EPS_GEOM:
                raise EndpointOccupied(
                    f"endpoint {start} already taken by robot {rid}")
        traj = Trajectory.stay(start_point, t)
        token.entries[agent.id] = traj
        agent.trajectory = traj
        agent.endpoint = start
        agent.state = AgentState.IDLE
        server.update(agent.id, t)
    finally:
        server.release(agent.id, t)


def active_destinations(agents, exclude_id: int = None):
    return {a.goal for a in agents
            if a.state is AgentState.EXECUTING and a.id != exclude_id}


def handle_task(agent: RobotAgent, goal: int, server: TokenServer,
                rm: Roadmap, cfg_base: PlannerConfig, t_now: float,
                t_planning: float, n_robots: int, r_bound: float,
                other_agents=(), stats: dict = None) -> Trajectory:
    """Handle a relocation task from the agent's current endpoint to goal.

    Acquires the token, rebuilds the dynamic obstacles from the other
    entries, plans a best-response trajectory departing at
    t_now + t_planning (prefixed by a wait at the start so the trajectory
    is defined from t_now), commits it, and releases the token. On planning
    failure the agent re-inserts a stay-forever entry at its endpoint so
    the token invariants survive, and transitions to Failed.
    """
    if agent.state is not AgentState.IDLE:
        raise RuntimeError(f"robot {agent.id} is not idle")
    if goal in active_destinations(other_agents, exclude_id=agent.id):
        raise DestinationConflict(
            f"endpoint {goal} is already an active destination")
    s_point = server.infra.endpoints[agent.endpoint]
    g_point = server.infra.endpoints[goal]
    agent.state = AgentState.PLANNING
    token = server.request(agent.id, t_now)
    try:
        for other in other_agents:
            if other.id == agent.id or other.state is not AgentState.EXECUTING:
                continue
            entry = token.entries.get(other.id)
            if entry is not None and \
                    dist(entry.terminal_point, g_point) <= EPS_GEOM:
                agent.state = AgentState.IDLE
                raise DestinationConflict(
                    f"endpoint {goal} is robot {other.id}'s destination")
        token.entries.pop(agent.id, None)
        obstacles = [(server.radii[rid], traj)
                     for rid, traj in sorted(token.entries.items())]
        t_dep = t_now + t_planning
        cfg = PlannerConfig(dt=cfg_base.dt,
                            horizon=t_dep + n_robots * r_bound
                            + 2 * cfg_base.dt,
                            v_max=cfg_base.v_max,
                            robot_radius=cfg_base.robot_radius)
        try:
            planned = best_traj(s_point, t_dep, g_point, obstacles, rm, cfg,
                                stats=stats)
        except NoPath as exc:
            fallback = Trajectory.stay(s_point, t_now)
            token.entries[agent.id] = fallback
            agent.trajectory = fallback
            agent.state = AgentState.FAILED
            server.update(agent.id, t_now)
            raise PlanningFailed(str(exc),
                                 horizon_exhausted=exc.horizon_exhausted)
        # prepend the planning-window wait so pi(t) is defined from t_now
        full = Trajectory([(s_point, t_now)] + planned.waypoints()) \
            if t_dep > t_now else planned
        token.entries[agent.id] = full
        agent.trajectory = full
        agent.goal = goal
        agent.state = AgentState.EXECUTING
        server.update(agent.id, t_now)
        return full
    finally:
        server.release(agent.id, t_now)
