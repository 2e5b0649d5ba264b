"""Live operator bridge: streams simulation snapshots over a WebSocket and
accepts relocation-task dispatches.

One session owns the simulation loop. Clients are concurrent readers plus a
serialized command queue that is drained at tick boundaries, so every
accepted command is applied between ticks and every snapshot is a
consistent single-instant view. Planning uses simulation time throughout;
the real-time speed factor only changes how fast wall clock tracks the
simulation, never its outcomes.
"""

import asyncio
import itertools
import json
import math
from contextlib import asynccontextmanager

import click
import uvicorn
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .geometry import EPS_GEOM, dist
from .planner import PlannerConfig, step_r_bound
from .protocol import (AgentState, DestinationConflict, MonitorViolation,
                       PlanningFailed, RobotAgent, TokenServer, handle_task,
                       register)
from .roadmap import check_valid_roadmap, map_to_json
from .sim import build_scenario_roadmap, load_scenario

PROTOCOL_VERSION = 1

REASON_UNKNOWN_ROBOT = "UnknownRobot"
REASON_UNKNOWN_ENDPOINT = "UnknownEndpoint"
REASON_ROBOT_BUSY = "RobotBusy"
REASON_ROBOT_FAILED = "RobotFailed"
REASON_DESTINATION_CONFLICT = "DestinationConflict"


def validate_command(robot: int, goal: int, agents, n_endpoints: int):
    """Pure dispatch check; returns None when acceptable, else the reason.

    The conflict rule mirrors the planner-side destination assert: the goal
    may be neither another robot's active destination nor an idle robot's
    standing endpoint.
    """
    if not isinstance(robot, int) or not 0 <= robot < len(agents):
        return REASON_UNKNOWN_ROBOT
    if not isinstance(goal, int) or not 0 <= goal < n_endpoints:
        return REASON_UNKNOWN_ENDPOINT
    agent = agents[robot]
    if agent.state is AgentState.FAILED:
        return REASON_ROBOT_FAILED
    if agent.state is not AgentState.IDLE:
        return REASON_ROBOT_BUSY
    for other in agents:
        if other.id == robot:
            continue
        if other.state is AgentState.EXECUTING and other.goal == goal:
            return REASON_DESTINATION_CONFLICT
        if other.state in (AgentState.IDLE, AgentState.FAILED) and \
                other.endpoint == goal:
            return REASON_DESTINATION_CONFLICT
    if agent.endpoint == goal:
        return REASON_DESTINATION_CONFLICT
    return None


class LiveSession:
    """Drives one simulation and fans snapshots out to connected clients."""

    def __init__(self, scenario_file: str, speed: float = 1.0,
                 snapshot_period: float = 0.1):
        self.sc = load_scenario(scenario_file)
        with open(scenario_file) as f:
            self.map_doc = json.load(f)
        self.rm = build_scenario_roadmap(self.sc)
        report = check_valid_roadmap(self.rm, self.sc.infra,
                                     self.sc.robot_radius)
        self.cfg = PlannerConfig(dt=self.sc.dt, horizon=math.inf,
                                 v_max=self.sc.v_max,
                                 robot_radius=self.sc.robot_radius)
        self.r_step = step_r_bound(self.rm, len(self.sc.infra.endpoints),
                                   self.cfg) + self.sc.dt if report.valid \
            else None
        radii = {i: self.sc.robot_radius for i in range(self.sc.n_robots)}
        self.server = TokenServer(self.sc.infra, radii, r_bound=self.r_step,
                                  bound_slack=self.sc.t_planning)
        self.agents = [RobotAgent(id=i, radius=self.sc.robot_radius,
                                  v_max=self.sc.v_max)
                       for i in range(self.sc.n_robots)]
        for a in self.agents:
            register(a, a.id, self.server, 0.0)
        self.t = 0.0
        self._tick = 0
        self.speed = speed
        self.snapshot_every = max(1, round(snapshot_period / self.sc.sim_dt))
        self.commands = []       # (command id, robot, goal, client queue)
        self.clients = set()     # asyncio queues
        self.alerts = []
        self.task_outcomes = []  # (robot, goal, outcome)
        self._pending_arrivals = {}

    # -- simulation stepping (synchronous, deterministic) --

    def step(self):
        """Advance one tick: drain commands, apply arrivals, move time."""
        for cid, robot, goal, queue in self.commands:
            self._apply_dispatch(cid, robot, goal, queue)
        self.commands = []
        for rid, arrival in sorted(self._pending_arrivals.items()):
            if arrival <= self.t + 1e-12:
                agent = self.agents[rid]
                agent.endpoint = agent.goal
                agent.goal = -1
                agent.state = AgentState.IDLE
                del self._pending_arrivals[rid]
                self.task_outcomes.append((rid, agent.endpoint, "Success"))
        self._tick += 1
        self.t = self._tick * self.sc.sim_dt

    def _apply_dispatch(self, cid, robot, goal, queue):
        reason = validate_command(robot, goal, self.agents,
                                  len(self.sc.infra.endpoints))
        if reason is not None:
            queue.put_nowait(_msg("REJECT", id=cid, reason=reason))
            return
        agent = self.agents[robot]
        try:
            traj = handle_task(agent, goal, self.server, self.rm, self.cfg,
                               self.t, self.sc.t_planning, self.sc.n_robots,
                               self.r_step or _fallback_horizon(self),
                               other_agents=self.agents)
        except DestinationConflict:
            queue.put_nowait(_msg("REJECT", id=cid,
                                  reason=REASON_DESTINATION_CONFLICT))
            return
        except PlanningFailed as exc:
            self.task_outcomes.append((robot, goal, "PlanningFailure"))
            queue.put_nowait(_msg("REJECT", id=cid,
                                  reason=REASON_ROBOT_FAILED))
            self._alert(f"planning failed for robot {robot}: {exc}")
            return
        except MonitorViolation as exc:
            self._alert(str(exc))
            raise
        self._pending_arrivals[robot] = traj.terminal_time
        queue.put_nowait(_msg("ACK", id=cid))

    def _alert(self, text: str):
        self.alerts.append(text)
        self.broadcast(_msg("ALERT", text=text))

    # -- messages --

    def hello(self) -> dict:
        return _msg("HELLO",
                    map=self.map_doc,
                    roadmap={"vertices": [list(p)
                                          for p in self.rm.vertices],
                             "edges": [list(e) for e in self.rm.edges]},
                    robots=[{"id": a.id, "endpoint": a.endpoint,
                             "radius": a.radius, "v_max": a.v_max}
                            for a in self.agents])

    def snapshot(self) -> dict:
        eps = self.sc.infra.endpoints
        occupied = set()
        assigned = set()
        robots = []
        for a in self.agents:
            p = a.position(self.t)
            if a.state is AgentState.EXECUTING:
                assigned.add(a.goal)
            elif any(dist(p, e) <= EPS_GEOM for e in eps):
                occupied.add(a.endpoint)
            robots.append({
                "id": a.id,
                "position": [p[0], p[1]],
                "state": a.state.value,
                "goal": a.goal if a.state is AgentState.EXECUTING else None,
                "trajectory": a.trajectory.to_json()
                if a.state is AgentState.EXECUTING else None,
            })
        verdicts = self.server.monitor_verdicts[-1][2] \
            if self.server.monitor_verdicts else {}
        return _msg("SNAPSHOT", t=self.t, robots=robots,
                    endpoints=[{"index": i, "position": list(e),
                                "occupied": i in occupied,
                                "assigned": i in assigned}
                               for i, e in enumerate(eps)],
                    monitors=verdicts)

    def broadcast(self, message: dict):
        for q in self.clients:
            q.put_nowait(message)

    async def run_loop(self):
        period = self.sc.sim_dt / self.speed
        while True:
            self.step()
            if self._tick % self.snapshot_every == 0:
                self.broadcast(self.snapshot())
            await asyncio.sleep(period)


def _fallback_horizon(session: LiveSession) -> float:
    return sum(session.rm.lengths) / session.sc.v_max


def _msg(kind: str, **payload) -> dict:
    return {"v": PROTOCOL_VERSION, "type": kind, **payload}


def create_app(scenario_file: str, speed: float = 1.0) -> FastAPI:
    session = LiveSession(scenario_file, speed=speed)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(session.run_loop())
        yield
        task.cancel()

    app = FastAPI(lifespan=lifespan)
    app.state.session = session
    cid_counter = itertools.count(1)

    @app.websocket("/ws")
    async def ws(sock: WebSocket):
        await sock.accept()
        queue = asyncio.Queue()
        session.clients.add(queue)
        await sock.send_json(session.hello())
        await sock.send_json(session.snapshot())

        async def reader():
            while True:
                raw = await sock.receive_json()
                if raw.get("type") != "DISPATCH":
                    continue
                cid = raw.get("id", next(cid_counter))
                session.commands.append(
                    (cid, raw.get("robot"), raw.get("goal"), queue))

        read_task = asyncio.create_task(reader())
        try:
            while True:
                await sock.send_json(await queue.get())
        except WebSocketDisconnect:
            pass
        finally:
            read_task.cancel()
            session.clients.discard(queue)

    return app


@click.command()
@click.option("--scenario", "scenario_file", required=True,
              type=click.Path(exists=True))
@click.option("--port", default=8000, show_default=True)
@click.option("--speed", default=1.0, show_default=True)
def main(scenario_file, port, speed):
    """Serve a live coordination session over a WebSocket."""
    uvicorn.run(create_app(scenario_file, speed), host="0.0.0.0", port=port)


if __name__ == "__main__":
    main()
