import json

import pytest
from starlette.testclient import TestClient

from fleetplan import scenario_path
from fleetplan.live_service import (LiveSession, create_app, validate_command)
from fleetplan.protocol import AgentState, RobotAgent


def _agents(states):
    out = []
    for i, (state, endpoint, goal) in enumerate(states):
        out.append(RobotAgent(id=i, radius=0.5, v_max=1.0, state=state,
                              endpoint=endpoint, goal=goal))
    return out


def test_validate_command_reasons():
    agents = _agents([(AgentState.IDLE, 0, -1),
                      (AgentState.EXECUTING, 1, 5),
                      (AgentState.FAILED, 2, -1)])
    n = 10
    assert validate_command(99, 3, agents, n) == "UnknownRobot"
    assert validate_command(-1, 3, agents, n) == "UnknownRobot"
    assert validate_command(0, 99, agents, n) == "UnknownEndpoint"
    assert validate_command(1, 3, agents, n) == "RobotBusy"
    assert validate_command(2, 3, agents, n) == "RobotFailed"
    assert validate_command(0, 5, agents, n) == "DestinationConflict"
    assert validate_command(0, 2, agents, n) == "DestinationConflict"
    assert validate_command(0, 0, agents, n) == "DestinationConflict"
    assert validate_command(0, 3, agents, n) is None


@pytest.fixture(scope="module")
def client():
    app = create_app(scenario_path("hall"), speed=2000.0)
    with TestClient(app) as c:
        yield c


def _recv_until(ws, kind, limit=3000):
    for _ in range(limit):
        msg = ws.receive_json()
        if msg["type"] == kind:
            return msg
    raise AssertionError(f"no {kind} message within {limit} messages")


def test_hello_carries_map_and_roster(client):
    with client.websocket_connect("/ws") as ws:
        hello = ws.receive_json()
        assert hello["type"] == "HELLO"
        assert hello["v"] == 1
        with open(scenario_path("hall")) as f:
            assert hello["map"] == json.load(f)
        assert [r["id"] for r in hello["robots"]] == \
            list(range(len(hello["robots"])))
        assert hello["roadmap"]["vertices"]
        snap = ws.receive_json()
        assert snap["type"] == "SNAPSHOT"
        assert len(snap["robots"]) == len(hello["robots"])


def test_dispatch_round_trip(client):
    session = client.app.state.session
    with client.websocket_connect("/ws") as ws:
        hello = ws.receive_json()
        free_goal = len(session.sc.infra.endpoints) - 1
        ws.send_json({"v": 1, "type": "DISPATCH", "id": "cmd-1",
                      "robot": 0, "goal": free_goal})
        ack = _recv_until(ws, "ACK")
        assert ack["id"] == "cmd-1"
        # committed trajectory visible in the next snapshot
        snap = _recv_until(ws, "SNAPSHOT")
        r0 = snap["robots"][0]
        assert r0["state"] in ("Executing", "Idle")
        if r0["state"] == "Executing":
            assert r0["goal"] == free_goal
            assert r0["trajectory"]["waypoints"]
        # a busy robot refuses a second command
        if r0["state"] == "Executing":
            ws.send_json({"v": 1, "type": "DISPATCH", "id": "cmd-2",
                          "robot": 0, "goal": 1 if free_goal != 1 else 2})
            rej = _recv_until(ws, "REJECT")
            assert rej["id"] == "cmd-2"
            assert rej["reason"] == "RobotBusy"
        # eventually the task completes
        for _ in range(4000):
            snap = _recv_until(ws, "SNAPSHOT")
            if snap["robots"][0]["state"] == "Idle":
                break
        assert snap["robots"][0]["state"] == "Idle"
        assert (0, free_goal, "Success") in session.task_outcomes
        assert snap["endpoints"][free_goal]["occupied"]


def test_conflicting_dispatch_never_reaches_token(client):
    session = client.app.state.session
    with client.websocket_connect("/ws") as ws:
        ws.receive_json()
        # robot 2's own endpoint is a standing destination: conflict
        rev_before = session.server.token.revision
        ws.send_json({"v": 1, "type": "DISPATCH", "id": "cmd-x",
                      "robot": 1, "goal": session.agents[2].endpoint})
        rej = _recv_until(ws, "REJECT")
        assert rej["reason"] == "DestinationConflict"
        assert session.server.token.revision == rev_before


def test_snapshot_times_monotone(client):
    with client.websocket_connect("/ws") as ws:
        ws.receive_json()
        times = []
        for _ in range(5):
            times.append(_recv_until(ws, "SNAPSHOT")["t"])
        assert times == sorted(times)


def test_session_step_is_deterministic():
    a = LiveSession(scenario_path("hall"), speed=1.0)
    b = LiveSession(scenario_path("hall"), speed=1.0)
    for _ in range(10):
        a.step()
        b.step()
    assert a.snapshot() == b.snapshot()
