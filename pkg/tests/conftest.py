import pytest

from fleetplan import SCENARIO_NAMES, scenario_path
from fleetplan.geometry import rect_region
from fleetplan.roadmap import build_grid_roadmap
from fleetplan.sim import build_scenario_roadmap, load_scenario


@pytest.fixture(scope="session")
def shipped_roadmaps():
    """Roadmaps for the three shipped maps, built once per session."""
    out = {}
    for name in SCENARIO_NAMES:
        sc = load_scenario(scenario_path(name))
        out[name] = (sc, build_scenario_roadmap(sc))
    return out


@pytest.fixture(scope="session")
def small_room():
    """Tiny open room with two endpoints, cheap enough for unit tests."""
    ws = rect_region(0, 0, 6.5, 6.5)
    endpoints = ((1.3, 1.3), (5.2, 5.2))
    rm = build_grid_roadmap(ws, 1.3, 0.5, endpoints)
    return ws, endpoints, rm
