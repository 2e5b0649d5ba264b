"""Online multi-robot trajectory coordination.

Robots in a shared 2-D workspace receive relocation tasks at arbitrary
times and plan collision-free trajectories one at a time: a token holds
every robot's committed trajectory, and each new task is answered with a
minimal-arrival best-response trajectory searched over a time-extended
roadmap. When the endpoint layout forms a valid infrastructure, every task
is guaranteed to succeed without collision. A reactive velocity-obstacle
baseline and a benchmark harness are included.
"""

from importlib import resources

from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

SCENARIO_NAMES = ("hall", "warehouse", "office")


def scenario_path(name: str):
    """Filesystem path of a shipped scenario map (hall, warehouse, office)."""
    p = resources.files("fleetplan") / "scenarios" / f"{name}.json"
    if not p.is_file():
        raise KeyError(f"unknown scenario {name!r}; have {SCENARIO_NAMES}")
    return str(p)
