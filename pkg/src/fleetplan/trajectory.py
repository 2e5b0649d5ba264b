"""Piecewise-linear, goal-terminal trajectories.

A trajectory is defined for all t >= 0: before the first waypoint the body
sits at the first waypoint, after the last it parks at the terminal point
forever.
"""

import math

import numpy as np

from . import kernels
from .geometry import Point


class Trajectory:
    """Waypoint path (strictly increasing times) with clamped evaluation."""

    __slots__ = ("times", "xs", "ys")

    def __init__(self, waypoints):
        if not waypoints:
            raise ValueError("trajectory needs at least one waypoint")
        self.times = np.array([t for (_, t) in waypoints], dtype=float)
        self.xs = np.array([p[0] for (p, _) in waypoints], dtype=float)
        self.ys = np.array([p[1] for (p, _) in waypoints], dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("waypoint times must be strictly increasing")

    @classmethod
    def stay(cls, p: Point, t: float = 0.0) -> "Trajectory":
        """Trajectory that sits at p forever (registered-robot entry)."""
        return cls([(p, t)])

    @property
    def departure_time(self) -> float:
        return float(self.times[0])

    @property
    def terminal_time(self) -> float:
        """f(pi): first time after which the position never changes."""
        return float(self.times[-1])

    @property
    def terminal_point(self) -> Point:
        return (float(self.xs[-1]), float(self.ys[-1]))

    @property
    def start_point(self) -> Point:
        return (float(self.xs[0]), float(self.ys[0]))

    def position(self, t: float) -> Point:
        x, y = kernels.polyline_eval(self.times, self.xs, self.ys, t)
        return (float(x), float(y))

    def waypoints(self):
        return [((float(x), float(y)), float(t))
                for x, y, t in zip(self.xs, self.ys, self.times)]

    def max_speed(self) -> float:
        v = 0.0
        for i in range(len(self.times) - 1):
            dt = self.times[i + 1] - self.times[i]
            d = math.hypot(self.xs[i + 1] - self.xs[i],
                           self.ys[i + 1] - self.ys[i])
            v = max(v, d / dt)
        return v

    def to_json(self) -> dict:
        return {
            "depart": self.departure_time,
            "waypoints": [[float(x), float(y), float(t)]
                          for x, y, t in zip(self.xs, self.ys, self.times)],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Trajectory":
        return cls([((x, y), t) for x, y, t in obj["waypoints"]])


def min_separation_linear_vs_trajectory(p0: Point, p1: Point, t0: float,
                                        t1: float, traj: Trajectory) -> float:
    """Closest center approach between a body moving linearly from p0 at t0
    to p1 at t1 and a body following traj, over [t0, t1]."""
    return kernels.min_separation_linear_vs_polyline(
        p0[0], p0[1], p1[0], p1[1], t0, t1, traj.times, traj.xs, traj.ys)


def trajectories_min_separation(a: Trajectory, b: Trajectory,
                                t_start: float = 0.0) -> float:
    """Closest center approach between two trajectories over [t_start, inf).

    Finite work: both trajectories are terminal, so after the later terminal
    time the separation is the constant terminal distance.
    """
    t_end = max(a.terminal_time, b.terminal_time, t_start)
    best = math.hypot(a.position(t_end)[0] - b.position(t_end)[0],
                      a.position(t_end)[1] - b.position(t_end)[1])
    cuts = sorted({t_start, t_end,
                   *(float(t) for t in a.times if t_start < t < t_end),
                   *(float(t) for t in b.times if t_start < t < t_end)})
    for i in range(len(cuts) - 1):
        ta, tb = cuts[i], cuts[i + 1]
        pa0 = a.position(ta)
        pa1 = a.position(tb)
        d = kernels.min_separation_linear_vs_polyline(
            pa0[0], pa0[1], pa1[0], pa1[1], ta, tb, b.times, b.xs, b.ys)
        if d < best:
            best = d
    return best


def point_vs_trajectory_min_separation(p: Point, t_from: float,
                                       traj: Trajectory) -> float:
    """Closest approach between a body parked at p from t_from onward and a
    body following traj."""
    t_end = max(traj.terminal_time, t_from)
    best = math.hypot(p[0] - traj.terminal_point[0],
                      p[1] - traj.terminal_point[1])
    if t_end > t_from:
        d = kernels.min_separation_linear_vs_polyline(
            p[0], p[1], p[0], p[1], t_from, t_end,
            traj.times, traj.xs, traj.ys)
        if d < best:
            best = d
    return best
