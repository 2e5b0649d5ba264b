"""The compiled kernels and the pure-Python twin must agree on the same
inputs. Distances go through hypot, whose libc and CPython implementations
can differ in the last ulp, so those compare at 1e-12; pure interpolation
is exact."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fleetplan import _kernels_py as pure

compiled = pytest.importorskip("fleetplan._kernels")

coord = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


def test_backend_names():
    assert pure.BACKEND == "python"
    assert compiled.BACKEND == "cython"


@given(coord, coord, coord, coord, coord, coord)
@settings(max_examples=300, deadline=None)
def test_point_segment_distance_twins(px, py, ax, ay, bx, by):
    a = pure.point_segment_distance(px, py, ax, ay, bx, by)
    b = compiled.point_segment_distance(px, py, ax, ay, bx, by)
    assert math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)


@given(*[coord] * 8)
@settings(max_examples=300, deadline=None)
def test_segment_segment_distance_twins(ax, ay, bx, by, cx, cy, dx, dy):
    a = pure.segment_segment_distance(ax, ay, bx, by, cx, cy, dx, dy)
    b = compiled.segment_segment_distance(ax, ay, bx, by, cx, cy, dx, dy)
    assert math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)


@given(*[coord] * 8)
@settings(max_examples=300, deadline=None)
def test_moving_points_twins(ax0, ay0, ax1, ay1, bx0, by0, bx1, by1):
    a = pure.moving_points_min_separation(ax0, ay0, ax1, ay1,
                                          bx0, by0, bx1, by1)
    b = compiled.moving_points_min_separation(ax0, ay0, ax1, ay1,
                                              bx0, by0, bx1, by1)
    assert math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)


@st.composite
def polyline(draw):
    n = draw(st.integers(1, 6))
    times = sorted(draw(st.lists(
        st.floats(0, 50, allow_nan=False), min_size=n, max_size=n,
        unique=True)))
    xs = draw(st.lists(coord, min_size=n, max_size=n))
    ys = draw(st.lists(coord, min_size=n, max_size=n))
    return (np.array(times), np.array(xs), np.array(ys))


@given(polyline(), st.floats(-5, 60, allow_nan=False))
@settings(max_examples=200, deadline=None)
def test_polyline_eval_twins(poly, t):
    times, xs, ys = poly
    a = pure.polyline_eval(times, xs, ys, t)
    b = compiled.polyline_eval(times, xs, ys, t)
    assert tuple(a) == tuple(b)


@given(polyline(), coord, coord, coord, coord,
       st.floats(0, 50, allow_nan=False), st.floats(0, 10, allow_nan=False))
@settings(max_examples=200, deadline=None)
def test_linear_vs_polyline_twins(poly, px0, py0, px1, py1, t0, span):
    times, xs, ys = poly
    t1 = t0 + span
    a = pure.min_separation_linear_vs_polyline(px0, py0, px1, py1, t0, t1,
                                               times, xs, ys)
    b = compiled.min_separation_linear_vs_polyline(px0, py0, px1, py1, t0, t1,
                                                   times, xs, ys)
    assert math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)


def test_selected_backend_exposed():
    import fleetplan
    assert fleetplan.KERNEL_BACKEND in ("cython", "python")
