"""Pure-Python fallback for the distance kernels.

Mirrors fleetplan._kernels (the Cython extension) exactly; keep the two in
sync. These functions sit in the innermost loops of collision checking and
roadmap construction.
"""

import math

BACKEND = "python"


def point_segment_distance(px, py, ax, ay, bx, by):
    """Distance from point (px,py) to segment (ax,ay)-(bx,by)."""
    dx = bx - ax
    dy = by - ay
    den = dx * dx + dy * dy
    if den <= 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / den
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def _segments_properly_cross(ax, ay, bx, by, cx, cy, dx, dy):
    d1 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    d2 = (bx - ax) * (dy - ay) - (by - ay) * (dx - ax)
    d3 = (dx - cx) * (ay - cy) - (dy - cy) * (ax - cx)
    d4 = (dx - cx) * (by - cy) - (dy - cy) * (bx - cx)
    return ((d1 > 0.0) != (d2 > 0.0)) and ((d3 > 0.0) != (d4 > 0.0)) and \
        d1 != 0.0 and d2 != 0.0 and d3 != 0.0 and d4 != 0.0


def segment_segment_distance(ax, ay, bx, by, cx, cy, dx, dy):
    """Minimum distance between segments a-b and c-d (0 when they cross)."""
    if _segments_properly_cross(ax, ay, bx, by, cx, cy, dx, dy):
        return 0.0
    d = point_segment_distance(ax, ay, cx, cy, dx, dy)
    e = point_segment_distance(bx, by, cx, cy, dx, dy)
    if e < d:
        d = e
    e = point_segment_distance(cx, cy, ax, ay, bx, by)
    if e < d:
        d = e
    e = point_segment_distance(dx, dy, ax, ay, bx, by)
    if e < d:
        d = e
    return d


def moving_points_min_separation(ax0, ay0, ax1, ay1, bx0, by0, bx1, by1):
    """Closest approach of two points moving linearly over a shared interval.

    Both motions are parameterized over t in [0,1]; returns
    min_t |a(t) - b(t)|, from the closed-form minimization of the quadratic
    |a(t)-b(t)|^2 clamped to [0,1] (equivalently: distance from the origin to
    the segment swept by the relative position).
    """
    rx0 = ax0 - bx0
    ry0 = ay0 - by0
    rx1 = ax1 - bx1
    ry1 = ay1 - by1
    return point_segment_distance(0.0, 0.0, rx0, ry0, rx1, ry1)


def min_separation_linear_vs_polyline(px0, py0, px1, py1, t0, t1,
                                      times, xs, ys):
    """Closest approach between a linearly moving point and a waypoint path.

    The probe point moves from (px0,py0) at time t0 to (px1,py1) at time t1.
    The other body follows the piecewise-linear path given by parallel arrays
    (times, xs, ys); before times[0] it sits at the first waypoint, after
    times[-1] at the last. Only the window [t0, t1] is examined.
    """
    if t1 <= t0:
        bx, by = _eval_polyline(times, xs, ys, t0)
        return math.hypot(px0 - bx, py0 - by)
    best = math.inf
    span = t1 - t0
    # breakpoints: t0, interior waypoint times, t1
    cuts = [t0]
    for tk in times:
        if t0 < tk < t1:
            cuts.append(tk)
    cuts.append(t1)
    for i in range(len(cuts) - 1):
        ta = cuts[i]
        tb = cuts[i + 1]
        ua = (ta - t0) / span
        ub = (tb - t0) / span
        pax = px0 + ua * (px1 - px0)
        pay = py0 + ua * (py1 - py0)
        pbx = px0 + ub * (px1 - px0)
        pby = py0 + ub * (py1 - py0)
        qax, qay = _eval_polyline(times, xs, ys, ta)
        qbx, qby = _eval_polyline(times, xs, ys, tb)
        d = moving_points_min_separation(pax, pay, pbx, pby, qax, qay, qbx, qby)
        if d < best:
            best = d
    return best


def _eval_polyline(times, xs, ys, t):
    n = len(times)
    if t <= times[0]:
        return xs[0], ys[0]
    if t >= times[n - 1]:
        return xs[n - 1], ys[n - 1]
    lo = 0
    hi = n - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if times[mid] <= t:
            lo = mid
        else:
            hi = mid
    dt = times[hi] - times[lo]
    if dt <= 0.0:
        return xs[hi], ys[hi]
    u = (t - times[lo]) / dt
    return xs[lo] + u * (xs[hi] - xs[lo]), ys[lo] + u * (ys[hi] - ys[lo])


def polyline_eval(times, xs, ys, t):
    """Position on the waypoint path at time t (clamped at both ends)."""
    return _eval_polyline(times, xs, ys, t)
