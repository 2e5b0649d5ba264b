# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled distance kernels.

Cython twin of fleetplan._kernels_py; keep the two in sync.
"""

from libc.math cimport hypot, INFINITY

BACKEND = "cython"


cdef inline double _pt_seg(double px, double py, double ax, double ay,
                           double bx, double by) nogil:
    cdef double dx = bx - ax
    cdef double dy = by - ay
    cdef double den = dx * dx + dy * dy
    cdef double t
    if den <= 0.0:
        return hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / den
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return hypot(px - (ax + t * dx), py - (ay + t * dy))


def point_segment_distance(double px, double py, double ax, double ay,
                           double bx, double by):
    """Distance from point (px,py) to segment (ax,ay)-(bx,by)."""
    return _pt_seg(px, py, ax, ay, bx, by)


cdef inline bint _properly_cross(double ax, double ay, double bx, double by,
                                 double cx, double cy, double dx, double dy) nogil:
    cdef double d1 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    cdef double d2 = (bx - ax) * (dy - ay) - (by - ay) * (dx - ax)
    cdef double d3 = (dx - cx) * (ay - cy) - (dy - cy) * (ax - cx)
    cdef double d4 = (dx - cx) * (by - cy) - (dy - cy) * (bx - cx)
    return ((d1 > 0.0) != (d2 > 0.0)) and ((d3 > 0.0) != (d4 > 0.0)) and \
        d1 != 0.0 and d2 != 0.0 and d3 != 0.0 and d4 != 0.0


def segment_segment_distance(double ax, double ay, double bx, double by,
                             double cx, double cy, double dx, double dy):
    """Minimum distance between segments a-b and c-d (0 when they cross)."""
    cdef double d, e
    if _properly_cross(ax, ay, bx, by, cx, cy, dx, dy):
        return 0.0
    d = _pt_seg(ax, ay, cx, cy, dx, dy)
    e = _pt_seg(bx, by, cx, cy, dx, dy)
    if e < d:
        d = e
    e = _pt_seg(cx, cy, ax, ay, bx, by)
    if e < d:
        d = e
    e = _pt_seg(dx, dy, ax, ay, bx, by)
    if e < d:
        d = e
    return d


def moving_points_min_separation(double ax0, double ay0, double ax1, double ay1,
                                 double bx0, double by0, double bx1, double by1):
    """Closest approach of two points moving linearly over a shared interval.

    Both motions are parameterized over t in [0,1]; returns
    min_t |a(t) - b(t)|, from the closed-form minimization of the quadratic
    |a(t)-b(t)|^2 clamped to [0,1] (equivalently: distance from the origin to
    the segment swept by the relative position).
    """
    return _pt_seg(0.0, 0.0, ax0 - bx0, ay0 - by0, ax1 - bx1, ay1 - by1)


cdef inline void _eval_poly(double[:] times, double[:] xs, double[:] ys,
                            double t, double* ox, double* oy) nogil:
    cdef Py_ssize_t n = times.shape[0]
    cdef Py_ssize_t lo, hi, mid
    cdef double dt, u
    if t <= times[0]:
        ox[0] = xs[0]
        oy[0] = ys[0]
        return
    if t >= times[n - 1]:
        ox[0] = xs[n - 1]
        oy[0] = ys[n - 1]
        return
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
        ox[0] = xs[hi]
        oy[0] = ys[hi]
        return
    u = (t - times[lo]) / dt
    ox[0] = xs[lo] + u * (xs[hi] - xs[lo])
    oy[0] = ys[lo] + u * (ys[hi] - ys[lo])


def polyline_eval(double[:] times, double[:] xs, double[:] ys, double t):
    """Position on the waypoint path at time t (clamped at both ends)."""
    cdef double ox = 0.0, oy = 0.0
    _eval_poly(times, xs, ys, t, &ox, &oy)
    return ox, oy


def min_separation_linear_vs_polyline(double px0, double py0, double px1,
                                      double py1, double t0, double t1,
                                      double[:] times, double[:] xs,
                                      double[:] ys):
    """Closest approach between a linearly moving point and a waypoint path.

    The probe point moves from (px0,py0) at time t0 to (px1,py1) at time t1.
    The other body follows the piecewise-linear path given by parallel arrays
    (times, xs, ys); before times[0] it sits at the first waypoint, after
    times[-1] at the last. Only the window [t0, t1] is examined.
    """
    cdef double best = INFINITY
    cdef double span, ta, tb, ua, ub
    cdef double pax, pay, pbx, pby
    cdef double qax = 0.0, qay = 0.0, qbx = 0.0, qby = 0.0
    cdef double d
    cdef Py_ssize_t n = times.shape[0]
    cdef Py_ssize_t k
    if t1 <= t0:
        _eval_poly(times, xs, ys, t0, &qax, &qay)
        return hypot(px0 - qax, py0 - qay)
    span = t1 - t0
    ta = t0
    _eval_poly(times, xs, ys, ta, &qax, &qay)
    k = 0
    while True:
        # next breakpoint: first waypoint time in (ta, t1), else t1
        tb = t1
        while k < n:
            if times[k] > ta:
                if times[k] < t1:
                    tb = times[k]
                k += 1
                break
            k += 1
        ua = (ta - t0) / span
        ub = (tb - t0) / span
        pax = px0 + ua * (px1 - px0)
        pay = py0 + ua * (py1 - py0)
        pbx = px0 + ub * (px1 - px0)
        pby = py0 + ub * (py1 - py0)
        _eval_poly(times, xs, ys, tb, &qbx, &qby)
        d = _pt_seg(0.0, 0.0, pax - qax, pay - qay, pbx - qbx, pby - qby)
        if d < best:
            best = d
        if tb >= t1:
            break
        ta = tb
        qax = qbx
        qay = qby
    return best
