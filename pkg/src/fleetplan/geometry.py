"""2-D primitives: polygon regions with holes, clearances, moving-disc
closest approach.

Points are plain (x, y) tuples in meters. All comparisons use EPS_GEOM;
exactly-touching configurations count as in collision (conservative).
"""

import math
from dataclasses import dataclass, field

from . import kernels

EPS_GEOM = 1e-9

Point = tuple[float, float]


def dist(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _ring_area2(ring) -> float:
    s = 0.0
    n = len(ring)
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        s += x1 * y2 - x2 * y1
    return s


def _point_in_ring(p: Point, ring) -> bool:
    # even-odd ray cast; points exactly on the boundary may land either way,
    # callers must not rely on the sign at zero clearance
    x, y = p
    inside = False
    n = len(ring)
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xi:
                inside = not inside
    return inside


@dataclass(frozen=True)
class PolygonRegion:
    """Free region bounded by an outer ring (CCW) minus hole rings (CW).

    Rings are sequences of (x, y) vertices without a repeated closing vertex.
    """

    outer: tuple
    holes: tuple = ()
    _segments: list = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        outer = tuple(tuple(p) for p in self.outer)
        holes = tuple(tuple(tuple(p) for p in h) for h in self.holes)
        if _ring_area2(outer) < 0:
            outer = outer[::-1]
        holes = tuple(h if _ring_area2(h) < 0 else h[::-1] for h in holes)
        object.__setattr__(self, "outer", outer)
        object.__setattr__(self, "holes", holes)
        segs = []
        for ring in (outer, *holes):
            n = len(ring)
            for i in range(n):
                segs.append((ring[i], ring[(i + 1) % n]))
        object.__setattr__(self, "_segments", segs)

    def boundary_segments(self):
        return self._segments

    def contains(self, p: Point) -> bool:
        if not _point_in_ring(p, self.outer):
            return False
        for hole in self.holes:
            if _point_in_ring(p, hole):
                return False
        return True

    def bounds(self):
        xs = [p[0] for p in self.outer]
        ys = [p[1] for p in self.outer]
        return min(xs), min(ys), max(xs), max(ys)


def point_clearance(p: Point, region: PolygonRegion) -> float:
    """Signed distance from p to the free-region boundary.

    Positive inside the free region, negative outside; point_clearance >= r
    iff the closed disc D(p, r) fits inside the region.
    """
    px, py = p
    d = math.inf
    for (ax, ay), (bx, by) in region.boundary_segments():
        e = kernels.point_segment_distance(px, py, ax, ay, bx, by)
        if e < d:
            d = e
    return d if region.contains(p) else -d


def segment_clearance(a: Point, b: Point, region: PolygonRegion) -> float:
    """Minimum of point_clearance over segment a-b.

    Exact when the segment lies inside the free region. When the segment
    leaves the region the returned value is non-positive (0 if it merely
    touches or crosses the boundary with both endpoints inside, otherwise
    the worse endpoint clearance); the sign and the >= r predicate are
    always correct.
    """
    if a == b:
        return point_clearance(a, region)
    ca = point_clearance(a, region)
    cb = point_clearance(b, region)
    if ca < 0.0 or cb < 0.0:
        return min(ca, cb)
    ax, ay = a
    bx, by = b
    d = math.inf
    for (cx, cy), (dx, dy) in region.boundary_segments():
        e = kernels.segment_segment_distance(ax, ay, bx, by, cx, cy, dx, dy)
        if e < d:
            d = e
    return min(ca, cb, d)


def segment_disc_min_distance(a: Point, b: Point, center: Point,
                              radius: float) -> float:
    """min over p in segment a-b of |p - center| - radius.

    Negative means the segment penetrates the disc.
    """
    return kernels.point_segment_distance(center[0], center[1],
                                          a[0], a[1], b[0], b[1]) - radius


def moving_discs_min_separation(a_start: Point, a_end: Point,
                                b_start: Point, b_end: Point) -> float:
    """Closest center approach of two bodies moving linearly over the same
    unit time interval."""
    return kernels.moving_points_min_separation(
        a_start[0], a_start[1], a_end[0], a_end[1],
        b_start[0], b_start[1], b_end[0], b_end[1])


def rect_region(x0: float, y0: float, x1: float, y1: float,
                holes=()) -> PolygonRegion:
    """Axis-aligned rectangular free region, optionally with rectangular
    holes given as (x0, y0, x1, y1) tuples."""
    hole_rings = tuple(
        ((hx0, hy0), (hx1, hy0), (hx1, hy1), (hx0, hy1))
        for hx0, hy0, hx1, hy1 in holes)
    return PolygonRegion(
        outer=((x0, y0), (x1, y0), (x1, y1), (x0, y1)),
        holes=hole_rings)
