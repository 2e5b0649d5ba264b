"""Roadmap construction over a workspace and the valid-infrastructure check.

The roadmap is an 8-connected grid at the requested cell size, augmented
with extra near-wall vertices so that narrow passages the base grid misses
stay traversable, plus the endpoints themselves. Every edge keeps at least
rbar clearance to the static obstacles. Each edge carries a blocking set:
the endpoints whose 2*rbar disc the edge penetrates; a path qualifies for
endpoint pair (a, b) iff every edge's blocking set is a subset of {a, b}.
"""

import heapq
import json
import math
from dataclasses import dataclass, field

from .geometry import (EPS_GEOM, Point, PolygonRegion, dist, point_clearance,
                       segment_clearance, segment_disc_min_distance)


class EndpointDisconnected(Exception):
    """An endpoint could not be connected to the roadmap."""


class InvalidInfrastructure(Exception):
    """Some endpoint pair has no qualifying path."""


@dataclass(frozen=True)
class Infrastructure:
    workspace: PolygonRegion
    endpoints: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "endpoints",
                           tuple(tuple(p) for p in self.endpoints))
        seen = set()
        for e in self.endpoints:
            if e in seen:
                raise ValueError(f"duplicate endpoint {e}")
            seen.add(e)


@dataclass
class Roadmap:
    vertices: list
    edges: list            # (i, j) with i < j
    lengths: list
    blocking: list         # frozenset of endpoint indices per edge
    endpoint_vertices: list  # vertex index per endpoint
    cell: float
    rbar: float
    adjacency: list = field(default=None)

    def __post_init__(self):
        if self.adjacency is None:
            adj = [[] for _ in self.vertices]
            for eidx, (i, j) in enumerate(self.edges):
                adj[i].append((j, eidx))
                adj[j].append((i, eidx))
            for lst in adj:
                lst.sort()
            self.adjacency = adj

    def neighbors(self, v: int):
        return self.adjacency[v]

    def vertex_at(self, p: Point, tol: float = 1e-6) -> int:
        for i, q in enumerate(self.vertices):
            if abs(q[0] - p[0]) <= tol and abs(q[1] - p[1]) <= tol:
                return i
        raise KeyError(f"no roadmap vertex at {p}")


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    failing_pairs: tuple
    rbar: float
    resolution: float


def _climb_to_clearance_peak(p: Point, ws: PolygonRegion, cell: float) -> Point:
    """Hill-climb p toward a local clearance maximum (approximate medial
    axis), with total displacement capped at cell/2."""
    x, y = p
    best = point_clearance((x, y), ws)
    cap = 0.5 * cell
    for step in (cell / 4, cell / 8, cell / 16, cell / 32, cell / 64):
        improved = True
        while improved:
            improved = False
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1),
                           (1, 1), (1, -1), (-1, 1), (-1, -1)):
                nx = x + dx * step
                ny = y + dy * step
                if math.hypot(nx - p[0], ny - p[1]) > cap:
                    continue
                c = point_clearance((nx, ny), ws)
                if c > best + 1e-12:
                    x, y, best = nx, ny, c
                    improved = True
    return (x, y)


def build_grid_roadmap(ws: PolygonRegion, cell: float, rbar: float,
                       endpoints) -> Roadmap:
    """Build the clearance-checked 8-connected grid roadmap with near-wall
    augmentation and snapped-in endpoints.

    Raises EndpointDisconnected if an endpoint gets no usable edge. The
    result is restricted to the connected components containing endpoints.
    """
    if cell <= 0:
        raise ValueError("cell must be positive")
    endpoints = [tuple(p) for p in endpoints]
    for e in endpoints:
        if point_clearance(e, ws) < rbar - EPS_GEOM:
            raise ValueError(f"endpoint {e} lacks {rbar} m clearance")

    minx, miny, maxx, maxy = ws.bounds()
    nx = int(math.floor((maxx - minx) / cell)) + 1
    ny = int(math.floor((maxy - miny) / cell)) + 1

    vertices = []
    grid_index = {}
    for iy in range(ny):
        for ix in range(nx):
            p = (minx + ix * cell, miny + iy * cell)
            if point_clearance(p, ws) >= rbar - EPS_GEOM:
                grid_index[(ix, iy)] = len(vertices)
                vertices.append(p)

    edges = []

    def try_edge(i: int, j: int):
        if i == j:
            return
        a, b = (i, j) if i < j else (j, i)
        if segment_clearance(vertices[a], vertices[b], ws) >= rbar - EPS_GEOM:
            edges.append((a, b))

    for (ix, iy), i in grid_index.items():
        for dx, dy in ((1, 0), (0, 1), (1, 1), (1, -1)):
            j = grid_index.get((ix + dx, iy + dy))
            if j is not None:
                try_edge(i, j)

    # near-wall augmentation: candidate fine-grid points in nearly-feasible
    # bands not already covered by a grid vertex, climbed to the local
    # clearance peak (narrow-passage centerline)
    n_grid = len(vertices)
    fine = cell / 4
    aug = []
    fnx = int(math.floor((maxx - minx) / fine)) + 1
    fny = int(math.floor((maxy - miny) / fine)) + 1
    for iy in range(fny):
        for ix in range(fnx):
            p = (minx + ix * fine, miny + iy * fine)
            c = point_clearance(p, ws)
            if c < rbar - cell / 4 or c >= rbar + cell / 2:
                continue
            if any(dist(p, vertices[k]) < 0.7 * cell for k in range(n_grid)):
                continue
            if c >= rbar - EPS_GEOM:
                aug.append(p)
            else:
                q = _climb_to_clearance_peak(p, ws, cell)
                if point_clearance(q, ws) >= rbar - EPS_GEOM:
                    aug.append(q)
    aug.sort()
    for q in aug:
        if any(dist(q, v) < cell / 3 for v in vertices):
            continue
        k = len(vertices)
        vertices.append(q)
        for j in range(k):
            if dist(q, vertices[j]) <= 1.2 * cell:
                try_edge(k, j)

    # snap endpoints in as vertices
    endpoint_vertices = []
    for e in endpoints:
        idx = None
        for k, v in enumerate(vertices):
            if dist(e, v) <= 1e-9:
                idx = k
                vertices[k] = e  # adopt the endpoint's exact coordinates
                break
        if idx is None:
            idx = len(vertices)
            vertices.append(e)
            for j in range(idx):
                if dist(e, vertices[j]) <= 1.5 * cell:
                    try_edge(idx, j)
        endpoint_vertices.append(idx)

    # restrict to components containing endpoints
    adj = [[] for _ in vertices]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    keep = set()
    stack = list(endpoint_vertices)
    while stack:
        v = stack.pop()
        if v in keep:
            continue
        keep.add(v)
        stack.extend(adj[v])
    for ei, vi in zip(endpoints, endpoint_vertices):
        if not adj[vi]:
            raise EndpointDisconnected(f"endpoint {ei} is isolated")

    remap = {}
    new_vertices = []
    for old in sorted(keep):
        remap[old] = len(new_vertices)
        new_vertices.append(vertices[old])
    new_edges = sorted(
        (remap[i], remap[j]) for i, j in set(edges)
        if i in keep and j in keep)
    lengths = [dist(new_vertices[i], new_vertices[j]) for i, j in new_edges]
    blocking = []
    for (i, j) in new_edges:
        blk = frozenset(
            k for k, e in enumerate(endpoints)
            if segment_disc_min_distance(new_vertices[i], new_vertices[j],
                                         e, 2 * rbar) < 0)
        blocking.append(blk)
    return Roadmap(vertices=new_vertices, edges=new_edges, lengths=lengths,
                   blocking=blocking,
                   endpoint_vertices=[remap[v] for v in endpoint_vertices],
                   cell=cell, rbar=rbar)


def static_shortest_path(rm: Roadmap, src: int, dst: int,
                         forbidden_endpoint_discs=frozenset()):
    """Minimum-length path over edges whose blocking set avoids the given
    endpoint discs. Returns (vertex list, length) or None when disconnected
    under the restriction. src == dst yields ([src], 0.0)."""
    forbidden = frozenset(forbidden_endpoint_discs)
    n = len(rm.vertices)
    distv = [math.inf] * n
    parent = [-1] * n
    distv[src] = 0.0
    heap = [(0.0, src)]
    while heap:
        d, v = heapq.heappop(heap)
        if d > distv[v] + EPS_GEOM:
            continue
        if v == dst:
            break
        for w, eidx in rm.neighbors(v):
            if rm.blocking[eidx] & forbidden:
                continue
            nd = d + rm.lengths[eidx]
            if nd < distv[w] - EPS_GEOM:
                distv[w] = nd
                parent[w] = v
                heapq.heappush(heap, (nd, w))
    if math.isinf(distv[dst]):
        return None
    path = [dst]
    while path[-1] != src:
        path.append(parent[path[-1]])
    path.reverse()
    return path, distv[dst]


def _pair_connected(rm: Roadmap, a: int, b: int) -> bool:
    allowed = {a, b}
    src = rm.endpoint_vertices[a]
    dst = rm.endpoint_vertices[b]
    seen = {src}
    stack = [src]
    while stack:
        v = stack.pop()
        if v == dst:
            return True
        for w, eidx in rm.neighbors(v):
            if w not in seen and rm.blocking[eidx] <= allowed:
                seen.add(w)
                stack.append(w)
    return False


def check_valid_roadmap(rm: Roadmap, infra: Infrastructure,
                        rbar: float) -> ValidityReport:
    """Decide the valid-infrastructure property on the roadmap: every
    endpoint pair must be connected by edges whose blocking set is within
    the pair itself."""
    failing = []
    n = len(infra.endpoints)
    for a in range(n):
        for b in range(a + 1, n):
            if not _pair_connected(rm, a, b):
                failing.append((a, b))
    return ValidityReport(valid=not failing, failing_pairs=tuple(failing),
                          rbar=rbar, resolution=rm.cell)


def compute_r_bound(rm: Roadmap, infra: Infrastructure, vmin: float) -> float:
    """Duration bound of the longest individually-optimal relocation: max
    over endpoint pairs of the endpoint-avoiding shortest-path length
    divided by the slowest maximum speed."""
    if vmin <= 0:
        raise ValueError("vmin must be positive")
    n = len(infra.endpoints)
    worst = 0.0
    for a in range(n):
        for b in range(a + 1, n):
            forbidden = frozenset(range(n)) - {a, b}
            res = static_shortest_path(rm, rm.endpoint_vertices[a],
                                       rm.endpoint_vertices[b], forbidden)
            if res is None:
                raise InvalidInfrastructure(
                    f"endpoints {a} and {b} unreachable")
            worst = max(worst, res[1])
    return worst / vmin


def load_map(obj) -> tuple[Infrastructure, dict]:
    """Load the scenario map schema; returns the infrastructure and the raw
    document (which may carry extra keys such as cell or robot_radius)."""
    if isinstance(obj, (str, bytes)):
        with open(obj) as f:
            obj = json.load(f)
    ws = PolygonRegion(
        outer=tuple(tuple(p) for p in obj["workspace"]["outer"]),
        holes=tuple(tuple(tuple(p) for p in h)
                    for h in obj["workspace"].get("holes", [])))
    infra = Infrastructure(workspace=ws,
                           endpoints=tuple(tuple(p) for p in obj["endpoints"]),
                           name=obj.get("name", ""))
    return infra, obj


def map_to_json(infra: Infrastructure, rm: Roadmap = None, **extra) -> dict:
    doc = {
        "name": infra.name,
        "units": "meters",
        "workspace": {
            "outer": [list(p) for p in infra.workspace.outer],
            "holes": [[list(p) for p in h] for h in infra.workspace.holes],
        },
        "endpoints": [list(p) for p in infra.endpoints],
    }
    doc.update(extra)
    if rm is not None:
        doc["roadmap"] = {
            "vertices": [list(p) for p in rm.vertices],
            "edges": [list(e) for e in rm.edges],
        }
    return doc
