"""Independent reference implementations used only by the tests.

Each oracle takes a different route from the package code: plain heapq
Dijkstra instead of A*, brute-force nearest-cell search instead of the
separable distance transform, QR-based covariance instead of the normal
matrix inverse, and shapely geometry instead of the prism kernels.
"""

from __future__ import annotations

import heapq
import itertools
import math

import numpy as np
from shapely.geometry import LineString, Point, Polygon


def grid_edges(occ: np.ndarray):
    """Yield ``(u, v, step_cells)`` for every 8-connected edge between free cells."""
    n_rows, n_cols = occ.shape
    for r in range(n_rows):
        for c in range(n_cols):
            if occ[r, c]:
                continue
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    if dr == dc == 0:
                        continue
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < n_rows and 0 <= cc < n_cols and not occ[rr, cc]:
                        yield r * n_cols + c, rr * n_cols + cc, math.hypot(dr, dc)


def dijkstra(occ: np.ndarray, cellcost: np.ndarray, res: float, w0: float, source: int,
             reverse: bool = False) -> np.ndarray:
    """Shortest-path costs from ``source`` (or, with ``reverse``, to ``source``).

    Edge ``u -> v`` costs ``w0 * res * |step| + cellcost[v]``.
    """
    n = occ.size
    cc = cellcost.ravel()
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for u, v, step in grid_edges(occ):
        c = w0 * res * step + cc[v]
        if reverse:
            adj[v].append((u, c))
        else:
            adj[u].append((v, c))
    dist = np.full(n, np.inf)
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, c in adj[u]:
            nd = d + c
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def brute_distance(occ: np.ndarray, res: float) -> np.ndarray:
    """Center-to-center distance to the nearest occupied cell, by exhaustion."""
    occ_rc = np.argwhere(occ > 0)
    rows, cols = np.indices(occ.shape)
    if occ_rc.size == 0:
        return np.full(occ.shape, np.inf)
    best = np.full(occ.shape, np.inf)
    for r, c in occ_rc:
        best = np.minimum(best, np.hypot(rows - r, cols - c))
    return best * res


def gdop_qr(receiver, sats) -> float:
    """GDOP from the covariance ``(R^T R)^-1`` of a QR factorization of G."""
    rows = []
    for s in sats:
        d = [receiver[i] - s[i] for i in range(3)]
        rng = math.sqrt(sum(x * x for x in d))
        rows.append([d[0] / rng, d[1] / rng, d[2] / rng, -1.0])
    _, r = np.linalg.qr(np.array(rows))
    rinv = np.linalg.solve(r, np.eye(4))
    cov = rinv @ rinv.T
    return math.sqrt(np.trace(cov))


def segment_hits_prism(origin, target, ring, height) -> bool:
    """Clip the segment to the prism's z-slab, then intersect its ground
    projection with the footprint."""
    o = np.asarray(origin, float)
    t = np.asarray(target, float)
    d = t - o
    if d[2] == 0:
        if not (0 <= o[2] <= height):
            return False
        a, b = 0.0, 1.0
    else:
        t1, t2 = (0 - o[2]) / d[2], (height - o[2]) / d[2]
        a, b = max(0.0, min(t1, t2)), min(1.0, max(t1, t2))
        if a >= b:
            return False
    p, q = o + a * d, o + b * d
    poly = Polygon(ring)
    if np.allclose(p[:2], q[:2]):
        return poly.intersects(Point(p[:2]))
    return poly.intersects(LineString([p[:2], q[:2]]))


def enumerate_path_costs(layer: np.ndarray, res: float, w0: float, wk: float, start, goal) -> float:
    """Cheapest simple 8-connected path from ``start`` to ``goal`` (cells as
    ``(idx, idy)``) by exhaustive depth-first enumeration. Small grids only."""
    n_rows, n_cols = layer.shape
    best = math.inf
    goal = tuple(goal)

    def dfs(cell, seen, cost):
        nonlocal best
        if cost >= best:
            return
        if cell == goal:
            best = cost
            return
        x, y = cell
        for dx, dy in itertools.product((-1, 0, 1), repeat=2):
            if dx == dy == 0:
                continue
            nx, ny = x + dx, y + dy
            if 0 <= nx < n_cols and 0 <= ny < n_rows and (nx, ny) not in seen:
                seen.add((nx, ny))
                dfs((nx, ny), seen, cost + w0 * res * math.hypot(dx, dy) + wk * layer[ny, nx])
                seen.discard((nx, ny))

    dfs(tuple(start), {tuple(start)}, 0.0)
    return best


def minmax_two_pass(values: np.ndarray) -> np.ndarray:
    lo = math.inf
    hi = -math.inf
    for v in values.ravel():
        lo = min(lo, float(v))
        hi = max(hi, float(v))
    out = np.zeros(values.shape)
    if hi > lo:
        for i, v in enumerate(values.ravel()):
            out.ravel()[i] = (float(v) - lo) / (hi - lo)
    return out
