"""Pure-Python / numpy implementations of the hot kernels.

Every function here has a twin in ``_ckernels.pyx`` with the same signature
and the same floating-point operation order, so both backends produce
identical results on the grid kernels (tracing, A*, distance transform).
"""

import heapq
import math
import time

import numpy as np

from ..errors import BoundsError

BACKEND = "python"

SQRT2 = math.sqrt(2.0)
_EDT_INF = 1e20

# (d_row, d_col) in a fixed order shared with the compiled kernel
NEIGHBORS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))

STATUS_SOLVED = 0
STATUS_NO_PATH = 1
STATUS_TIMEOUT = 2


# ---------------------------------------------------------------------------
# segment tracing


def trace_cells(ax, ay, bx, by, x0, y0, res, n_cols, n_rows):
    """Flat indices of the cells sampled at ``res`` steps from a to b.

    The last sample sits exactly on b; consecutive duplicates are dropped.
    """
    dx = bx - ax
    dy = by - ay
    lam = math.sqrt(dx * dx + dy * dy)
    steps = int(math.ceil(lam / res))
    ux = dx / lam if lam > 0.0 else 0.0
    uy = dy / lam if lam > 0.0 else 0.0
    out = []
    last = -1
    for step in range(steps + 1):
        if step == steps:
            px, py = bx, by
        else:
            px = ax + (step * res) * ux
            py = ay + (step * res) * uy
        ix = math.floor((px - x0) / res)
        iy = math.floor((py - y0) / res)
        if ix < 0 or ix >= n_cols or iy < 0 or iy >= n_rows:
            raise BoundsError(f"segment sample ({px}, {py}) leaves the grid")
        flat = iy * n_cols + ix
        if flat != last:
            out.append(flat)
            last = flat
    return np.array(out, dtype=np.int64)


def segment_cost(ax, ay, bx, by, x0, y0, res, n_cols, n_rows, occ, cost):
    """Return ``(blocked, layer_cost)`` for the straight segment a -> b.

    ``layer_cost`` sums ``cost`` over traced cells after the first one.
    ``blocked`` is True if any traced cell (the first included) is occupied.
    """
    dx = bx - ax
    dy = by - ay
    lam = math.sqrt(dx * dx + dy * dy)
    steps = int(math.ceil(lam / res))
    ux = dx / lam if lam > 0.0 else 0.0
    uy = dy / lam if lam > 0.0 else 0.0
    total = 0.0
    last = -1
    for step in range(steps + 1):
        if step == steps:
            px, py = bx, by
        else:
            px = ax + (step * res) * ux
            py = ay + (step * res) * uy
        ix = math.floor((px - x0) / res)
        iy = math.floor((py - y0) / res)
        if ix < 0 or ix >= n_cols or iy < 0 or iy >= n_rows:
            raise BoundsError(f"segment sample ({px}, {py}) leaves the grid")
        flat = iy * n_cols + ix
        if flat != last:
            if occ[flat]:
                return True, math.inf
            if last >= 0:
                total += cost[flat]
            last = flat
    return False, total


# ---------------------------------------------------------------------------
# exact Euclidean distance transform (Felzenszwalb & Huttenlocher)


def _envelope_1d(f, n, v, z, d):
    k = 0
    v[0] = 0
    z[0] = -math.inf
    z[1] = math.inf
    for q in range(1, n):
        fq = f[q] + q * q
        s = (fq - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]))
        while s <= z[k]:
            k -= 1
            s = (fq - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]))
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = math.inf
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        dq = q - v[k]
        d[q] = dq * dq + f[v[k]]


def edt_sq(occ):
    """Squared distance (in cells) from each cell to the nearest occupied cell.

    Returns ``inf`` everywhere when nothing is occupied.
    """
    occ = np.asarray(occ, dtype=np.uint8)
    n_rows, n_cols = occ.shape
    # column pass: 1-D distance along rows via forward/backward sweeps
    col = np.full((n_rows, n_cols), _EDT_INF)
    run = np.full(n_cols, _EDT_INF)
    for r in range(n_rows):
        run = np.where(occ[r] != 0, 0.0, run + 1.0)
        col[r] = run
    run = np.full(n_cols, _EDT_INF)
    for r in range(n_rows - 1, -1, -1):
        run = np.where(occ[r] != 0, 0.0, run + 1.0)
        col[r] = np.minimum(col[r], run)
    f_all = np.where(col >= _EDT_INF / 2, _EDT_INF, col * col)

    out = np.empty((n_rows, n_cols))
    v = [0] * n_cols
    z = [0.0] * (n_cols + 1)
    d = [0.0] * n_cols
    for r in range(n_rows):
        f = f_all[r].tolist()
        _envelope_1d(f, n_cols, v, z, d)
        out[r] = d
    out[out >= _EDT_INF / 2] = math.inf
    return out


# ---------------------------------------------------------------------------
# 8-connected A* over a cost grid


def astar(occ, cellcost, h, n_rows, n_cols, start, goal, res, w0, deadline):
    """A* on the 8-connected grid.

    Edge cost is ``w0 * step_length + cellcost[dest]``. Ties break on
    ``(f, h, flat index)``. Closed nodes are reopened when a cheaper route
    appears, so any admissible ``h`` yields an optimal path.

    Returns ``(status, path, expanded)`` with ``path`` a flat-index array.
    """
    t_end = time.perf_counter() + deadline
    n = n_rows * n_cols
    g = [math.inf] * n
    parent = [-1] * n
    closed = bytearray(n)
    orth = w0 * res
    diag = w0 * (res * SQRT2)
    g[start] = 0.0
    heap = [(h[start], h[start], start)]
    expanded = 0
    while heap:
        f, hu, u = heapq.heappop(heap)
        if closed[u] or f > g[u] + h[u]:
            continue
        closed[u] = 1
        expanded += 1
        if u == goal:
            path = [u]
            while parent[path[-1]] >= 0:
                path.append(parent[path[-1]])
            path.reverse()
            return STATUS_SOLVED, np.array(path, dtype=np.int64), expanded
        if (expanded & 1023) == 0 and time.perf_counter() > t_end:
            return STATUS_TIMEOUT, np.empty(0, dtype=np.int64), expanded
        ur, uc = divmod(u, n_cols)
        gu = g[u]
        for dr, dc in NEIGHBORS:
            vr = ur + dr
            vc = uc + dc
            if vr < 0 or vr >= n_rows or vc < 0 or vc >= n_cols:
                continue
            v = vr * n_cols + vc
            if occ[v]:
                continue
            step = diag if (dr != 0 and dc != 0) else orth
            ng = (gu + step) + cellcost[v]
            if ng < g[v]:
                g[v] = ng
                parent[v] = u
                closed[v] = 0
                heapq.heappush(heap, (ng + h[v], h[v], v))
    return STATUS_NO_PATH, np.empty(0, dtype=np.int64), expanded


# ---------------------------------------------------------------------------
# segment / extruded-prism intersection


def _prism_pass(ox, oy, oz, dx, dy, dz, p, prisms, hit):
    """Update ``hit`` in place for rays that meet prism ``p``."""
    offsets, vx, vy, heights, bounds = prisms
    h = heights[p]
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (0.0 - oz) / dz
        t2 = (h - oz) / dz
    flat = dz == 0.0
    inside_z = (oz >= 0.0) & (oz <= h)
    a = np.where(flat, np.where(inside_z, 0.0, 1.0), np.maximum(0.0, np.minimum(t1, t2)))
    b = np.where(flat, np.where(inside_z, 1.0, 0.0), np.minimum(1.0, np.maximum(t1, t2)))
    xa = ox + a * dx
    xb = ox + b * dx
    ya = oy + a * dy
    yb = oy + b * dy
    bx0, by0, bx1, by1 = bounds[p]
    cand = (
        ~hit
        & (a < b)
        & (np.maximum(xa, xb) >= bx0)
        & (np.minimum(xa, xb) <= bx1)
        & (np.maximum(ya, yb) >= by0)
        & (np.minimum(ya, yb) <= by1)
    )
    idx = np.nonzero(cand)[0]
    if idx.size == 0:
        return
    ox_, oy_, dx_, dy_, a_, b_ = ox[idx], oy[idx], dx[idx], dy[idx], a[idx], b[idx]
    lo, hi = offsets[p], offsets[p + 1]
    xs = vx[lo:hi]
    ys = vy[lo:hi]
    nv = hi - lo
    crossed = np.zeros(idx.size, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(nv):
            x1, y1 = xs[i], ys[i]
            x2, y2 = xs[(i + 1) % nv], ys[(i + 1) % nv]
            ex = x2 - x1
            ey = y2 - y1
            den = dx_ * ey - dy_ * ex
            wx = x1 - ox_
            wy = y1 - oy_
            t = (wx * ey - wy * ex) / den
            u = (wx * dy_ - wy * dx_) / den
            crossed |= (den != 0.0) & (u >= 0.0) & (u < 1.0) & (t > a_) & (t < b_)
    mt = 0.5 * (a_ + b_)
    px = ox_ + mt * dx_
    py = oy_ + mt * dy_
    inside = np.zeros(idx.size, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        j = nv - 1
        for i in range(nv):
            xi, yi, xj, yj = xs[i], ys[i], xs[j], ys[j]
            straddle = (yi > py) != (yj > py)
            xcross = (xj - xi) * (py - yi) / (yj - yi) + xi
            inside ^= straddle & (px < xcross)
            j = i
    hit[idx] = crossed | inside


def segments_hit(origins, targets, prisms):
    """For each row, whether the segment origin -> target meets any prism."""
    origins = np.ascontiguousarray(origins, dtype=np.float64)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    ox, oy, oz = origins[:, 0], origins[:, 1], origins[:, 2]
    d = targets - origins
    dx, dy, dz = d[:, 0], d[:, 1], d[:, 2]
    hit = np.zeros(origins.shape[0], dtype=bool)
    for p in range(len(prisms[3])):
        _prism_pass(ox, oy, oz, dx, dy, dz, p, prisms, hit)
    return hit.astype(np.uint8)


def lidar_returns(positions, beam_dirs, r, prisms):
    """Count, per position, the azimuths where any beam meets a prism.

    ``beam_dirs`` has shape ``(k, b, 3)`` of unit beam directions.
    """
    positions = np.ascontiguousarray(positions, dtype=np.float64)
    k, nb, _ = beam_dirs.shape
    out = np.zeros(positions.shape[0], dtype=np.int64)
    if len(prisms[3]) == 0:
        return out
    dirs = (beam_dirs * r).reshape(-1, 3)
    bounds = prisms[4]
    for m in range(positions.shape[0]):
        px, py, pz = positions[m]
        near = (
            (bounds[:, 0] - r <= px)
            & (bounds[:, 2] + r >= px)
            & (bounds[:, 1] - r <= py)
            & (bounds[:, 3] + r >= py)
        )
        sel = np.nonzero(near)[0]
        if sel.size == 0:
            continue
        o = np.broadcast_to(positions[m], dirs.shape)
        ox, oy, oz = o[:, 0], o[:, 1], o[:, 2]
        hit = np.zeros(dirs.shape[0], dtype=bool)
        for p in sel:
            _prism_pass(ox, oy, oz, dirs[:, 0], dirs[:, 1], dirs[:, 2], p, prisms, hit)
        out[m] = int(hit.reshape(k, nb).any(axis=1).sum())
    return out
