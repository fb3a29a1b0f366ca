# cython: language_level=3
"""Compiled twins of the kernels in ``_pykernels``.

Signatures and floating-point operation order match the pure-Python
versions; see that module for the contracts.
"""

import time

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, ceil, floor, INFINITY
from libcpp.queue cimport priority_queue
from libcpp.pair cimport pair
from libcpp.vector cimport vector

from ..errors import BoundsError

cnp.import_array()

BACKEND = "cython"

cdef double SQRT2 = sqrt(2.0)
cdef double EDT_INF = 1e20

STATUS_SOLVED = 0
STATUS_NO_PATH = 1
STATUS_TIMEOUT = 2

cdef int[8] NB_DR = [-1, -1, -1, 0, 0, 1, 1, 1]
cdef int[8] NB_DC = [-1, 0, 1, -1, 1, -1, 0, 1]


# ---------------------------------------------------------------------------
# segment tracing

def trace_cells(double ax, double ay, double bx, double by, double x0, double y0,
                double res, long n_cols, long n_rows):
    cdef double dx = bx - ax
    cdef double dy = by - ay
    cdef double lam = sqrt(dx * dx + dy * dy)
    cdef long steps = <long>ceil(lam / res)
    cdef double ux = dx / lam if lam > 0.0 else 0.0
    cdef double uy = dy / lam if lam > 0.0 else 0.0
    cdef vector[long] out
    cdef long last = -1, step, ix, iy, flat
    cdef double px, py
    for step in range(steps + 1):
        if step == steps:
            px = bx
            py = by
        else:
            px = ax + (step * res) * ux
            py = ay + (step * res) * uy
        ix = <long>floor((px - x0) / res)
        iy = <long>floor((py - y0) / res)
        if ix < 0 or ix >= n_cols or iy < 0 or iy >= n_rows:
            raise BoundsError(f"segment sample ({px}, {py}) leaves the grid")
        flat = iy * n_cols + ix
        if flat != last:
            out.push_back(flat)
            last = flat
    arr = np.empty(out.size(), dtype=np.int64)
    cdef cnp.int64_t[::1] view = arr
    cdef size_t i
    for i in range(out.size()):
        view[i] = out[i]
    return arr


def segment_cost(double ax, double ay, double bx, double by, double x0, double y0,
                 double res, long n_cols, long n_rows,
                 const cnp.uint8_t[::1] occ, const double[::1] cost):
    cdef double dx = bx - ax
    cdef double dy = by - ay
    cdef double lam = sqrt(dx * dx + dy * dy)
    cdef long steps = <long>ceil(lam / res)
    cdef double ux = dx / lam if lam > 0.0 else 0.0
    cdef double uy = dy / lam if lam > 0.0 else 0.0
    cdef double total = 0.0
    cdef long last = -1, step, ix, iy, flat
    cdef double px, py
    for step in range(steps + 1):
        if step == steps:
            px = bx
            py = by
        else:
            px = ax + (step * res) * ux
            py = ay + (step * res) * uy
        ix = <long>floor((px - x0) / res)
        iy = <long>floor((py - y0) / res)
        if ix < 0 or ix >= n_cols or iy < 0 or iy >= n_rows:
            raise BoundsError(f"segment sample ({px}, {py}) leaves the grid")
        flat = iy * n_cols + ix
        if flat != last:
            if occ[flat]:
                return True, INFINITY
            if last >= 0:
                total += cost[flat]
            last = flat
    return False, total


# ---------------------------------------------------------------------------
# exact Euclidean distance transform

cdef void _envelope_1d(double* f, long n, long* v, double* z, double* d) noexcept nogil:
    cdef long k = 0, q, dq
    cdef double s, fq
    v[0] = 0
    z[0] = -INFINITY
    z[1] = INFINITY
    for q in range(1, n):
        fq = f[q] + q * q
        s = (fq - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]))
        while s <= z[k]:
            k -= 1
            s = (fq - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]))
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = INFINITY
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        dq = q - v[k]
        d[q] = dq * dq + f[v[k]]


def edt_sq(occ_in):
    cdef const cnp.uint8_t[:, ::1] occ = np.ascontiguousarray(occ_in, dtype=np.uint8)
    cdef long n_rows = occ.shape[0], n_cols = occ.shape[1]
    out = np.empty((n_rows, n_cols), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef vector[double] colbuf = vector[double](n_rows)
    cdef vector[double] rowf = vector[double](n_cols)
    cdef vector[double] rowd = vector[double](n_cols)
    cdef vector[long] v = vector[long](n_cols)
    cdef vector[double] z = vector[double](n_cols + 1)
    cdef long r, c
    cdef double run
    with nogil:
        for c in range(n_cols):
            run = EDT_INF
            for r in range(n_rows):
                if occ[r, c]:
                    run = 0.0
                else:
                    run = run + 1.0
                colbuf[r] = run
            run = EDT_INF
            for r in range(n_rows - 1, -1, -1):
                if occ[r, c]:
                    run = 0.0
                else:
                    run = run + 1.0
                if run < colbuf[r]:
                    colbuf[r] = run
            for r in range(n_rows):
                if colbuf[r] >= EDT_INF / 2:
                    o[r, c] = EDT_INF
                else:
                    o[r, c] = colbuf[r] * colbuf[r]
        for r in range(n_rows):
            for c in range(n_cols):
                rowf[c] = o[r, c]
            _envelope_1d(rowf.data(), n_cols, v.data(), z.data(), rowd.data())
            for c in range(n_cols):
                if rowd[c] >= EDT_INF / 2:
                    o[r, c] = INFINITY
                else:
                    o[r, c] = rowd[c]
    return out


# ---------------------------------------------------------------------------
# 8-connected A*

ctypedef pair[double, pair[double, long]] QItem


def astar(const cnp.uint8_t[::1] occ, const double[::1] cellcost, const double[::1] h,
          long n_rows, long n_cols, long start, long goal, double res, double w0,
          double deadline):
    cdef double t_end = time.perf_counter() + deadline
    cdef long n = n_rows * n_cols
    g_arr = np.full(n, np.inf)
    parent_arr = np.full(n, -1, dtype=np.int64)
    closed_arr = np.zeros(n, dtype=np.uint8)
    cdef double[::1] g = g_arr
    cdef cnp.int64_t[::1] parent = parent_arr
    cdef cnp.uint8_t[::1] closed = closed_arr
    cdef double orth = w0 * res
    cdef double diag = w0 * (res * SQRT2)
    # max-heap on negated keys == min-heap on (f, h, index)
    cdef priority_queue[QItem] heap
    cdef double f, ng, step
    cdef long u, v, ur, uc, vr, vc, k, expanded = 0
    g[start] = 0.0
    heap.push(QItem(-h[start], pair[double, long](-h[start], -start)))
    while not heap.empty():
        f = -heap.top().first
        u = -heap.top().second.second
        heap.pop()
        if closed[u] or f > g[u] + h[u]:
            continue
        closed[u] = 1
        expanded += 1
        if u == goal:
            path = [u]
            v = u
            while parent[v] >= 0:
                v = parent[v]
                path.append(v)
            path.reverse()
            return STATUS_SOLVED, np.array(path, dtype=np.int64), expanded
        if (expanded & 1023) == 0 and time.perf_counter() > t_end:
            return STATUS_TIMEOUT, np.empty(0, dtype=np.int64), expanded
        ur = u // n_cols
        uc = u - ur * n_cols
        for k in range(8):
            vr = ur + NB_DR[k]
            vc = uc + NB_DC[k]
            if vr < 0 or vr >= n_rows or vc < 0 or vc >= n_cols:
                continue
            v = vr * n_cols + vc
            if occ[v]:
                continue
            step = diag if (NB_DR[k] != 0 and NB_DC[k] != 0) else orth
            ng = (g[u] + step) + cellcost[v]
            if ng < g[v]:
                g[v] = ng
                parent[v] = u
                closed[v] = 0
                heap.push(QItem(-(ng + h[v]), pair[double, long](-h[v], -v)))
    return STATUS_NO_PATH, np.empty(0, dtype=np.int64), expanded


# ---------------------------------------------------------------------------
# segment / extruded-prism intersection

cdef bint _hit_prism(double ox, double oy, double oz, double dx, double dy, double dz,
                     long p, const cnp.int64_t[::1] offsets, const double[::1] vx,
                     const double[::1] vy, const double[::1] heights,
                     const double[:, ::1] bounds) noexcept nogil:
    cdef double h = heights[p]
    cdef double a, b, t1, t2, xa, xb, ya, yb
    if dz == 0.0:
        if oz >= 0.0 and oz <= h:
            a = 0.0
            b = 1.0
        else:
            return False
    else:
        t1 = (0.0 - oz) / dz
        t2 = (h - oz) / dz
        a = max(0.0, min(t1, t2))
        b = min(1.0, max(t1, t2))
    if not a < b:
        return False
    xa = ox + a * dx
    xb = ox + b * dx
    ya = oy + a * dy
    yb = oy + b * dy
    if max(xa, xb) < bounds[p, 0] or min(xa, xb) > bounds[p, 2]:
        return False
    if max(ya, yb) < bounds[p, 1] or min(ya, yb) > bounds[p, 3]:
        return False
    cdef long lo = offsets[p], hi = offsets[p + 1], nv = hi - lo, i, j
    cdef double x1, y1, x2, y2, ex, ey, den, wx, wy, t, u
    for i in range(nv):
        x1 = vx[lo + i]
        y1 = vy[lo + i]
        x2 = vx[lo + (i + 1) % nv]
        y2 = vy[lo + (i + 1) % nv]
        ex = x2 - x1
        ey = y2 - y1
        den = dx * ey - dy * ex
        if den == 0.0:
            continue
        wx = x1 - ox
        wy = y1 - oy
        t = (wx * ey - wy * ex) / den
        u = (wx * dy - wy * dx) / den
        if u >= 0.0 and u < 1.0 and t > a and t < b:
            return True
    cdef double mt = 0.5 * (a + b)
    cdef double px = ox + mt * dx
    cdef double py = oy + mt * dy
    cdef bint inside = False
    cdef double xi, yi, xj, yj
    j = nv - 1
    for i in range(nv):
        xi = vx[lo + i]
        yi = vy[lo + i]
        xj = vx[lo + j]
        yj = vy[lo + j]
        if ((yi > py) != (yj > py)) and (px < (xj - xi) * (py - yi) / (yj - yi) + xi):
            inside = not inside
        j = i
    return inside


def segments_hit(origins_in, targets_in, prisms):
    cdef const double[:, ::1] origins = np.ascontiguousarray(origins_in, dtype=np.float64)
    cdef const double[:, ::1] targets = np.ascontiguousarray(targets_in, dtype=np.float64)
    cdef const cnp.int64_t[::1] offsets = prisms[0]
    cdef const double[::1] vx = prisms[1]
    cdef const double[::1] vy = prisms[2]
    cdef const double[::1] heights = prisms[3]
    cdef const double[:, ::1] bounds = prisms[4]
    cdef long n = origins.shape[0], n_p = heights.shape[0], i, p
    out = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] o = out
    cdef double ox, oy, oz
    with nogil:
        for i in range(n):
            ox = origins[i, 0]
            oy = origins[i, 1]
            oz = origins[i, 2]
            for p in range(n_p):
                if _hit_prism(ox, oy, oz, targets[i, 0] - ox, targets[i, 1] - oy,
                              targets[i, 2] - oz, p, offsets, vx, vy, heights, bounds):
                    o[i] = 1
                    break
    return out


def lidar_returns(positions_in, beam_dirs_in, double r, prisms):
    cdef const double[:, ::1] positions = np.ascontiguousarray(positions_in, dtype=np.float64)
    cdef const double[:, :, ::1] dirs = np.ascontiguousarray(beam_dirs_in, dtype=np.float64)
    cdef const cnp.int64_t[::1] offsets = prisms[0]
    cdef const double[::1] vx = prisms[1]
    cdef const double[::1] vy = prisms[2]
    cdef const double[::1] heights = prisms[3]
    cdef const double[:, ::1] bounds = prisms[4]
    cdef long n = positions.shape[0], k = dirs.shape[0], nb = dirs.shape[1]
    cdef long n_p = heights.shape[0], m, j, i, p, n_near
    out = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] o = out
    cdef vector[long] near
    cdef double px, py, pz, dx, dy, dz
    cdef bint got
    cdef long count
    with nogil:
        for m in range(n):
            px = positions[m, 0]
            py = positions[m, 1]
            pz = positions[m, 2]
            near.clear()
            for p in range(n_p):
                if (bounds[p, 0] - r <= px and bounds[p, 2] + r >= px
                        and bounds[p, 1] - r <= py and bounds[p, 3] + r >= py):
                    near.push_back(p)
            if near.size() == 0:
                continue
            count = 0
            for j in range(k):
                got = False
                for i in range(nb):
                    dx = dirs[j, i, 0] * r
                    dy = dirs[j, i, 1] * r
                    dz = dirs[j, i, 2] * r
                    for p in near:
                        if _hit_prism(px, py, pz, dx, dy, dz, p, offsets, vx, vy,
                                      heights, bounds):
                            got = True
                            break
                    if got:
                        break
                if got:
                    count += 1
            o[m] = count
    return out
