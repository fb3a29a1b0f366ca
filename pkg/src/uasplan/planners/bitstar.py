"""Batch Informed Trees over continuous (x, y) states at fixed altitude.

Edges are straight segments charged like every other path here: distance
times ``w0`` plus the weighted layer cost of each cell the segment enters.
Edge costs are evaluated lazily, only when an edge reaches the front of the
queue and could still improve the incumbent.

The incumbent (best path found) is kept outside the tree, so pruning with
an inadmissible heuristic can never make the returned cost worse.
"""

from __future__ import annotations

import heapq
import math
import time

import numpy as np

from .. import _kernels
from ..cost import cell_cost_field
from ..metrics import MetricMapSet
from .common import PlanProblem, PlanResult, PlanStatus, finish
from .heuristics import layer_bound_field

_UNUSED, _SAMPLE, _VERTEX, _DEAD = 0, 1, 2, 3
_START, _GOAL = 0, 1


def layer_bound_fields(maps: MetricMapSet, w, start_cell, goal_cell, mode: str):
    """Weighted layer-cost lower bounds: from the start to each cell, and from
    each cell to the goal."""
    to_goal = np.zeros(maps.spec.shape)
    from_start = np.zeros(maps.spec.shape)
    stack = maps.cost_stack()
    for k, wk in enumerate(w.layer_weights):
        if wk != 0:
            to_goal = to_goal + wk * layer_bound_field(stack[k], goal_cell, mode, True)
            from_start = from_start + wk * layer_bound_field(stack[k], start_cell, mode, False)
    return from_start, to_goal


class _BitStar:
    def __init__(self, problem: PlanProblem, heuristic: str, t_end: float):
        self.p = problem
        self.params = problem.bitstar
        self.t_end = t_end
        maps = problem.maps
        spec = maps.spec
        self.spec = spec
        self.res = spec.resolution
        self.w0 = problem.weights.w0
        self.occ = np.ascontiguousarray(maps.obstacle.values.ravel() > 0, dtype=np.uint8)
        self.cellcost = np.ascontiguousarray(cell_cost_field(maps, problem.weights).ravel())
        if heuristic == "plus":
            fs, tg = layer_bound_fields(maps, problem.weights, problem.start_cell(), problem.goal_cell(),
                                        problem.hplus_mode)
            self.lb_from_start, self.lb_to_goal = fs.ravel(), tg.ravel()
        elif heuristic == "dist":
            self.lb_from_start = np.zeros(spec.size)
            self.lb_to_goal = np.zeros(spec.size)
        else:
            raise ValueError(f"unknown heuristic {heuristic!r}")
        self.free_cells = np.nonzero(self.occ == 0)[0]
        self.free_area = len(self.free_cells) * self.res * self.res

        cap = 2 + self.params.batches * self.params.samples
        self.X = np.zeros((cap, 2))
        self.kind = np.zeros(cap, dtype=np.int8)
        self.g = np.full(cap, np.inf)
        self.ghat = np.zeros(cap)
        self.hhat = np.zeros(cap)
        self.cell = np.zeros(cap, dtype=np.int64)
        self.parent = np.full(cap, -1, dtype=np.int64)
        self.edge_cost = np.zeros(cap)
        self.children: list[set[int]] = [set() for _ in range(cap)]
        self.n = 0
        self.edge_cache: dict[tuple[int, int], float] = {}

        self.rng = np.random.Generator(np.random.PCG64(self.params.seed))
        self.incumbent = math.inf
        self.best_path: list[tuple[float, float]] = []
        self.history: list[float] = []
        self.expanded = 0
        self.samples_drawn = 0
        self.batches = 0
        self.timed_out = False

        self._add_point(problem.start, _VERTEX)
        self.g[_START] = 0.0
        self._add_point(problem.goal, _SAMPLE)

        # per-cell lower bound on f-hat, for informed sampling
        cx, cy = spec.centers()
        cx, cy = cx.ravel(), cy.ravel()
        half = 0.5 * math.sqrt(2.0) * self.res
        ds = np.maximum(np.hypot(cx - problem.start[0], cy - problem.start[1]) - half, 0.0)
        dg = np.maximum(np.hypot(cx - problem.goal[0], cy - problem.goal[1]) - half, 0.0)
        self.cell_flb = self.w0 * ds + self.lb_from_start + self.w0 * dg + self.lb_to_goal

    # -- points ---------------------------------------------------------

    def _cells_of(self, pts: np.ndarray) -> np.ndarray:
        b = self.spec.bbox
        ix = np.floor((pts[:, 0] - b.x_min) / self.res).astype(np.int64)
        iy = np.floor((pts[:, 1] - b.y_min) / self.res).astype(np.int64)
        ix = np.minimum(ix, self.spec.n_cols - 1)
        iy = np.minimum(iy, self.spec.n_rows - 1)
        return iy * self.spec.n_cols + ix

    def _fhat_parts(self, pts: np.ndarray):
        cells = self._cells_of(pts)
        s, gl = self.p.start, self.p.goal
        ghat = self.w0 * np.hypot(pts[:, 0] - s[0], pts[:, 1] - s[1]) + self.lb_from_start[cells]
        hhat = self.w0 * np.hypot(pts[:, 0] - gl[0], pts[:, 1] - gl[1]) + self.lb_to_goal[cells]
        return cells, ghat, hhat

    def _add_point(self, pt, kind) -> int:
        i = self.n
        arr = np.array([pt], dtype=np.float64)
        cells, ghat, hhat = self._fhat_parts(arr)
        self.X[i] = arr[0]
        self.cell[i] = cells[0]
        self.ghat[i] = ghat[0]
        self.hhat[i] = hhat[0]
        self.kind[i] = kind
        self.n += 1
        return i

    def _sample(self, count: int) -> None:
        cand = self.free_cells
        if math.isfinite(self.incumbent):
            cand = cand[self.cell_flb[cand] < self.incumbent]
        if cand.size == 0:
            return
        b = self.spec.bbox
        n_cols = self.spec.n_cols
        accepted = 0
        attempts = 0
        while accepted < count and attempts < 100 * count:
            m = 2 * (count - accepted) + 8
            attempts += m
            picks = cand[self.rng.integers(0, cand.size, size=m)]
            offs = self.rng.random((m, 2))
            pts = np.empty((m, 2))
            pts[:, 0] = b.x_min + (picks % n_cols + offs[:, 0]) * self.res
            pts[:, 1] = b.y_min + (picks // n_cols + offs[:, 1]) * self.res
            cells, ghat, hhat = self._fhat_parts(pts)
            ok = (cells == picks) & (ghat + hhat < self.incumbent)
            for j in np.nonzero(ok)[0]:
                if accepted == count:
                    break
                i = self.n
                self.X[i] = pts[j]
                self.cell[i] = cells[j]
                self.ghat[i] = ghat[j]
                self.hhat[i] = hhat[j]
                self.kind[i] = _SAMPLE
                self.n += 1
                accepted += 1
        self.samples_drawn += accepted

    # -- costs ----------------------------------------------------------

    def _dist(self, a: int, b: int) -> float:
        d = self.X[b] - self.X[a]
        return math.sqrt(d[0] * d[0] + d[1] * d[1])

    def _chat(self, a: int, b: int) -> float:
        # straight-line distance plus the arrival cell, which any edge must pay
        c = self.w0 * self._dist(a, b)
        if self.cell[a] != self.cell[b]:
            c += self.cellcost[self.cell[b]]
        return c

    def _true_cost(self, a: int, b: int) -> float:
        key = (a, b)
        c = self.edge_cache.get(key)
        if c is None:
            s = self.spec
            bb = s.bbox
            blocked, layer = _kernels.segment_cost(
                self.X[a, 0], self.X[a, 1], self.X[b, 0], self.X[b, 1],
                bb.x_min, bb.y_min, s.resolution, s.n_cols, s.n_rows, self.occ, self.cellcost,
            )
            c = math.inf if blocked else self.w0 * self._dist(a, b) + layer
            self.edge_cache[key] = c
        return c

    # -- tree -----------------------------------------------------------

    def _detach(self, x: int) -> None:
        par = self.parent[x]
        if par >= 0:
            self.children[par].discard(x)
        self.parent[x] = -1

    def _propagate(self, root: int) -> None:
        stack = [root]
        while stack:
            u = stack.pop()
            for c in sorted(self.children[u]):
                self.g[c] = self.g[u] + self.edge_cost[c]
                stack.append(c)

    def _radius(self) -> float:
        q = int(np.count_nonzero((self.kind[: self.n] == _SAMPLE) | (self.kind[: self.n] == _VERTEX)))
        q = max(q, 2)
        return self.params.eta * math.sqrt(self.free_area * math.log(q) / q)

    def _prune(self) -> None:
        c = self.incumbent
        n = self.n
        kind = self.kind[:n]
        fhat = self.ghat[:n] + self.hhat[:n]
        keep = np.zeros(n, dtype=bool)
        keep[[_START, _GOAL]] = True
        kind[(kind == _SAMPLE) & (fhat >= c) & ~keep] = _DEAD
        drop = np.nonzero((kind == _VERTEX) & ~keep & ((fhat >= c) | (self.g[:n] + self.hhat[:n] > c)))[0]
        for v in drop:
            self._detach(v)
            kind[v] = _SAMPLE if fhat[v] < c else _DEAD
            self.g[v] = math.inf
        # vertices cut off from the start return to the sample pool
        reached = np.zeros(n, dtype=bool)
        stack = [_START]
        reached[_START] = True
        while stack:
            u = stack.pop()
            for ch in self.children[u]:
                if kind[ch] == _VERTEX and not reached[ch]:
                    reached[ch] = True
                    stack.append(ch)
        for v in np.nonzero((kind == _VERTEX) & ~reached)[0]:
            self._detach(v)
            kind[v] = _SAMPLE if (fhat[v] < c or v == _GOAL) else _DEAD
            self.g[v] = math.inf
        for v in range(n):
            if kind[v] != _VERTEX:
                self.children[v].clear()
            else:
                self.children[v] = {ch for ch in self.children[v] if kind[ch] == _VERTEX}
        if kind[_GOAL] == _DEAD:
            kind[_GOAL] = _SAMPLE

    def _extract(self) -> list[tuple[float, float]]:
        path = []
        v = _GOAL
        while v >= 0:
            path.append((float(self.X[v, 0]), float(self.X[v, 1])))
            v = self.parent[v]
        path.reverse()
        path[0] = self.p.start
        path[-1] = self.p.goal
        return path

    # -- search ---------------------------------------------------------

    def _expand(self, v: int, r: float, old: np.ndarray, qe: list) -> None:
        self.expanded += 1
        n = self.n
        d = np.hypot(self.X[:n, 0] - self.X[v, 0], self.X[:n, 1] - self.X[v, 1])
        near = d <= r
        near[v] = False
        gv = self.g[v]
        for x in np.nonzero(near & (self.kind[:n] == _SAMPLE))[0]:
            ch = self._chat(v, x)
            if self.ghat[v] + ch + self.hhat[x] < self.incumbent:
                heapq.heappush(qe, (gv + ch + self.hhat[x], gv + ch, int(v), int(x)))
        if not old[v]:
            for x in np.nonzero(near & (self.kind[:n] == _VERTEX))[0]:
                if self.parent[x] == v or self.parent[v] == x:
                    continue
                ch = self._chat(v, x)
                if self.ghat[v] + ch + self.hhat[x] < self.incumbent and gv + ch < self.g[x]:
                    heapq.heappush(qe, (gv + ch + self.hhat[x], gv + ch, int(v), int(x)))

    def _batch(self) -> None:
        r = self._radius()
        n0 = self.n
        old = np.zeros(self.X.shape[0], dtype=bool)
        old[:n0] = self.kind[:n0] == _VERTEX
        expanded = np.zeros(self.X.shape[0], dtype=bool)
        qv = [(self.g[v] + self.hhat[v], int(v)) for v in np.nonzero(self.kind[:n0] == _VERTEX)[0]]
        heapq.heapify(qv)
        qe: list = []
        tick = 0
        while True:
            tick += 1
            if (tick & 63) == 0 and time.perf_counter() > self.t_end:
                self.timed_out = True
                return
            # drop stale vertex entries
            while qv and (self.kind[qv[0][1]] != _VERTEX or expanded[qv[0][1]]
                          or qv[0][0] != self.g[qv[0][1]] + self.hhat[qv[0][1]]):
                heapq.heappop(qv)
            if qv and (not qe or qv[0][0] <= qe[0][0]):
                _, v = heapq.heappop(qv)
                expanded[v] = True
                self._expand(v, r, old, qe)
                continue
            if not qe:
                return
            key, _, v, x = heapq.heappop(qe)
            if self.kind[v] != _VERTEX:
                continue
            ch = self._chat(v, x)
            cur = self.g[v] + ch + self.hhat[x]
            if cur < key:
                heapq.heappush(qe, (cur, self.g[v] + ch, v, x))
                continue
            if cur >= self.incumbent:
                return
            if self.kind[x] == _VERTEX and self.g[v] + ch >= self.g[x]:
                continue
            if self.kind[x] == _DEAD:
                continue
            c = self._true_cost(v, x)
            if not math.isfinite(c):
                continue
            gx = self.g[v] + c
            if self.ghat[v] + c + self.hhat[x] < self.incumbent and gx < self.g[x]:
                if self.kind[x] == _VERTEX:
                    self._detach(x)
                else:
                    self.kind[x] = _VERTEX
                    heapq.heappush(qv, (gx + self.hhat[x], int(x)))
                self.parent[x] = v
                self.edge_cost[x] = c
                self.children[v].add(int(x))
                self.g[x] = gx
                self._propagate(x)
                if self.kind[_GOAL] == _VERTEX and self.g[_GOAL] < self.incumbent:
                    self.incumbent = float(self.g[_GOAL])
                    self.best_path = self._extract()
                # a rewired vertex may be expanded again with its better cost
                if expanded[x]:
                    expanded[x] = False
                    heapq.heappush(qv, (self.g[x] + self.hhat[x], int(x)))

    def run(self) -> None:
        prev = math.inf
        for b in range(self.params.batches):
            if time.perf_counter() > self.t_end:
                self.timed_out = True
                break
            if math.isfinite(self.incumbent):
                self._prune()
            self._sample(self.params.samples)
            self._batch()
            if self.timed_out:
                break
            self.batches += 1
            self.history.append(self.incumbent)
            if math.isfinite(prev) and prev - self.incumbent < self.params.eps_stop * prev:
                break
            prev = self.incumbent


def plan_bitstar(problem: PlanProblem, heuristic: str = "dist") -> PlanResult:
    t0 = time.perf_counter()
    res = PlanResult(PlanStatus.NO_PATH, f"bitstar_{heuristic}")
    if not problem.endpoints_free():
        res.status = PlanStatus.INFEASIBLE_START_GOAL
    elif problem.start == problem.goal:
        res.status = PlanStatus.SOLVED
        res.path = [problem.start]
    else:
        bit = _BitStar(problem, heuristic, t0 + problem.deadline)
        bit.run()
        res.samples_drawn = bit.samples_drawn
        res.expanded_nodes = bit.expanded
        res.batches_completed = bit.batches
        res.incumbent_history = list(bit.history)
        if bit.best_path:
            res.status = PlanStatus.SOLVED
            res.path = bit.best_path
        elif bit.timed_out:
            res.status = PlanStatus.TIMEOUT
    finish(res, problem)
    res.elapsed = time.perf_counter() - t0
    return res
