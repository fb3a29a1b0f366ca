"""A* over the 8-connected grid of free cells."""

from __future__ import annotations

import time

import numpy as np

from .. import _kernels
from ..cost import cell_cost_field
from .common import PlanProblem, PlanResult, PlanStatus, finish
from .heuristics import h_dist_field, h_plus_field

_STATUS = {
    _kernels.STATUS_SOLVED: PlanStatus.SOLVED,
    _kernels.STATUS_NO_PATH: PlanStatus.NO_PATH,
    _kernels.STATUS_TIMEOUT: PlanStatus.TIMEOUT,
}


def heuristic_field(problem: PlanProblem, heuristic: str) -> np.ndarray:
    goal = problem.goal_cell()
    if heuristic == "dist":
        return h_dist_field(goal, problem.maps, problem.weights)
    if heuristic == "plus":
        return h_plus_field(goal, problem.maps, problem.weights, problem.hplus_mode)
    raise ValueError(f"unknown heuristic {heuristic!r}")


def plan_astar(problem: PlanProblem, heuristic: str = "dist") -> PlanResult:
    """Optimal grid path; start and goal snap to their cell centers."""
    t0 = time.perf_counter()
    res = PlanResult(PlanStatus.NO_PATH, f"astar_{heuristic}")
    maps = problem.maps
    spec = maps.spec
    if not problem.endpoints_free():
        res.status = PlanStatus.INFEASIBLE_START_GOAL
        res.elapsed = time.perf_counter() - t0
        return res
    h = heuristic_field(problem, heuristic).ravel()
    occ = np.ascontiguousarray(maps.obstacle.values.ravel() > 0, dtype=np.uint8)
    cellcost = np.ascontiguousarray(cell_cost_field(maps, problem.weights).ravel())
    start = spec.flat(*problem.start_cell())
    goal = spec.flat(*problem.goal_cell())
    remaining = problem.deadline - (time.perf_counter() - t0)
    if remaining <= 0:
        res.status = PlanStatus.TIMEOUT
    else:
        status, cells, expanded = _kernels.astar(
            occ, cellcost, np.ascontiguousarray(h), spec.n_rows, spec.n_cols,
            start, goal, spec.resolution, problem.weights.w0, remaining,
        )
        res.status = _STATUS[int(status)]
        res.expanded_nodes = int(expanded)
        if res.status is PlanStatus.SOLVED:
            res.path = [spec.cell_center(*spec.unflat(f)) for f in cells]
    finish(res, problem)
    res.elapsed = time.perf_counter() - t0
    return res
