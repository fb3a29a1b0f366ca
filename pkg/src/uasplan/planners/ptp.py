"""Point-to-point: the straight segment from start to goal, or nothing."""

from __future__ import annotations

import time

import numpy as np

from ..grid import trace_flat
from .common import PlanProblem, PlanResult, PlanStatus, finish


def plan_ptp(problem: PlanProblem) -> PlanResult:
    t0 = time.perf_counter()
    res = PlanResult(PlanStatus.NO_PATH, "ptp")
    if not problem.endpoints_free():
        res.status = PlanStatus.INFEASIBLE_START_GOAL
    elif problem.start == problem.goal:
        res.status = PlanStatus.SOLVED
        res.path = [problem.start]
    else:
        cells = trace_flat(problem.start, problem.goal, problem.maps.spec)
        if not np.any(problem.maps.obstacle.values.ravel()[cells] > 0):
            res.status = PlanStatus.SOLVED
            res.path = [problem.start, problem.goal]
    finish(res, problem)
    res.elapsed = time.perf_counter() - t0
    return res
