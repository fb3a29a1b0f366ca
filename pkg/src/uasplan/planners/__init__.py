"""PTP, A* and BIT* planners over a :class:`~uasplan.metrics.MetricMapSet`."""

from __future__ import annotations

from ..errors import PreconditionError
from .astar import plan_astar
from .bitstar import plan_bitstar
from .common import (
    ALGORITHMS,
    BitStarParams,
    PlanProblem,
    PlanResult,
    PlanStatus,
    path_is_free,
)
from .heuristics import h_plus, h_plus_field, octile_distance
from .ptp import plan_ptp


def plan(problem: PlanProblem, algo: str) -> PlanResult:
    if algo == "ptp":
        return plan_ptp(problem)
    if algo in ("astar_dist", "astar_plus"):
        return plan_astar(problem, algo.split("_")[1])
    if algo in ("bitstar_dist", "bitstar_plus"):
        return plan_bitstar(problem, algo.split("_")[1])
    raise PreconditionError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGORITHMS)}")


__all__ = [
    "ALGORITHMS",
    "BitStarParams",
    "PlanProblem",
    "PlanResult",
    "PlanStatus",
    "h_plus",
    "h_plus_field",
    "octile_distance",
    "path_is_free",
    "plan",
    "plan_astar",
    "plan_bitstar",
    "plan_ptp",
]
