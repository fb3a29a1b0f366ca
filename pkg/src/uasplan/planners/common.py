"""Problem and result types shared by every planner."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..cost import PathCostBreakdown, WeightVector, path_cost
from ..errors import BoundsError, PreconditionError
from ..grid import trace_flat, world_to_index
from ..metrics import MetricMapSet

ALGORITHMS = ("ptp", "astar_dist", "astar_plus", "bitstar_dist", "bitstar_plus")
HPLUS_MODES = ("aabb", "full")


class PlanStatus(str, enum.Enum):
    SOLVED = "solved"
    INFEASIBLE_START_GOAL = "infeasible_start_goal"
    NO_PATH = "no_path"
    TIMEOUT = "timeout"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class BitStarParams:
    batches: int = 5
    samples: int = 200
    seed: int = 0
    eta: float = 1.1
    eps_stop: float = 1e-3

    def __post_init__(self):
        if self.batches < 1:
            raise PreconditionError("batches must be >= 1")
        if self.samples < 2:
            raise PreconditionError("samples per batch must be >= 2")
        if not self.eta > 0 or not self.eps_stop >= 0:
            raise PreconditionError("eta must be > 0 and eps_stop >= 0")


@dataclass
class PlanProblem:
    start: tuple[float, float]
    goal: tuple[float, float]
    maps: MetricMapSet
    weights: WeightVector = field(default_factory=WeightVector)
    deadline: float = 180.0
    bitstar: BitStarParams = field(default_factory=BitStarParams)
    hplus_mode: str = "aabb"
    connectivity: int = 8

    def __post_init__(self):
        self.start = (float(self.start[0]), float(self.start[1]))
        self.goal = (float(self.goal[0]), float(self.goal[1]))
        if not self.deadline > 0:
            raise PreconditionError("deadline must be > 0")
        if self.hplus_mode not in HPLUS_MODES:
            raise PreconditionError(f"hplus_mode must be one of {HPLUS_MODES}")
        if self.connectivity != 8:
            raise PreconditionError("only 8-connected grids are supported")
        # raises BoundsError for points outside the box
        world_to_index(self.start, self.maps.spec)
        world_to_index(self.goal, self.maps.spec)

    def start_cell(self) -> tuple[int, int]:
        return world_to_index(self.start, self.maps.spec)

    def goal_cell(self) -> tuple[int, int]:
        return world_to_index(self.goal, self.maps.spec)

    def endpoints_free(self) -> bool:
        occ = self.maps.obstacle.values
        (sx, sy), (gx, gy) = self.start_cell(), self.goal_cell()
        return not (occ[sy, sx] > 0 or occ[gy, gx] > 0)


@dataclass
class PlanResult:
    status: PlanStatus
    algo: str
    path: list[tuple[float, float]] = field(default_factory=list)
    breakdown: PathCostBreakdown | None = None
    expanded_nodes: int = 0
    samples_drawn: int = 0
    batches_completed: int = 0
    elapsed: float = 0.0
    incumbent_history: list[float] = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return self.status is PlanStatus.SOLVED

    @property
    def total(self) -> float:
        return self.breakdown.total if self.breakdown is not None else math.inf

    def to_dict(self, include_elapsed: bool = True) -> dict:
        doc = {
            "algo": self.algo,
            "status": self.status.value,
            "path": [[x, y] for x, y in self.path],
            "breakdown": self.breakdown.to_dict() if self.breakdown is not None else None,
            "expanded_nodes": self.expanded_nodes,
            "samples_drawn": self.samples_drawn,
            "batches_completed": self.batches_completed,
            "incumbent_history": [c if math.isfinite(c) else None for c in self.incumbent_history],
        }
        if include_elapsed:
            doc["elapsed"] = self.elapsed
        return doc


def finish(result: PlanResult, problem: PlanProblem) -> PlanResult:
    """Attach the cost breakdown of a solved path, recomputed from the maps."""
    if result.status is PlanStatus.SOLVED:
        result.breakdown = path_cost(result.path, problem.maps, problem.weights)
    return result


def path_is_free(path: Sequence[Sequence[float]], maps: MetricMapSet) -> bool:
    """Re-trace every segment and check that no traversed cell is occupied."""
    occ = maps.obstacle.values.ravel()
    try:
        if len(path) == 1:
            idx, idy = world_to_index(path[0], maps.spec)
            return not occ[maps.spec.flat(idx, idy)] > 0
        for a, b in zip(path[:-1], path[1:]):
            if np.any(occ[trace_flat(a, b, maps.spec)] > 0):
                return False
    except BoundsError:
        return False
    return True
