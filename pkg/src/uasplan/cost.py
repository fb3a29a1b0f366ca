"""Weighted multi-objective transition and path costs.

A move from state ``a`` to state ``b`` costs ``w0 * |b - a|`` plus the
weighted layer costs of every cell entered on the way. Layer costs accrue
on arrival: the cell a segment starts in is not charged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InfeasiblePathError, InfeasibleTransitionError, PreconditionError
from .grid import trace_flat, world_to_index
from .metrics import COST_LAYER_NAMES, MetricMapSet


@dataclass(frozen=True)
class WeightVector:
    w0: float = 1.0
    gps: float = 0.0
    lidar: float = 0.0
    population: float = 0.0
    risk: float = 0.0

    def __post_init__(self):
        vals = self.as_tuple()
        if any(not (v >= 0) or not math.isfinite(v) for v in vals):
            raise PreconditionError(f"weights must be finite and >= 0, got {vals}")
        if not any(v > 0 for v in vals):
            raise PreconditionError("weights must not all be zero")

    @classmethod
    def parse(cls, text: str | Sequence[float]) -> "WeightVector":
        """From ``"w0,gps,lidar,pop,risk"`` or a 5-sequence."""
        if isinstance(text, str):
            parts = [p for p in text.replace(" ", "").split(",") if p]
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                raise PreconditionError(f"cannot parse weights {text!r}") from None
        else:
            vals = [float(v) for v in text]
        if len(vals) != 5:
            raise PreconditionError(f"expected 5 weights, got {len(vals)}")
        return cls(*vals)

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.w0, self.gps, self.lidar, self.population, self.risk)

    @property
    def layer_weights(self) -> tuple[float, float, float, float]:
        return (self.gps, self.lidar, self.population, self.risk)

    def __str__(self) -> str:
        return ",".join(repr(v) for v in self.as_tuple())


DISTANCE_ONLY = WeightVector(1.0, 0.0, 0.0, 0.0, 0.0)


@dataclass
class PathCostBreakdown:
    total: float = 0.0
    distance_m: float = 0.0
    gps: float = 0.0
    lidar: float = 0.0
    population: float = 0.0
    risk: float = 0.0
    cells_visited: int = 0

    def layer_sums(self) -> tuple[float, float, float, float]:
        return (self.gps, self.lidar, self.population, self.risk)

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "distance_m": self.distance_m,
            "gps": self.gps,
            "lidar": self.lidar,
            "population": self.population,
            "risk": self.risk,
            "cells_visited": self.cells_visited,
        }


def cell_cost_field(maps: MetricMapSet, w: WeightVector) -> np.ndarray:
    """Per-cell weighted layer cost ``sum_j w_j H_j``, shaped like the grid."""
    out = np.zeros(maps.spec.shape)
    for name, wj in zip(COST_LAYER_NAMES, w.layer_weights):
        if wj != 0:
            out = out + wj * getattr(maps, name).values
    return out


def _euclid(a: Sequence[float], b: Sequence[float]) -> float:
    # z terms vanish at constant altitude but a 3D state is accepted
    s = 0.0
    for i in range(min(len(a), len(b))):
        d = float(b[i]) - float(a[i])
        s += d * d
    return math.sqrt(s)


def transition_cost(a: Sequence[float], b: Sequence[float], maps: MetricMapSet, w: WeightVector) -> float:
    """``w0 * d_euc(a, b)`` plus the weighted layer costs of the destination cell.

    Raises:
        InfeasibleTransitionError: the destination cell is occupied.
    """
    world_to_index(a, maps.spec)
    idx, idy = world_to_index(b, maps.spec)
    if maps.obstacle.values[idy, idx] > 0:
        raise InfeasibleTransitionError(f"destination cell ({idx}, {idy}) is occupied", cell=(idx, idy))
    layer = sum(wj * getattr(maps, n).values[idy, idx] for n, wj in zip(COST_LAYER_NAMES, w.layer_weights))
    return w.w0 * _euclid(a, b) + layer


def path_distance(path: Sequence[Sequence[float]]) -> float:
    if len(path) == 0:
        raise PreconditionError("path must have at least one state")
    return float(sum(_euclid(path[i], path[i + 1]) for i in range(len(path) - 1)))


def path_cost(path: Sequence[Sequence[float]], maps: MetricMapSet, w: WeightVector) -> PathCostBreakdown:
    """Cost of a polyline with every segment expanded into the cells it crosses.

    For a path of adjacent cell centers this reduces to summing
    :func:`transition_cost` over consecutive pairs.

    Raises:
        InfeasiblePathError: a traversed cell (or the first state's cell) is occupied.
    """
    if len(path) == 0:
        raise PreconditionError("path must have at least one state")
    spec = maps.spec
    occ = maps.obstacle.values.ravel()
    layers = [getattr(maps, n).values.ravel() for n in COST_LAYER_NAMES]
    sums = [0.0, 0.0, 0.0, 0.0]
    idx, idy = world_to_index(path[0], spec)
    if occ[spec.flat(idx, idy)] > 0:
        raise InfeasiblePathError(f"path starts in occupied cell ({idx}, {idy})", cell=(idx, idy))
    visited = 1
    for i in range(len(path) - 1):
        cells = trace_flat(path[i], path[i + 1], spec)
        for f in cells[1:]:
            if occ[f] > 0:
                cell = spec.unflat(f)
                raise InfeasiblePathError(f"path crosses occupied cell {cell}", cell=cell)
            for j in range(4):
                sums[j] += layers[j][f]
        visited += len(cells) - 1
    dist = path_distance(path)
    total = w.w0 * dist
    for wj, s in zip(w.layer_weights, sums):
        total += wj * s
    return PathCostBreakdown(float(total), float(dist), *(float(v) for v in sums), cells_visited=int(visited))
