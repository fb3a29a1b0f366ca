"""Segment intersection against extruded building prisms.

A prism is a footprint ring extruded from the ground (z = 0) up to its
flat roof at ``height``. Tests are exact up to floating point; segments
that only graze a face may go either way.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import _kernels
from .errors import PreconditionError
from .world import ObstaclePolygon


class PrismSet:
    """Obstacle footprints packed into flat arrays for the kernels."""

    def __init__(self, obstacles: Sequence[ObstaclePolygon]):
        offsets = [0]
        vx: list[float] = []
        vy: list[float] = []
        heights = []
        bounds = []
        for ob in obstacles:
            xs = [p[0] for p in ob.ring]
            ys = [p[1] for p in ob.ring]
            vx.extend(xs)
            vy.extend(ys)
            offsets.append(len(vx))
            heights.append(ob.height)
            bounds.append((min(xs), min(ys), max(xs), max(ys)))
        self.offsets = np.array(offsets, dtype=np.int64)
        self.vx = np.array(vx, dtype=np.float64)
        self.vy = np.array(vy, dtype=np.float64)
        self.heights = np.array(heights, dtype=np.float64)
        self.bounds = np.array(bounds, dtype=np.float64).reshape(-1, 4)

    def __len__(self) -> int:
        return len(self.heights)

    def packed(self) -> tuple:
        return self.offsets, self.vx, self.vy, self.heights, self.bounds

    def segments_hit(self, origins: np.ndarray, targets: np.ndarray) -> np.ndarray:
        """Boolean per row: does the segment ``origins[i] -> targets[i]`` meet a prism."""
        origins = np.atleast_2d(np.asarray(origins, dtype=np.float64))
        targets = np.atleast_2d(np.asarray(targets, dtype=np.float64))
        if len(self) == 0:
            return np.zeros(origins.shape[0], dtype=bool)
        return _kernels.segments_hit(origins, targets, self.packed()).astype(bool)


def ray_hits_obstacle(origin: Sequence[float], target: Sequence[float],
                      obstacles: Sequence[ObstaclePolygon] | PrismSet) -> bool:
    """True iff the open segment ``origin -> target`` crosses any prism
    (side walls or roof)."""
    o = np.asarray(origin, dtype=np.float64).reshape(1, 3)
    t = np.asarray(target, dtype=np.float64).reshape(1, 3)
    if np.array_equal(o, t):
        raise PreconditionError("origin and target coincide")
    prisms = obstacles if isinstance(obstacles, PrismSet) else PrismSet(obstacles)
    return bool(prisms.segments_hit(o, t)[0])
