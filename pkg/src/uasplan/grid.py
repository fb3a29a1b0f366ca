"""Grid indexing, polygon rasterization, segment tracing and distance
transforms over a bounding box.

Arrays are indexed ``[idy, idx]`` (row-major, row 0 southmost); flat cell
indices are ``idy * n_cols + idx``.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from os import PathLike
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import BoundsError, DataError, PreconditionError
from .world import BoundingBox, ObstaclePolygon

_BOUNDARY_EPS = 1e-9


@dataclass(frozen=True)
class GridSpec:
    bbox: BoundingBox
    resolution: float
    n_rows: int = field(init=False)
    n_cols: int = field(init=False)

    def __post_init__(self):
        res = float(self.resolution)
        if not res > 0:
            raise PreconditionError(f"resolution must be > 0, got {res}")
        cols = self.bbox.width / res
        rows = self.bbox.height / res
        n_cols, n_rows = round(cols), round(rows)
        tol = 1e-9
        if n_cols < 1 or n_rows < 1 or abs(cols - n_cols) > tol * cols or abs(rows - n_rows) > tol * rows:
            raise PreconditionError(
                f"resolution {res} does not divide bbox extent {self.bbox.width}x{self.bbox.height}"
            )
        object.__setattr__(self, "resolution", res)
        object.__setattr__(self, "n_rows", int(n_rows))
        object.__setattr__(self, "n_cols", int(n_cols))

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_rows, self.n_cols

    @property
    def size(self) -> int:
        return self.n_rows * self.n_cols

    def cell_center(self, idx: int, idy: int) -> tuple[float, float]:
        r = self.resolution
        return self.bbox.x_min + (idx + 0.5) * r, self.bbox.y_min + (idy + 0.5) * r

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinate arrays, each shaped ``(n_rows, n_cols)``."""
        r = self.resolution
        xs = self.bbox.x_min + (np.arange(self.n_cols) + 0.5) * r
        ys = self.bbox.y_min + (np.arange(self.n_rows) + 0.5) * r
        return np.meshgrid(xs, ys)

    def flat(self, idx: int, idy: int) -> int:
        return idy * self.n_cols + idx

    def unflat(self, flat: int) -> tuple[int, int]:
        idy, idx = divmod(int(flat), self.n_cols)
        return idx, idy


def world_to_index(p: Sequence[float], spec: GridSpec) -> tuple[int, int]:
    """Cell ``(idx, idy)`` containing point ``p``.

    The min edges of the box are inside, the max edges outside.

    Raises:
        BoundsError: ``p`` lies outside the box. Never clamps.
    """
    x, y = float(p[0]), float(p[1])
    b = spec.bbox
    if not (b.x_min <= x < b.x_max and b.y_min <= y < b.y_max):
        raise BoundsError(f"point ({x}, {y}) outside bbox")
    idx = math.floor((x - b.x_min) / spec.resolution)
    idy = math.floor((y - b.y_min) / spec.resolution)
    # guard the float edge case where x is a hair below x_max
    return min(idx, spec.n_cols - 1), min(idy, spec.n_rows - 1)


def trace_segment(a: Sequence[float], b: Sequence[float], spec: GridSpec) -> list[tuple[int, int]]:
    """Cells visited when stepping from ``a`` to ``b`` at the grid resolution.

    Samples sit at ``a + l * res * u`` for ``l = 0 .. ceil(len/res) - 1`` plus a
    final sample exactly at ``b``; consecutive repeats are collapsed.
    """
    flat = trace_flat(a, b, spec)
    n_cols = spec.n_cols
    return [(int(f) % n_cols, int(f) // n_cols) for f in flat]


def trace_flat(a: Sequence[float], b: Sequence[float], spec: GridSpec) -> np.ndarray:
    bb = spec.bbox
    return _kernels.trace_cells(
        float(a[0]), float(a[1]), float(b[0]), float(b[1]),
        bb.x_min, bb.y_min, spec.resolution, spec.n_cols, spec.n_rows,
    )


# ---------------------------------------------------------------------------
# point-in-polygon


def points_in_ring(px: np.ndarray, py: np.ndarray, ring: Sequence[tuple[float, float]],
                   include_boundary: bool = True) -> np.ndarray:
    """Vectorized crossing-number test; boundary points count as inside
    when ``include_boundary`` is set."""
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    inside = np.zeros(px.shape, dtype=bool)
    on_edge = np.zeros(px.shape, dtype=bool)
    n = len(ring)
    j = n - 1
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(n):
            xi, yi = ring[i]
            xj, yj = ring[j]
            straddle = (yi > py) != (yj > py)
            xcross = (xj - xi) * (py - yi) / (yj - yi) + xi
            inside ^= straddle & (px < xcross)
            if include_boundary:
                ex, ey = xi - xj, yi - yj
                seg2 = ex * ex + ey * ey
                t = np.clip(((px - xj) * ex + (py - yj) * ey) / seg2, 0.0, 1.0)
                dxp = px - (xj + t * ex)
                dyp = py - (yj + t * ey)
                on_edge |= dxp * dxp + dyp * dyp <= _BOUNDARY_EPS * _BOUNDARY_EPS
            j = i
    return inside | on_edge


def rasterize_rings(rings: Iterable[Sequence[tuple[float, float]]], spec: GridSpec) -> np.ndarray:
    """Index of the first ring containing each cell center, ``-1`` if none."""
    out = np.full(spec.shape, -1, dtype=np.int64)
    r = spec.resolution
    x0, y0 = spec.bbox.x_min, spec.bbox.y_min
    for k, ring in enumerate(rings):
        xs = [p[0] for p in ring]
        ys = [p[1] for p in ring]
        # candidate cells: centers within the ring's bbox (plus boundary slack)
        c0 = max(0, math.ceil((min(xs) - x0) / r - 0.5 - 1e-9))
        c1 = min(spec.n_cols - 1, math.floor((max(xs) - x0) / r - 0.5 + 1e-9))
        r0 = max(0, math.ceil((min(ys) - y0) / r - 0.5 - 1e-9))
        r1 = min(spec.n_rows - 1, math.floor((max(ys) - y0) / r - 0.5 + 1e-9))
        if c1 < c0 or r1 < r0:
            continue
        cx = x0 + (np.arange(c0, c1 + 1) + 0.5) * r
        cy = y0 + (np.arange(r0, r1 + 1) + 0.5) * r
        gx, gy = np.meshgrid(cx, cy)
        mask = points_in_ring(gx, gy, ring)
        window = out[r0 : r1 + 1, c0 : c1 + 1]
        window[mask & (window < 0)] = k
    return out


# ---------------------------------------------------------------------------
# layers


@dataclass
class GridLayer:
    spec: GridSpec
    values: np.ndarray
    altitude: float = 0.0
    name: str = "layer"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.spec.shape:
            raise PreconditionError(f"values shape {self.values.shape} != grid shape {self.spec.shape}")
        if not np.all(np.isfinite(self.values)):
            raise PreconditionError(f"layer {self.name!r} has non-finite values")

    def at(self, idx: int, idy: int) -> float:
        return float(self.values[idy, idx])

    def sample(self, p: Sequence[float]) -> float:
        idx, idy = world_to_index(p, self.spec)
        return float(self.values[idy, idx])


def rasterize_occupancy(obstacles: Sequence[ObstaclePolygon], spec: GridSpec, altitude: float) -> GridLayer:
    """Binary layer: 1 where a cell center lies in (or on) a footprint whose
    height reaches ``altitude``."""
    tall = [o.ring for o in obstacles if o.height >= altitude]
    owner = rasterize_rings(tall, spec)
    return GridLayer(spec, (owner >= 0).astype(np.float64), altitude, "obstacle")


def distance_transform(occupancy: GridLayer) -> GridLayer:
    """Center-to-center Euclidean distance (meters) to the nearest occupied
    cell. Occupied cells hold 0; a layer with no occupied cell holds the
    bbox diagonal everywhere."""
    spec = occupancy.spec
    d2 = _kernels.edt_sq((occupancy.values > 0).astype(np.uint8))
    dist = np.sqrt(d2) * spec.resolution
    dist[~np.isfinite(dist)] = spec.bbox.diagonal
    return GridLayer(spec, dist, occupancy.altitude, "distance")


# ---------------------------------------------------------------------------
# persistence: JSON sidecar + little-endian float32 payload


def _sidecar(layer: GridLayer) -> dict:
    b = layer.spec.bbox
    return {
        "name": layer.name,
        "bbox": {"x_min": b.x_min, "y_min": b.y_min, "x_max": b.x_max, "y_max": b.y_max},
        "resolution": layer.spec.resolution,
        "altitude": layer.altitude,
        "n_rows": layer.spec.n_rows,
        "n_cols": layer.spec.n_cols,
        "dtype": "<f4",
        "row_order": "south_to_north",
    }


def save_layer(layer: GridLayer, directory: str | PathLike) -> tuple[str, str]:
    """Write ``<name>.json`` and ``<name>.f32`` into ``directory``.

    The payload is float32, so a reload is bit-exact only for values that
    float32 represents exactly (map sets are quantized at build time).
    """
    os.makedirs(directory, exist_ok=True)
    meta_path = os.path.join(directory, f"{layer.name}.json")
    data_path = os.path.join(directory, f"{layer.name}.f32")
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(_sidecar(layer), fh, indent=1)
        fh.write("\n")
    layer.values.astype("<f4").tofile(data_path)
    return meta_path, data_path


def load_layer(directory: str | PathLike, name: str) -> GridLayer:
    meta_path = os.path.join(directory, f"{name}.json")
    data_path = os.path.join(directory, f"{name}.f32")
    try:
        with open(meta_path, encoding="utf-8") as fh:
            meta = json.load(fh)
        raw = np.fromfile(data_path, dtype="<f4")
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read layer {name!r} from {directory}: {exc}") from None
    b = meta["bbox"]
    spec = GridSpec(BoundingBox(b["x_min"], b["y_min"], b["x_max"], b["y_max"]), meta["resolution"])
    if (spec.n_rows, spec.n_cols) != (meta["n_rows"], meta["n_cols"]) or raw.size != spec.size:
        raise DataError(f"layer {name!r}: payload size does not match its sidecar")
    return GridLayer(spec, raw.reshape(spec.shape).astype(np.float64), meta["altitude"], meta["name"])
