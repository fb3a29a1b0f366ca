"""Scene model: bounding box, extruded building footprints, census blocks
and satellite positions, plus loading, saving and synthetic generation.

All geometry lives in one planar metric frame (easting, northing, altitude
above a flat ground plane at z = 0).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from os import PathLike
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    BoundsError,
    CapacityError,
    PreconditionError,
    SceneParseError,
    SceneSchemaError,
)

COMMERCIAL = "commercial"
RESIDENTIAL = "residential"
ZONINGS = (COMMERCIAL, RESIDENTIAL)

DEFAULT_RESOLUTIONS = (2.0, 5.0, 10.0)

Ring = tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class BoundingBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def contains(self, x: float, y: float) -> bool:
        """Closed containment test (edges count as inside)."""
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


@dataclass(frozen=True)
class ObstaclePolygon:
    ring: Ring
    height: float


@dataclass(frozen=True)
class CensusBlock:
    ring: Ring
    population: int
    zoning: str


@dataclass(frozen=True)
class SatellitePosition:
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


@dataclass(frozen=True)
class WorldScene:
    bbox: BoundingBox
    obstacles: tuple[ObstaclePolygon, ...] = ()
    census: tuple[CensusBlock, ...] = ()
    satellites: tuple[SatellitePosition, ...] = ()
    gamma_commercial: float = 3.0
    gamma_residential: float = 0.5

    def gamma(self, zoning: str) -> float:
        return self.gamma_commercial if zoning == COMMERCIAL else self.gamma_residential


@dataclass(frozen=True)
class Violation:
    """One violated scene invariant.

    ``kind`` is one of ``"bbox"``, ``"geometry"``, ``"bounds"`` or ``"value"``;
    ``feature`` names the offending element, e.g. ``"obstacles[3]"``.
    """

    kind: str
    feature: str
    message: str

    def __str__(self) -> str:
        return f"{self.feature}: {self.message}"


# ---------------------------------------------------------------------------
# geometry helpers


def _orient(ax, ay, bx, by, cx, cy) -> float:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _on_segment(ax, ay, bx, by, px, py) -> bool:
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def _segments_intersect(p1, p2, p3, p4) -> bool:
    d1 = _orient(*p3, *p4, *p1)
    d2 = _orient(*p3, *p4, *p2)
    d3 = _orient(*p1, *p2, *p3)
    d4 = _orient(*p1, *p2, *p4)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True
    if d1 == 0 and _on_segment(*p3, *p4, *p1):
        return True
    if d2 == 0 and _on_segment(*p3, *p4, *p2):
        return True
    if d3 == 0 and _on_segment(*p1, *p2, *p3):
        return True
    if d4 == 0 and _on_segment(*p1, *p2, *p4):
        return True
    return False


def ring_area(ring: Sequence[tuple[float, float]]) -> float:
    """Signed shoelace area (positive for counter-clockwise rings)."""
    n = len(ring)
    acc = 0.0
    for i in range(n):
        x0, y0 = ring[i]
        x1, y1 = ring[(i + 1) % n]
        acc += x0 * y1 - x1 * y0
    return 0.5 * acc


def ring_problem(ring: Sequence[tuple[float, float]]) -> str | None:
    """Return a description of why ``ring`` is not a simple polygon, or None."""
    n = len(ring)
    if n < 3:
        return f"ring has {n} vertices, need at least 3"
    for i in range(n):
        if ring[i] == ring[(i + 1) % n]:
            return f"repeated consecutive vertex at position {i}"
    if ring_area(ring) == 0.0:
        return "ring has zero area"
    edges = [(ring[i], ring[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                # adjacent edges share a vertex; only a fold-back is invalid
                a0, a1 = edges[i]
                b0, b1 = edges[j]
                shared = a1 if j == i + 1 else a0
                other_a = a0 if j == i + 1 else a1
                other_b = b1 if j == i + 1 else b0
                if _orient(*other_a, *shared, *other_b) == 0 and (
                    _on_segment(*shared, *other_a, *other_b)
                    or _on_segment(*shared, *other_b, *other_a)
                ):
                    return f"edges {i} and {j} overlap"
                continue
            if _segments_intersect(*edges[i], *edges[j]):
                return f"edges {i} and {j} intersect"
    return None


def _normalize_ring(raw: Any, feature: str) -> Ring:
    if not isinstance(raw, (list, tuple)):
        raise SceneParseError(f"{feature}: ring must be a list of [x, y] pairs")
    pts = []
    for k, v in enumerate(raw):
        if not isinstance(v, (list, tuple)) or len(v) != 2:
            raise SceneParseError(f"{feature}: vertex {k} is not an [x, y] pair")
        try:
            x, y = float(v[0]), float(v[1])
        except (TypeError, ValueError):
            raise SceneParseError(f"{feature}: vertex {k} is not numeric") from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise SceneParseError(f"{feature}: vertex {k} is not finite")
        pts.append((x, y))
    if len(pts) >= 2 and pts[0] == pts[-1]:
        pts.pop()
    return tuple(pts)


# ---------------------------------------------------------------------------
# validation


def _divides(length: float, res: float) -> bool:
    q = length / res
    return abs(q - round(q)) <= 1e-9 * max(1.0, abs(q))


def validate_scene(
    scene: WorldScene, resolutions: Iterable[float] = ()
) -> list[Violation]:
    """List every violated scene invariant; an empty list means valid.

    ``resolutions`` optionally names grid resolutions whose cell size must
    divide the bounding box exactly.
    """
    out: list[Violation] = []
    b = scene.bbox
    if not (b.x_min < b.x_max and b.y_min < b.y_max):
        out.append(Violation("bbox", "bbox", "requires x_min < x_max and y_min < y_max"))
        return out
    for res in resolutions:
        if not (_divides(b.width, res) and _divides(b.height, res)):
            out.append(
                Violation("bbox", "bbox", f"extent {b.width}x{b.height} not divisible by resolution {res}")
            )

    def check_ring(ring: Ring, feature: str) -> None:
        problem = ring_problem(ring)
        if problem is not None:
            out.append(Violation("geometry", feature, problem))
        for k, (x, y) in enumerate(ring):
            if not b.contains(x, y):
                out.append(Violation("bounds", feature, f"vertex {k} ({x}, {y}) outside bbox"))
                break

    for i, ob in enumerate(scene.obstacles):
        feature = f"obstacles[{i}]"
        check_ring(ob.ring, feature)
        if not (ob.height > 0 and math.isfinite(ob.height)):
            out.append(Violation("value", feature, f"height must be > 0, got {ob.height}"))
    for i, blk in enumerate(scene.census):
        feature = f"census[{i}]"
        check_ring(blk.ring, feature)
        if blk.population < 0:
            out.append(Violation("value", feature, f"population must be >= 0, got {blk.population}"))
        if blk.zoning not in ZONINGS:
            out.append(Violation("value", feature, f"zoning must be one of {ZONINGS}, got {blk.zoning!r}"))
    for i, sat in enumerate(scene.satellites):
        if not sat.z > 0:
            out.append(Violation("value", f"satellites[{i}]", f"z must be > 0, got {sat.z}"))
    if not scene.gamma_commercial > 0:
        out.append(Violation("value", "gammas.commercial", "must be > 0"))
    if not scene.gamma_residential > 0:
        out.append(Violation("value", "gammas.residential", "must be > 0"))
    return out


_ERROR_FOR_KIND = {
    "bbox": SceneSchemaError,
    "geometry": SceneParseError,
    "bounds": BoundsError,
    "value": SceneSchemaError,
}


# ---------------------------------------------------------------------------
# load / save


def _require(mapping: Mapping, key: str, feature: str):
    if not isinstance(mapping, Mapping):
        raise SceneSchemaError(f"{feature}: expected an object")
    if key not in mapping:
        raise SceneSchemaError(f"{feature}: missing required key {key!r}")
    return mapping[key]


def _number(value, feature: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SceneSchemaError(f"{feature}: expected a number, got {value!r}")
    return float(value)


def load_scene(
    document: str | bytes | Mapping[str, Any],
    resolutions: Iterable[float] = DEFAULT_RESOLUTIONS,
) -> WorldScene:
    """Parse and validate a scene document (JSON text or an already-decoded mapping).

    Raises:
        SceneSchemaError: missing keys, wrong types, invalid values.
        SceneParseError: malformed or self-intersecting rings.
        BoundsError: geometry outside the bounding box.
    """
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SceneParseError(f"document is not valid JSON: {exc}") from None
    else:
        doc = document

    raw_bbox = _require(doc, "bbox", "document")
    if isinstance(raw_bbox, Mapping):
        coords = [_number(_require(raw_bbox, k, "bbox"), f"bbox.{k}") for k in ("x_min", "y_min", "x_max", "y_max")]
    elif isinstance(raw_bbox, (list, tuple)) and len(raw_bbox) == 4:
        coords = [_number(v, "bbox") for v in raw_bbox]
    else:
        raise SceneSchemaError("bbox: expected {x_min, y_min, x_max, y_max}")
    bbox = BoundingBox(*coords)

    obstacles = []
    for i, raw in enumerate(doc.get("obstacles", [])):
        feature = f"obstacles[{i}]"
        ring = _normalize_ring(_require(raw, "ring", feature), feature)
        height = _number(_require(raw, "height", feature), f"{feature}.height")
        obstacles.append(ObstaclePolygon(ring, height))

    census = []
    for i, raw in enumerate(doc.get("census", [])):
        feature = f"census[{i}]"
        ring = _normalize_ring(_require(raw, "ring", feature), feature)
        pop = _require(raw, "population", feature)
        if isinstance(pop, bool) or not isinstance(pop, int):
            raise SceneSchemaError(f"{feature}.population: expected an integer, got {pop!r}")
        zoning = _require(raw, "zoning", feature)
        if zoning not in ZONINGS:
            raise SceneSchemaError(f"{feature}.zoning: expected one of {ZONINGS}, got {zoning!r}")
        census.append(CensusBlock(ring, pop, zoning))

    satellites = []
    for i, raw in enumerate(doc.get("satellites", [])):
        feature = f"satellites[{i}]"
        satellites.append(
            SatellitePosition(*(_number(_require(raw, k, feature), f"{feature}.{k}") for k in "xyz"))
        )

    gammas = doc.get("gammas", {})
    scene = WorldScene(
        bbox=bbox,
        obstacles=tuple(obstacles),
        census=tuple(census),
        satellites=tuple(satellites),
        gamma_commercial=_number(gammas.get(COMMERCIAL, 3.0), "gammas.commercial"),
        gamma_residential=_number(gammas.get(RESIDENTIAL, 0.5), "gammas.residential"),
    )
    problems = validate_scene(scene, resolutions)
    if problems:
        first = problems[0]
        raise _ERROR_FOR_KIND[first.kind](str(first))
    return scene


def scene_to_dict(scene: WorldScene) -> dict[str, Any]:
    # floats throughout so the text is identical before and after a reload
    b = scene.bbox
    f = float

    def ring(r):
        return [[f(x), f(y)] for x, y in r]

    return {
        "bbox": {"x_min": f(b.x_min), "y_min": f(b.y_min), "x_max": f(b.x_max), "y_max": f(b.y_max)},
        "obstacles": [{"ring": ring(o.ring), "height": f(o.height)} for o in scene.obstacles],
        "census": [
            {"ring": ring(c.ring), "population": int(c.population), "zoning": c.zoning}
            for c in scene.census
        ],
        "satellites": [{"x": f(s.x), "y": f(s.y), "z": f(s.z)} for s in scene.satellites],
        "gammas": {COMMERCIAL: f(scene.gamma_commercial), RESIDENTIAL: f(scene.gamma_residential)},
    }


def save_scene(scene: WorldScene) -> str:
    """Serialize ``scene`` to JSON text; floats use shortest round-trip repr."""
    return json.dumps(scene_to_dict(scene), indent=1)


def read_scene(path: str | PathLike, resolutions: Iterable[float] = DEFAULT_RESOLUTIONS) -> WorldScene:
    with open(path, encoding="utf-8") as fh:
        return load_scene(fh.read(), resolutions)


def write_scene(scene: WorldScene, path: str | PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(save_scene(scene))
        fh.write("\n")


# ---------------------------------------------------------------------------
# synthetic scenes


@dataclass(frozen=True)
class SynthConfig:
    bbox: BoundingBox = BoundingBox(0.0, 0.0, 320.0, 320.0)
    obstacle_count: int = 20
    height_range: tuple[float, float] = (10.0, 150.0)
    block_grid: tuple[int, int] = (4, 4)
    seed: int = 0
    satellite_count: int = 8
    street_fraction: float = 0.15
    gamma_commercial: float = 3.0
    gamma_residential: float = 0.5
    max_population: int = 5000

    @classmethod
    def from_mapping(cls, cfg: Mapping[str, Any]) -> "SynthConfig":
        kw = dict(cfg)
        bbox = kw.pop("bbox", None)
        if bbox is not None and not isinstance(bbox, BoundingBox):
            if isinstance(bbox, Mapping):
                bbox = BoundingBox(bbox["x_min"], bbox["y_min"], bbox["x_max"], bbox["y_max"])
            else:
                bbox = BoundingBox(*bbox)
        if bbox is not None:
            kw["bbox"] = bbox
        for key in ("height_range", "block_grid"):
            if key in kw:
                kw[key] = tuple(kw[key])
        return cls(**kw)


SATELLITE_RANGE_M = 2.02e7


def synth_scene(config: SynthConfig | Mapping[str, Any]) -> WorldScene:
    """Generate a deterministic street-grid city for ``config``.

    Buildings are axis-aligned rectangles placed in lots (2x2 per block) of a
    jittered street grid; census blocks tile the bounding box with a
    checkerboard of commercial/residential zoning.

    Raises:
        CapacityError: more obstacles requested than there are lots.
    """
    cfg = config if isinstance(config, SynthConfig) else SynthConfig.from_mapping(config)
    if cfg.obstacle_count < 0:
        raise PreconditionError("obstacle_count must be >= 0")
    h_lo, h_hi = cfg.height_range
    if not (h_hi >= h_lo > 0):
        raise PreconditionError("height_range must satisfy max >= min > 0")
    nx, ny = cfg.block_grid
    if nx < 1 or ny < 1:
        raise PreconditionError("block_grid entries must be >= 1")
    capacity = 4 * nx * ny
    if cfg.obstacle_count > capacity:
        raise CapacityError(
            f"{cfg.obstacle_count} obstacles do not fit in {capacity} lots of a {nx}x{ny} block grid"
        )

    rng = np.random.default_rng(cfg.seed)
    b = cfg.bbox
    bw = b.width / nx
    bh = b.height / ny
    street = cfg.street_fraction * min(bw, bh)
    lot_w = (bw - street) / 2.0
    lot_h = (bh - street) / 2.0
    if lot_w <= 0 or lot_h <= 0:
        raise CapacityError("street width leaves no room for buildings")

    lots = rng.permutation(capacity)[: cfg.obstacle_count]
    obstacles = []
    for lot in sorted(int(v) for v in lots):
        block, sub = divmod(lot, 4)
        bi, bj = block % nx, block // nx
        si, sj = sub % 2, sub // 2
        x0 = b.x_min + bi * bw + street / 2 + si * lot_w
        y0 = b.y_min + bj * bh + street / 2 + sj * lot_h
        fw, fh, jx, jy = rng.uniform(0.45, 0.9, size=2).tolist() + rng.uniform(0.0, 1.0, size=2).tolist()
        w, h = fw * lot_w, fh * lot_h
        ox = x0 + jx * (lot_w - w)
        oy = y0 + jy * (lot_h - h)
        height = float(rng.uniform(h_lo, h_hi))
        ring = ((ox, oy), (ox + w, oy), (ox + w, oy + h), (ox, oy + h))
        obstacles.append(ObstaclePolygon(ring, height))

    xs = [b.x_min + i * bw for i in range(nx)] + [b.x_max]
    ys = [b.y_min + j * bh for j in range(ny)] + [b.y_max]
    pops = rng.integers(0, cfg.max_population + 1, size=nx * ny)
    census = []
    for j in range(ny):
        for i in range(nx):
            ring = ((xs[i], ys[j]), (xs[i + 1], ys[j]), (xs[i + 1], ys[j + 1]), (xs[i], ys[j + 1]))
            zoning = COMMERCIAL if (i + j) % 2 == 0 else RESIDENTIAL
            census.append(CensusBlock(ring, int(pops[j * nx + i]), zoning))

    cx = 0.5 * (b.x_min + b.x_max)
    cy = 0.5 * (b.y_min + b.y_max)
    az = rng.uniform(0.0, 2.0 * math.pi, size=cfg.satellite_count)
    el = np.radians(rng.uniform(15.0, 85.0, size=cfg.satellite_count))
    satellites = tuple(
        SatellitePosition(
            float(cx + SATELLITE_RANGE_M * math.cos(e) * math.cos(a)),
            float(cy + SATELLITE_RANGE_M * math.cos(e) * math.sin(a)),
            float(SATELLITE_RANGE_M * math.sin(e)),
        )
        for a, e in zip(az.tolist(), el.tolist())
    )
    return WorldScene(
        bbox=b,
        obstacles=tuple(obstacles),
        census=tuple(census),
        satellites=satellites,
        gamma_commercial=cfg.gamma_commercial,
        gamma_residential=cfg.gamma_residential,
    )
