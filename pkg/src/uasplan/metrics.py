"""Map-based metrics (GPS, lidar, obstacle, population, proximity risk),
the composite cost-map set, and the min-max normalized total map.

Layers in a :class:`MetricMapSet` are stored as costs (larger is worse):
``c_gps = 1 - m_gps``, ``c_lidar = 1 - m_lidar``, ``c_pop = m_pop``,
``c_risk = 1 - m_risk`` and ``c_obs = m_obs``.
"""

from __future__ import annotations

import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from os import PathLike
from typing import Any, Sequence

import numpy as np

from . import _kernels
from .errors import DataError, GeometryError, PreconditionError
from .grid import (
    GridLayer,
    GridSpec,
    distance_transform,
    load_layer,
    rasterize_occupancy,
    rasterize_rings,
    save_layer,
    world_to_index,
)
from .raycast import PrismSet
from .world import COMMERCIAL, SatellitePosition, WorldScene

log = logging.getLogger(__name__)

DAY = "day"
NIGHT = "night"
LAYER_NAMES = ("obstacle", "gps", "lidar", "population", "risk")
COST_LAYER_NAMES = ("gps", "lidar", "population", "risk")
DEFAULT_D_THRESH = 10.0
_SINGULAR_COND = 1e12


@dataclass(frozen=True)
class GpsConfig:
    gdop_thresh: float = 20.0
    gdop_cut: float | None = None
    min_sats: int = 4

    def __post_init__(self):
        if not self.gdop_thresh > 1:
            raise PreconditionError("gdop_thresh must be > 1")
        if self.gdop_cut is not None and not self.gdop_cut >= 1:
            raise PreconditionError("gdop_cut must be >= 1")

    @property
    def cut(self) -> float:
        return self.gdop_thresh if self.gdop_cut is None else self.gdop_cut


@dataclass(frozen=True)
class LidarConfig:
    b_lidar: int = 16
    k_lidar: int = 360
    r_lidar: float = 100.0
    elevation_span: tuple[float, float] = (-15.0, 15.0)
    mount_height: float = 0.0

    def __post_init__(self):
        lo, hi = self.elevation_span
        if self.b_lidar < 1 or self.k_lidar < 1 or not self.r_lidar > 0 or lo > hi:
            raise PreconditionError(f"invalid lidar configuration {self}")

    def beam_directions(self) -> np.ndarray:
        """Unit beam directions shaped ``(k_lidar, b_lidar, 3)``."""
        az = 2.0 * np.pi * np.arange(self.k_lidar) / self.k_lidar
        el = np.radians(np.linspace(self.elevation_span[0], self.elevation_span[1], self.b_lidar))
        ce, se = np.cos(el), np.sin(el)
        out = np.empty((self.k_lidar, self.b_lidar, 3))
        out[:, :, 0] = np.cos(az)[:, None] * ce[None, :]
        out[:, :, 1] = np.sin(az)[:, None] * ce[None, :]
        out[:, :, 2] = se[None, :]
        return out


# ---------------------------------------------------------------------------
# GPS


def _sat_array(sats: Sequence[SatellitePosition] | np.ndarray) -> np.ndarray:
    if isinstance(sats, np.ndarray):
        return sats.reshape(-1, 3).astype(np.float64)
    return np.array([[s.x, s.y, s.z] for s in sats], dtype=np.float64).reshape(-1, 3)


def geometry_matrix(receiver: Sequence[float], sats) -> np.ndarray:
    """Linearized pseudorange matrix: unit line-of-sight rows plus a -1 clock column."""
    rc = np.asarray(receiver, dtype=np.float64)
    s = _sat_array(sats)
    diff = rc[None, :] - s
    r = np.sqrt(np.sum(diff * diff, axis=1))
    if np.any(r == 0):
        raise PreconditionError("receiver coincides with a satellite")
    return np.hstack([diff / r[:, None], -np.ones((len(s), 1))])


def dops(receiver: Sequence[float], sats) -> dict[str, float]:
    """GDOP, PDOP and TDOP from the diagonal of ``(G^T G)^-1``."""
    s = _sat_array(sats)
    if len(s) < 4:
        raise PreconditionError(f"need at least 4 satellites, got {len(s)}")
    g = geometry_matrix(receiver, s)
    normal = g.T @ g
    if not np.linalg.cond(normal) < _SINGULAR_COND:
        raise GeometryError("satellite geometry is degenerate")
    cov = np.linalg.inv(normal)
    pdop = math.sqrt(cov[0, 0] + cov[1, 1] + cov[2, 2])
    tdop = math.sqrt(cov[3, 3])
    return {"gdop": math.sqrt(pdop * pdop + tdop * tdop), "pdop": pdop, "tdop": tdop}


def gdop(receiver: Sequence[float], visible_sats) -> float:
    return dops(receiver, visible_sats)["gdop"]


def gps_metric_from_gdop(value: float | np.ndarray, cfg: GpsConfig = GpsConfig()):
    m = (cfg.gdop_thresh - np.minimum(value, cfg.cut)) / (cfg.gdop_thresh - 1.0)
    return np.clip(m, 0.0, 1.0)


def visible_satellites(receiver: Sequence[float], scene: WorldScene,
                       prisms: PrismSet | None = None) -> np.ndarray:
    sats = _sat_array(scene.satellites)
    if len(sats) == 0:
        return sats
    prisms = prisms if prisms is not None else PrismSet(scene.obstacles)
    origins = np.broadcast_to(np.asarray(receiver, dtype=np.float64), sats.shape)
    blocked = prisms.segments_hit(origins, sats)
    return sats[~blocked]


def gps_metric(receiver: Sequence[float], scene: WorldScene, cfg: GpsConfig = GpsConfig(),
               prisms: PrismSet | None = None) -> float:
    """m_gps at one receiver position; 0 with fewer than ``min_sats`` in view."""
    vis = visible_satellites(receiver, scene, prisms)
    if len(vis) < cfg.min_sats:
        return 0.0
    try:
        value = gdop(receiver, vis)
    except GeometryError:
        log.warning("degenerate satellite geometry at %s; m_gps set to 0", tuple(receiver))
        return 0.0
    return float(gps_metric_from_gdop(value, cfg))


def _gps_rows(receivers: np.ndarray, sats: np.ndarray, prisms: PrismSet, cfg: GpsConfig) -> np.ndarray:
    n, s = receivers.shape[0], sats.shape[0]
    if s == 0:
        return np.zeros(n)
    visible = np.empty((n, s), dtype=bool)
    for k in range(s):
        targets = np.broadcast_to(sats[k], receivers.shape)
        visible[:, k] = ~prisms.segments_hit(receivers, targets)
    diff = receivers[:, None, :] - sats[None, :, :]
    r = np.sqrt(np.sum(diff * diff, axis=2))
    g = np.concatenate([diff / r[:, :, None], -np.ones((n, s, 1))], axis=2)
    g = g * visible[:, :, None]
    normal = np.einsum("nsi,nsj->nij", g, g)
    count = visible.sum(axis=1)
    out = np.zeros(n)
    ok = count >= cfg.min_sats
    if np.any(ok):
        idx = np.nonzero(ok)[0]
        cond = np.linalg.cond(normal[idx])
        good = cond < _SINGULAR_COND
        if not np.all(good):
            log.warning("%d cells with degenerate satellite geometry; m_gps set to 0", int((~good).sum()))
        idx = idx[good]
        if idx.size:
            cov = np.linalg.inv(normal[idx])
            pdop = np.sqrt(cov[:, 0, 0] + cov[:, 1, 1] + cov[:, 2, 2])
            tdop = np.sqrt(cov[:, 3, 3])
            out[idx] = gps_metric_from_gdop(np.sqrt(pdop * pdop + tdop * tdop), cfg)
    return out


# ---------------------------------------------------------------------------
# lidar


def lidar_metric(pos: Sequence[float], scene: WorldScene, cfg: LidarConfig = LidarConfig(),
                 prisms: PrismSet | None = None) -> float:
    """Fraction of azimuth scan positions with at least one beam return."""
    prisms = prisms if prisms is not None else PrismSet(scene.obstacles)
    if len(prisms) == 0:
        return 0.0
    origin = np.asarray(pos, dtype=np.float64).reshape(1, 3).copy()
    origin[0, 2] += cfg.mount_height
    count = _kernels.lidar_returns(origin, cfg.beam_directions(), cfg.r_lidar, prisms.packed())
    return float(count[0]) / cfg.k_lidar


def _lidar_rows(positions: np.ndarray, prisms: PrismSet, cfg: LidarConfig) -> np.ndarray:
    if len(prisms) == 0:
        return np.zeros(positions.shape[0])
    origins = positions.copy()
    origins[:, 2] += cfg.mount_height
    counts = _kernels.lidar_returns(origins, cfg.beam_directions(), cfg.r_lidar, prisms.packed())
    return counts / cfg.k_lidar


# ---------------------------------------------------------------------------
# population


def census_raster(scene: WorldScene, spec: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell census population and commercial flag.

    Each cell takes the first block containing its center; uncovered cells
    get population 0 and residential zoning.
    """
    owner = rasterize_rings([b.ring for b in scene.census], spec)
    pops = np.array([b.population for b in scene.census] + [0], dtype=np.float64)
    comm = np.array([b.zoning == COMMERCIAL for b in scene.census] + [False])
    return pops[owner], comm[owner]


def modified_population(pop_census, commercial, day: bool, gamma_commercial: float = 3.0,
                        gamma_residential: float = 0.5):
    """Daytime counts scale by the zoning factor; nighttime counts are the census."""
    pop_census = np.asarray(pop_census, dtype=np.float64)
    if not day:
        return pop_census
    gamma = np.where(commercial, gamma_commercial, gamma_residential)
    return gamma * pop_census


def population_metric(cell: tuple[int, int], raster: tuple[np.ndarray, np.ndarray], day: bool,
                      gammas: tuple[float, float], pop_norm: float) -> float:
    """m_pop for one ``(idx, idy)`` cell of a census raster."""
    if not pop_norm > 0:
        return 0.0
    idx, idy = cell
    pop, comm = raster
    value = modified_population(pop[idy, idx], comm[idy, idx], day, *gammas)
    return float(value) / pop_norm


def population_layer(scene: WorldScene, spec: GridSpec, day: bool) -> np.ndarray:
    pop, comm = census_raster(scene, spec)
    mod = modified_population(pop, comm, day, scene.gamma_commercial, scene.gamma_residential)
    norm = float(mod.max()) if mod.size else 0.0
    if not norm > 0:
        return np.zeros(spec.shape)
    return mod / norm


# ---------------------------------------------------------------------------
# proximity risk


def risk_metric(d_close, d_thresh: float = DEFAULT_D_THRESH):
    """Return ``(m_risk, c_risk)``; m_risk rises linearly to 1 at ``d_thresh``."""
    if not d_thresh > 0:
        raise PreconditionError("d_thresh must be > 0")
    m = np.minimum(np.asarray(d_close, dtype=np.float64) / d_thresh, 1.0)
    if m.ndim == 0:
        m = float(m)
    return m, 1.0 - m


# ---------------------------------------------------------------------------
# composite map set


@dataclass
class MetricMapSet:
    obstacle: GridLayer
    gps: GridLayer
    lidar: GridLayer
    population: GridLayer
    risk: GridLayer
    day_night: str = DAY
    config: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        spec = self.obstacle.spec
        for name in LAYER_NAMES:
            layer = getattr(self, name)
            if layer.spec != spec:
                raise PreconditionError(f"layer {name!r} is not co-registered with the obstacle layer")

    @property
    def spec(self) -> GridSpec:
        return self.obstacle.spec

    @property
    def altitude(self) -> float:
        return self.obstacle.altitude

    @property
    def resolution(self) -> float:
        return self.spec.resolution

    def layers(self) -> dict[str, GridLayer]:
        return {name: getattr(self, name) for name in LAYER_NAMES}

    def cost_stack(self) -> np.ndarray:
        """The four cost layers ``(gps, lidar, population, risk)`` stacked on axis 0."""
        return np.stack([getattr(self, n).values for n in COST_LAYER_NAMES])

    def occupied(self) -> np.ndarray:
        return self.obstacle.values > 0

    def is_free(self, p: Sequence[float]) -> bool:
        idx, idy = world_to_index(p, self.spec)
        return not self.obstacle.values[idy, idx] > 0


def _quantize(values: np.ndarray) -> np.ndarray:
    # layers persist as float32; keep in-memory values on the same grid of
    # representable numbers so a saved and reloaded set plans identically
    return np.asarray(values, dtype=np.float32).astype(np.float64)


def _chunked(fn, n_rows: int, workers: int):
    bounds = np.linspace(0, n_rows, min(n_rows, max(1, workers) * 4) + 1).astype(int)
    chunks = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    if workers <= 1:
        return np.concatenate([fn(a, b) for a, b in chunks])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.concatenate(list(pool.map(lambda ab: fn(*ab), chunks)))


def build_map_set(
    scene: WorldScene,
    resolution: float,
    altitude: float,
    day_night: str = DAY,
    gps_cfg: GpsConfig = GpsConfig(),
    lidar_cfg: LidarConfig = LidarConfig(),
    d_thresh: float = DEFAULT_D_THRESH,
    workers: int = 1,
) -> MetricMapSet:
    """Evaluate every metric at the cell centers of one ``(resolution, altitude)`` grid."""
    if day_night not in (DAY, NIGHT):
        raise PreconditionError(f"day_night must be 'day' or 'night', got {day_night!r}")
    if not altitude > 0:
        raise PreconditionError("altitude must be > 0")
    spec = GridSpec(scene.bbox, resolution)
    prisms = PrismSet(scene.obstacles)

    occ = rasterize_occupancy(scene.obstacles, spec, altitude)
    dist = distance_transform(occ)
    _, c_risk = risk_metric(dist.values, d_thresh)

    cx, cy = spec.centers()
    points = np.stack([cx.ravel(), cy.ravel(), np.full(spec.size, float(altitude))], axis=1)
    n_cols = spec.n_cols
    sats = _sat_array(scene.satellites)

    def gps_chunk(r0, r1):
        return _gps_rows(points[r0 * n_cols : r1 * n_cols], sats, prisms, gps_cfg)

    def lidar_chunk(r0, r1):
        return _lidar_rows(points[r0 * n_cols : r1 * n_cols], prisms, lidar_cfg)

    m_gps = _chunked(gps_chunk, spec.n_rows, workers).reshape(spec.shape)
    m_lidar = _chunked(lidar_chunk, spec.n_rows, workers).reshape(spec.shape)
    m_pop = population_layer(scene, spec, day_night == DAY)

    config = {
        "resolution": spec.resolution,
        "altitude": float(altitude),
        "day_night": day_night,
        "gps": {"gdop_thresh": gps_cfg.gdop_thresh, "gdop_cut": gps_cfg.cut, "min_sats": gps_cfg.min_sats},
        "lidar": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(lidar_cfg).items()},
        "d_thresh": d_thresh,
        "gammas": {"commercial": scene.gamma_commercial, "residential": scene.gamma_residential},
    }

    def layer(values, name):
        return GridLayer(spec, _quantize(values), float(altitude), name)

    return MetricMapSet(
        obstacle=layer(occ.values, "obstacle"),
        gps=layer(1.0 - m_gps, "gps"),
        lidar=layer(1.0 - m_lidar, "lidar"),
        population=layer(m_pop, "population"),
        risk=layer(c_risk, "risk"),
        day_night=day_night,
        config=config,
    )


def total_cost(maps: MetricMapSet) -> np.ndarray:
    return maps.gps.values + maps.lidar.values + maps.population.values + maps.risk.values


def normalize_total(maps: MetricMapSet) -> GridLayer:
    """Min-max normalized sum of the four cost layers (obstacles excluded).

    A constant total maps to all zeros.
    """
    total = total_cost(maps)
    lo = total.min()
    hi = total.max()
    span = hi - lo
    if span == 0:
        norm = np.zeros_like(total)
    else:
        norm = (total - lo) / span
    return GridLayer(maps.spec, norm, maps.altitude, "total_norm")


def layer_correlation(maps: MetricMapSet) -> float:
    """Pearson correlation of the GPS and lidar cost layers (NaN if either is constant)."""
    a = maps.gps.values.ravel()
    b = maps.lidar.values.ravel()
    if a.std() == 0 or b.std() == 0:
        return float("nan")
    return float(np.corrcoef(a, b)[0, 1])


# ---------------------------------------------------------------------------
# persistence


MANIFEST = "manifest.json"


def save_map_set(maps: MetricMapSet, directory: str | PathLike) -> str:
    os.makedirs(directory, exist_ok=True)
    for name, layer in maps.layers().items():
        save_layer(layer, directory)
    manifest = {
        "layers": list(LAYER_NAMES),
        "resolution": maps.resolution,
        "altitude": maps.altitude,
        "day_night": maps.day_night,
        "config": maps.config,
    }
    path = os.path.join(directory, MANIFEST)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


def load_map_set(directory: str | PathLike) -> MetricMapSet:
    path = os.path.join(directory, MANIFEST)
    try:
        with open(path, encoding="utf-8") as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read map manifest {path}: {exc}") from None
    layers = {name: load_layer(directory, name) for name in LAYER_NAMES}
    return MetricMapSet(**layers, day_night=manifest.get("day_night", DAY), config=manifest.get("config", {}))
