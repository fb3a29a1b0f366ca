"""Monte Carlo experiments: sample start/goal pairs and weight vectors, run
every planner on every instance, and aggregate the results.

Each run gets its own seed derived from ``(master seed, instance, planner)``
and results are sorted before output, so the record set does not depend
on the worker count. Wall-clock fields are kept out of the main record
table and written to a separate JSON timings file.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from os import PathLike
from typing import Any, Mapping, Sequence

import numpy as np

from .cost import WeightVector
from .errors import EmptyDomainError, PreconditionError
from .metrics import DAY, MetricMapSet, build_map_set
from .planners import ALGORITHMS, BitStarParams, PlanProblem, PlanResult, plan
from .world import SynthConfig, WorldScene, read_scene, synth_scene

log = logging.getLogger(__name__)

# labels carried into every summary so artifact choices are never mistaken
# for published settings
ARTIFACT_DEFAULTS = {
    "weights": "w0~U[0.1,1], w1..w4~U[0,1], renormalized to sum 1",
    "instances": "start/goal cell centers, stratified over bbox quadrants",
    "seeds": "SeedSequence(master, stream, instance[, planner])",
}

RECORD_FIELDS = (
    "instance", "resolution", "altitude", "day_night", "planner",
    "start_x", "start_y", "goal_x", "goal_y",
    "w0", "w_gps", "w_lidar", "w_pop", "w_risk", "seed",
    "status", "total", "distance_m", "gps", "lidar", "population", "risk",
    "cells_visited", "expanded_nodes", "samples_drawn", "batches_completed",
)

_STREAM_INSTANCES, _STREAM_WEIGHTS, _STREAM_PLANNER = 0, 1, 2


def _derive(*keys: int) -> int:
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


# ---------------------------------------------------------------------------
# sampling


def _quadrants(maps: MetricMapSet, free: np.ndarray) -> list[np.ndarray]:
    """Free flat indices split by which quadrant of the bbox holds the cell center."""
    spec = maps.spec
    cx, cy = spec.centers()
    b = spec.bbox
    mx = 0.5 * (b.x_min + b.x_max)
    my = 0.5 * (b.y_min + b.y_max)
    east = cx.ravel()[free] >= mx
    north = cy.ravel()[free] >= my
    return [free[~east & ~north], free[east & ~north], free[east & north], free[~east & north]]


def sample_instances(maps: MetricMapSet, n: int, seed: int) -> list[tuple[tuple[float, float], tuple[float, float]]]:
    """``n`` start/goal pairs at free cell centers.

    Instance ``i`` draws its start from quadrant ``i mod 4`` and its goal
    from a different quadrant, cycling through all pairings. Empty
    quadrants fall back to the whole free set.

    Raises:
        EmptyDomainError: the map has no free cell.
    """
    if n < 1:
        raise PreconditionError("n must be >= 1")
    spec = maps.spec
    free = np.nonzero(maps.obstacle.values.ravel() == 0)[0]
    if free.size == 0:
        raise EmptyDomainError("no free cells to sample start/goal pairs from")
    quads = [q if q.size else free for q in _quadrants(maps, free)]
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        qs = i % 4
        qg = (qs + 1 + (i // 4) % 3) % 4
        s = int(quads[qs][rng.integers(quads[qs].size)])
        g = int(quads[qg][rng.integers(quads[qg].size)])
        while g == s and free.size > 1:
            g = int(quads[qg][rng.integers(quads[qg].size)])
        out.append((spec.cell_center(*spec.unflat(s)), spec.cell_center(*spec.unflat(g))))
    return out


def sample_weights(seed: int) -> WeightVector:
    """``w0 ~ U[0.1, 1]``, ``w1..w4 ~ U[0, 1]``, scaled to sum to 1."""
    rng = np.random.default_rng(seed)
    raw = np.concatenate([rng.uniform(0.1, 1.0, 1), rng.uniform(0.0, 1.0, 4)])
    return WeightVector(*(raw / raw.sum()).tolist())


# ---------------------------------------------------------------------------
# experiment


@dataclass
class ExperimentConfig:
    scene: WorldScene | str | Mapping[str, Any] | None = None
    resolutions: Sequence[float] = (5.0,)
    altitudes: Sequence[float] = (60.0,)
    day_night: str = DAY
    instance_count: int = 10
    seed: int = 0
    planners: Sequence[str] = ALGORITHMS
    deadline: float = 180.0
    batches: int = 5
    samples: int = 200
    hplus_mode: str = "aabb"
    d_thresh: float = 10.0
    workers: int = 1

    def __post_init__(self):
        if self.instance_count < 1:
            raise PreconditionError("instance_count must be >= 1")
        if not self.deadline > 0:
            raise PreconditionError("deadline must be > 0")
        unknown = [p for p in self.planners if p not in ALGORITHMS]
        if unknown:
            raise PreconditionError(f"unknown planners {unknown}")
        self.resolutions = tuple(float(r) for r in self.resolutions)
        self.altitudes = tuple(float(a) for a in self.altitudes)
        self.planners = tuple(self.planners)

    @classmethod
    def from_mapping(cls, doc: Mapping[str, Any], base_dir: str = ".") -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(doc) - known
        if extra:
            raise PreconditionError(f"unknown experiment keys {sorted(extra)}")
        kw = dict(doc)
        sc = kw.get("scene")
        if isinstance(sc, str) and not os.path.isabs(sc):
            kw["scene"] = os.path.join(base_dir, sc)
        return cls(**kw)

    def resolve_scene(self) -> WorldScene:
        sc = self.scene
        if isinstance(sc, WorldScene):
            return sc
        if isinstance(sc, str):
            return read_scene(sc)
        if isinstance(sc, Mapping):
            return synth_scene(SynthConfig.from_mapping(sc.get("synth", sc)))
        return synth_scene(SynthConfig())

    def echo(self) -> dict:
        doc = asdict(self) if not isinstance(self.scene, WorldScene) else {
            **{k: v for k, v in asdict(self).items() if k != "scene"}, "scene": "<in-memory scene>"}
        doc["resolutions"] = list(self.resolutions)
        doc["altitudes"] = list(self.altitudes)
        doc["planners"] = list(self.planners)
        return doc


@dataclass
class InstanceRecord:
    instance: int
    resolution: float
    altitude: float
    day_night: str
    planner: str
    start: tuple[float, float]
    goal: tuple[float, float]
    weights: WeightVector
    seed: int
    result: PlanResult = field(repr=False)

    def sort_key(self) -> tuple[int, int]:
        return self.instance, ALGORITHMS.index(self.planner)

    def row(self) -> dict:
        r = self.result
        b = r.breakdown
        w = self.weights
        row = {
            "instance": self.instance, "resolution": self.resolution, "altitude": self.altitude,
            "day_night": self.day_night, "planner": self.planner,
            "start_x": self.start[0], "start_y": self.start[1], "goal_x": self.goal[0], "goal_y": self.goal[1],
            "w0": w.w0, "w_gps": w.gps, "w_lidar": w.lidar, "w_pop": w.population, "w_risk": w.risk,
            "seed": self.seed, "status": r.status.value,
            "expanded_nodes": r.expanded_nodes, "samples_drawn": r.samples_drawn,
            "batches_completed": r.batches_completed,
        }
        for key in ("total", "distance_m", "gps", "lidar", "population", "risk", "cells_visited"):
            row[key] = getattr(b, key) if b is not None else ""
        return row


def _run_one(task) -> tuple[int, str, PlanResult]:
    instance, algo, maps, start, goal, weights, seed, cfg = task
    problem = PlanProblem(
        start, goal, maps, weights, deadline=cfg["deadline"],
        bitstar=BitStarParams(batches=cfg["batches"], samples=cfg["samples"], seed=seed),
        hplus_mode=cfg["hplus_mode"],
    )
    return instance, algo, plan(problem, algo)


def run_experiment(config: ExperimentConfig, maps_cache: dict | None = None) -> list[InstanceRecord]:
    """Run every planner on every sampled instance; records sorted by
    ``(instance, planner)``."""
    scene = config.resolve_scene()
    tasks = []
    meta = {}
    run_cfg = {"deadline": config.deadline, "batches": config.batches, "samples": config.samples,
               "hplus_mode": config.hplus_mode}
    instance = 0
    for mi, (res, alt) in enumerate((r, a) for r in config.resolutions for a in config.altitudes):
        key = (res, alt, config.day_night)
        maps = (maps_cache or {}).get(key)
        if maps is None:
            maps = build_map_set(scene, res, alt, config.day_night, d_thresh=config.d_thresh,
                                 workers=config.workers)
            if maps_cache is not None:
                maps_cache[key] = maps
        pairs = sample_instances(maps, config.instance_count, _derive(config.seed, _STREAM_INSTANCES, mi))
        for start, goal in pairs:
            weights = sample_weights(_derive(config.seed, _STREAM_WEIGHTS, instance))
            for algo in config.planners:
                seed = _derive(config.seed, _STREAM_PLANNER, instance, ALGORITHMS.index(algo))
                meta[(instance, algo)] = (res, alt, start, goal, weights, seed)
                tasks.append((instance, algo, maps, start, goal, weights, seed, run_cfg))
            instance += 1

    log.info("running %d plans on %d worker(s)", len(tasks), config.workers)
    if config.workers <= 1:
        results = [_run_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_one, tasks, chunksize=max(1, len(tasks) // (4 * config.workers))))

    records = []
    for inst, algo, result in results:
        res, alt, start, goal, weights, seed = meta[(inst, algo)]
        records.append(InstanceRecord(inst, res, alt, config.day_night, algo, start, goal, weights, seed, result))
    records.sort(key=InstanceRecord.sort_key)
    return records


# ---------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def write_records_csv(records: Sequence[InstanceRecord], path: str | PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_FIELDS)
        for rec in records:
            row = rec.row()
            writer.writerow([_fmt(row[k]) for k in RECORD_FIELDS])


def write_timings(records: Sequence[InstanceRecord], path: str | PathLike) -> None:
    """Wall-clock seconds per run; kept apart from the deterministic CSV."""
    rows = [{"instance": r.instance, "planner": r.planner, "elapsed": r.result.elapsed} for r in records]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rows, fh, indent=1)
        fh.write("\n")


def _mean(xs):
    return statistics.fmean(xs) if xs else None


def summarize(records: Sequence[InstanceRecord]) -> dict:
    """Per-planner solve rates and cost statistics.

    Cost statistics use only instances every listed planner solved; the
    distance ratio compares against PTP where both solved.
    """
    if not records:
        raise PreconditionError("no records to summarize")
    planners = sorted({r.planner for r in records}, key=ALGORITHMS.index)
    by_inst: dict[int, dict[str, InstanceRecord]] = {}
    for r in records:
        by_inst.setdefault(r.instance, {})[r.planner] = r
    common = sorted(i for i, runs in by_inst.items()
                    if all(p in runs and runs[p].result.solved for p in planners))
    out = {"planners": {}, "instances": len(by_inst), "commonly_solved": len(common),
           "artifact_defaults": ARTIFACT_DEFAULTS}
    for p in planners:
        runs = [r for r in records if r.planner == p]
        solved = [r for r in runs if r.result.solved]
        totals = [by_inst[i][p].result.total for i in common]
        ratios = []
        for r in solved:
            ptp = by_inst[r.instance].get("ptp")
            if ptp is not None and ptp.result.solved and ptp.result.breakdown.distance_m > 0:
                ratios.append(r.result.breakdown.distance_m / ptp.result.breakdown.distance_m)
        statuses: dict[str, int] = {}
        for r in runs:
            statuses[r.result.status.value] = statuses.get(r.result.status.value, 0) + 1
        out["planners"][p] = {
            "runs": len(runs),
            "solved": len(solved),
            "solve_rate": len(solved) / len(runs),
            "statuses": statuses,
            "mean_total_common": _mean(totals),
            "median_total_common": statistics.median(totals) if totals else None,
            "mean_distance_ratio_vs_ptp": _mean(ratios),
            "mean_expanded_nodes": _mean([r.result.expanded_nodes for r in runs]),
            "mean_samples_drawn": _mean([r.result.samples_drawn for r in runs]),
        }
    return out


def write_outputs(records: Sequence[InstanceRecord], out_dir: str | PathLike,
                  config: ExperimentConfig | None = None) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    write_records_csv(records, os.path.join(out_dir, "records.csv"))
    write_timings(records, os.path.join(out_dir, "timings.json"))
    summary = summarize(records)
    if config is not None:
        summary["config"] = config.echo()
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True, default=_json_default)
        fh.write("\n")
    return summary


def _json_default(o):
    if isinstance(o, float) and not math.isfinite(o):
        return None
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")
