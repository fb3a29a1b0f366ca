"""Command-line entry point.

Subcommands: ``synth``, ``validate``, ``gen-maps``, ``plan``, ``montecarlo``
and ``render``. Option values resolve as built-in defaults < config file <
command-line flags. The config file is JSON with one object per
subcommand (``{"plan": {"deadline": 30}}``) plus optional top-level
``threads``; its path comes from ``--config`` or ``$UASPLAN_CONFIG``.

Exit codes: 0 success, 1 planner found no path or timed out (results are
still written), 2 usage or configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Any, Sequence

from .errors import DataError, PreconditionError, UasPlanError, UsageError

log = logging.getLogger("uasplan")

EXIT_OK, EXIT_PLAN_FAILED, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3
CONFIG_ENV = "UASPLAN_CONFIG"

DEFAULTS: dict[str, dict[str, Any]] = {
    "synth": {"seed": 0, "obstacles": 20, "size": 320.0, "blocks": 4, "satellites": 8},
    "validate": {},
    "gen-maps": {"res": 5.0, "alt": 60.0, "day_night": "day", "d_thresh": 10.0, "gdop_thresh": 20.0,
                 "gdop_cut": None, "lidar_beams": 16, "lidar_scans": 360, "lidar_range": 100.0},
    "plan": {"algo": "astar_plus", "weights": "1,0,0,0,0", "deadline": 180.0, "batches": 5,
             "samples": 200, "seed": 0, "hplus_mode": "aabb"},
    "montecarlo": {},
    "render": {"layer": "total", "scale": 4},
}


def _point(text: str) -> tuple[float, float]:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y but got {text!r}") from None
    return x, y


def build_parser() -> argparse.ArgumentParser:
    from .planners import ALGORITHMS

    p = argparse.ArgumentParser(prog="uasplan", description="Urban cost maps and multi-objective UAS path planning.")
    p.add_argument("--config", dest="config_file", help=f"JSON config file (default: ${CONFIG_ENV})")
    p.add_argument("--threads", type=int, default=None, help="worker threads/processes")
    p.add_argument("-q", "--quiet", action="store_true", help="only log warnings")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")

    s = sub.add_parser("synth", help="write a synthetic scene")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--obstacles", type=int)
    s.add_argument("--size", type=float, help="square bbox edge length in meters")
    s.add_argument("--blocks", type=int, help="census blocks per side")
    s.add_argument("--satellites", type=int)

    v = sub.add_parser("validate", help="check a scene file")
    v.add_argument("--scene", required=True)

    g = sub.add_parser("gen-maps", help="build the metric map set for one resolution/altitude")
    g.add_argument("--scene")
    g.add_argument("--res", type=float)
    g.add_argument("--alt", type=float)
    dn = g.add_mutually_exclusive_group()
    dn.add_argument("--day", dest="day_night", action="store_const", const="day")
    dn.add_argument("--night", dest="day_night", action="store_const", const="night")
    g.add_argument("--d-thresh", type=float)
    g.add_argument("--gdop-thresh", type=float)
    g.add_argument("--gdop-cut", type=float)
    g.add_argument("--lidar-beams", type=int)
    g.add_argument("--lidar-scans", type=int)
    g.add_argument("--lidar-range", type=float)
    g.add_argument("--out")

    pl = sub.add_parser("plan", help="plan one path over a map set")
    pl.add_argument("--maps")
    pl.add_argument("--algo", choices=ALGORITHMS)
    pl.add_argument("--start", type=_point)
    pl.add_argument("--goal", type=_point)
    pl.add_argument("--weights", help="w0,gps,lidar,pop,risk")
    pl.add_argument("--deadline", type=float)
    pl.add_argument("--batches", type=int)
    pl.add_argument("--samples", type=int)
    pl.add_argument("--seed", type=int)
    pl.add_argument("--hplus-mode", choices=("aabb", "full"))
    pl.add_argument("--out", help="write the result document here instead of stdout")

    mc = sub.add_parser("montecarlo", help="run a Monte Carlo experiment")
    mc.add_argument("--config", dest="experiment", help="experiment JSON file")
    mc.add_argument("--out")

    r = sub.add_parser("render", help="write a PPM heatmap with optional path overlays")
    r.add_argument("--maps")
    r.add_argument("--path", dest="paths", action="append", default=[], help="plan result JSON (repeatable)")
    r.add_argument("--layer", choices=("total", "obstacle", "gps", "lidar", "population", "risk"))
    r.add_argument("--scale", type=int)
    r.add_argument("--out")
    return p


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    return doc


def resolve(args: argparse.Namespace, file_cfg: dict) -> dict:
    """Merge defaults < config file section < explicit flags."""
    cmd = args.command
    merged = dict(DEFAULTS.get(cmd, {}))
    section = file_cfg.get(cmd, {})
    if not isinstance(section, dict):
        raise UsageError(f"config section {cmd!r} must be an object")
    for key, value in section.items():
        merged[key.replace("-", "_")] = value
    for key, value in vars(args).items():
        if key in ("command", "config_file", "quiet", "threads"):
            continue
        if value is not None and not (key == "paths" and value == [] and "paths" in merged):
            merged[key] = value
    threads = args.threads if args.threads is not None else file_cfg.get("threads", 1)
    merged["threads"] = int(threads)
    if merged["threads"] < 1:
        raise UsageError("--threads must be >= 1")
    return merged


def _need(cfg: dict, *keys: str) -> None:
    missing = [k for k in keys if cfg.get(k) in (None, "")]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(cfg: dict) -> int:
    from .world import BoundingBox, SynthConfig, synth_scene, write_scene

    size = float(cfg["size"])
    sc = synth_scene(SynthConfig(
        bbox=BoundingBox(0.0, 0.0, size, size), obstacle_count=int(cfg["obstacles"]),
        block_grid=(int(cfg["blocks"]), int(cfg["blocks"])), seed=int(cfg["seed"]),
        satellite_count=int(cfg["satellites"]),
    ))
    write_scene(sc, cfg["out"])
    log.info("wrote scene with %d obstacles to %s", len(sc.obstacles), cfg["out"])
    return EXIT_OK


def cmd_validate(cfg: dict) -> int:
    from .world import load_scene, validate_scene

    try:
        with open(cfg["scene"], "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read scene {cfg['scene']}: {exc}") from None
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise DataError(f"scene is not valid JSON: {exc}") from None
    scene = load_scene(doc, resolutions=())
    problems = validate_scene(scene)
    for v in problems:
        print(f"{v.kind}\t{v.feature}\t{v.message}")
    if problems:
        return EXIT_DATA
    print(f"ok: {len(scene.obstacles)} obstacles, {len(scene.census)} census blocks, "
          f"{len(scene.satellites)} satellites")
    return EXIT_OK


def cmd_gen_maps(cfg: dict) -> int:
    from .metrics import GpsConfig, LidarConfig, build_map_set, layer_correlation, save_map_set
    from .world import read_scene

    _need(cfg, "scene", "out")
    scene = read_scene(cfg["scene"], resolutions=(float(cfg["res"]),))
    try:
        gps = GpsConfig(gdop_thresh=float(cfg["gdop_thresh"]),
                        gdop_cut=None if cfg["gdop_cut"] is None else float(cfg["gdop_cut"]))
        lidar = LidarConfig(b_lidar=int(cfg["lidar_beams"]), k_lidar=int(cfg["lidar_scans"]),
                            r_lidar=float(cfg["lidar_range"]))
    except PreconditionError as exc:
        raise UsageError(str(exc)) from None
    maps = build_map_set(scene, float(cfg["res"]), float(cfg["alt"]), cfg["day_night"], gps, lidar,
                         float(cfg["d_thresh"]), workers=cfg["threads"])
    path = save_map_set(maps, cfg["out"])
    log.info("wrote %s (gps/lidar cost correlation %.3f)", path, layer_correlation(maps))
    return EXIT_OK


def cmd_plan(cfg: dict) -> int:
    from .cost import WeightVector
    from .metrics import load_map_set
    from .planners import BitStarParams, PlanProblem, plan

    _need(cfg, "maps", "start", "goal")
    maps = load_map_set(cfg["maps"])
    try:
        weights = WeightVector.parse(cfg["weights"])
        problem = PlanProblem(
            tuple(cfg["start"]), tuple(cfg["goal"]), maps, weights, deadline=float(cfg["deadline"]),
            bitstar=BitStarParams(batches=int(cfg["batches"]), samples=int(cfg["samples"]), seed=int(cfg["seed"])),
            hplus_mode=cfg["hplus_mode"],
        )
        result = plan(problem, cfg["algo"])
    except PreconditionError as exc:
        raise UsageError(str(exc)) from None
    doc = {
        "problem": {"start": list(problem.start), "goal": list(problem.goal), "weights": list(weights.as_tuple()),
                    "maps": os.path.abspath(cfg["maps"]), "hplus_mode": problem.hplus_mode},
        **result.to_dict(include_elapsed=False),
    }
    text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    if cfg.get("out"):
        with open(cfg["out"], "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    log.info("%s: %s in %.3f s", result.algo, result.status.value, result.elapsed)
    return EXIT_OK if result.solved else EXIT_PLAN_FAILED


def cmd_montecarlo(cfg: dict) -> int:
    from .harness import ExperimentConfig, run_experiment, write_outputs

    _need(cfg, "experiment", "out")
    path = cfg["experiment"]
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read experiment config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"experiment config {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError("experiment config must be a JSON object")
    doc.setdefault("workers", cfg["threads"])
    try:
        exp = ExperimentConfig.from_mapping(doc, base_dir=os.path.dirname(os.path.abspath(path)))
    except (PreconditionError, TypeError) as exc:
        raise UsageError(f"bad experiment config: {exc}") from None
    log.info("experiment: %s", json.dumps(exp.echo(), sort_keys=True, default=str))
    records = run_experiment(exp)
    summary = write_outputs(records, cfg["out"], exp)
    for name, s in summary["planners"].items():
        log.info("%-13s solved %d/%d", name, s["solved"], s["runs"])
    return EXIT_OK


def cmd_render(cfg: dict) -> int:
    from .metrics import load_map_set, normalize_total
    from .render import heatmap, write_ppm

    _need(cfg, "maps", "out")
    maps = load_map_set(cfg["maps"])
    layer = normalize_total(maps) if cfg["layer"] == "total" else getattr(maps, cfg["layer"])
    paths = []
    for p in cfg.get("paths") or []:
        try:
            with open(p, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read path document {p}: {exc}") from None
        pts = doc.get("path") if isinstance(doc, dict) else doc
        if not isinstance(pts, list):
            raise DataError(f"{p} holds no path")
        if pts:
            paths.append(pts)
    img = heatmap(layer, maps.occupied(), scale=int(cfg["scale"]), paths=paths)
    write_ppm(img, cfg["out"])
    log.info("wrote %dx%d image to %s", img.shape[1], img.shape[0], cfg["out"])
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "validate": cmd_validate,
    "gen-maps": cmd_gen_maps,
    "plan": cmd_plan,
    "montecarlo": cmd_montecarlo,
    "render": cmd_render,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        file_cfg = _load_config(args.config_file or os.environ.get(CONFIG_ENV))
        cfg = resolve(args, file_cfg)
        log.info("resolved config for %s: %s", args.command, json.dumps(cfg, sort_keys=True, default=str))
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"uasplan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"uasplan: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PreconditionError as exc:
        print(f"uasplan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UasPlanError as exc:
        print(f"uasplan: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
