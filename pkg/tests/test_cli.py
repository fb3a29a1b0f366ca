import argparse
import json

import pytest

from uasplan import cli
from uasplan.render import read_ppm


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    scene = d / "scene.json"
    assert cli.main(["-q", "synth", "--out", str(scene), "--size", "100", "--obstacles", "6",
                     "--blocks", "2", "--seed", "2"]) == 0
    maps = d / "maps"
    assert cli.main(["-q", "gen-maps", "--scene", str(scene), "--res", "5", "--alt", "30",
                     "--lidar-scans", "36", "--lidar-beams", "4", "--out", str(maps)]) == 0
    return d, scene, maps


def test_validate(workspace, capsys):
    _, scene, _ = workspace
    assert cli.main(["-q", "validate", "--scene", str(scene)]) == 0
    assert capsys.readouterr().out.startswith("ok:")


def test_validate_bad_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["-q", "validate", "--scene", str(bad)]) == 3
    assert cli.main(["-q", "validate", "--scene", str(tmp_path / "missing.json")]) == 3


def test_plan_writes_document(workspace):
    d, _, maps = workspace
    out = d / "plan.json"
    code = cli.main(["-q", "plan", "--maps", str(maps), "--algo", "astar_dist", "--start", "2.5,2.5",
                     "--goal", "97.5,97.5", "--weights", "1,0,0,0,0", "--out", str(out)])
    doc = json.loads(out.read_text())
    assert code == (0 if doc["status"] == "solved" else 1)
    assert "elapsed" not in doc and doc["problem"]["weights"] == [1.0, 0, 0, 0, 0]


def test_usage_errors(workspace):
    d, _, maps = workspace
    assert cli.main(["-q", "plan", "--start", "1,1", "--goal", "2,2"]) == 2
    assert cli.main(["-q", "plan", "--maps", str(maps), "--start", "1,1", "--goal", "2,2",
                     "--weights", "1,2"]) == 2
    assert cli.main(["-q", "gen-maps", "--day", "--night", "--scene", "x", "--out", "y"]) == 2
    assert cli.main(["-q", "plan", "--algo", "dfs"]) == 2
    assert cli.main([]) == 2
    assert cli.main(["-q", "--config", str(d / "nope.json"), "validate", "--scene", "x"]) == 2


def test_data_errors(workspace):
    d, _, _ = workspace
    assert cli.main(["-q", "plan", "--maps", str(d / "nothing"), "--start", "1,1", "--goal", "2,2"]) == 3


def test_config_precedence(tmp_path, monkeypatch):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"threads": 3, "plan": {"deadline": 7, "seed": 4}}))
    parser = cli.build_parser()
    args = parser.parse_args(["plan", "--seed", "9"])
    merged = cli.resolve(args, cli._load_config(str(cfg)))
    assert merged["deadline"] == 7  # file beats default
    assert merged["seed"] == 9  # flag beats file
    assert merged["batches"] == cli.DEFAULTS["plan"]["batches"]
    assert merged["threads"] == 3
    args = parser.parse_args(["--threads", "2", "plan"])
    assert cli.resolve(args, cli._load_config(str(cfg)))["threads"] == 2


def test_config_from_environment(workspace, tmp_path, monkeypatch):
    _, _, maps = workspace
    cfg = tmp_path / "env.json"
    cfg.write_text(json.dumps({"plan": {"algo": "ptp", "start": [2.5, 2.5], "goal": [7.5, 2.5]}}))
    monkeypatch.setenv(cli.CONFIG_ENV, str(cfg))
    out = tmp_path / "p.json"
    assert cli.main(["-q", "plan", "--maps", str(maps), "--out", str(out)]) in (0, 1)
    assert json.loads(out.read_text())["algo"] == "ptp"


def test_render(workspace):
    d, _, maps = workspace
    out = d / "plan2.json"
    cli.main(["-q", "plan", "--maps", str(maps), "--algo", "ptp", "--start", "2.5,2.5",
              "--goal", "7.5,2.5", "--out", str(out)])
    img = d / "img.ppm"
    assert cli.main(["-q", "render", "--maps", str(maps), "--path", str(out), "--scale", "2",
                     "--out", str(img)]) == 0
    assert read_ppm(img).shape == (40, 40, 3)


def test_montecarlo(tmp_path):
    exp = tmp_path / "exp.json"
    exp.write_text(json.dumps({
        "scene": {"synth": {"bbox": [0, 0, 100, 100], "obstacle_count": 4, "block_grid": [2, 2]}},
        "instance_count": 1, "planners": ["ptp", "astar_dist"], "batches": 1, "samples": 40,
    }))
    out = tmp_path / "mc"
    assert cli.main(["-q", "montecarlo", "--config", str(exp), "--out", str(out)]) == 0
    assert (out / "records.csv").exists() and (out / "summary.json").exists()
    exp.write_text(json.dumps({"bogus": 1}))
    assert cli.main(["-q", "montecarlo", "--config", str(exp), "--out", str(out)]) == 2


def test_point_parser():
    assert cli._point("1.5,2") == (1.5, 2.0)
    with pytest.raises(argparse.ArgumentTypeError):
        cli._point("1;2")
