import csv
import json
import math

import numpy as np
import pytest
from scipy import integrate

from conftest import random_maps
from uasplan.errors import EmptyDomainError, PreconditionError
from uasplan.grid import GridSpec
from uasplan.harness import (
    RECORD_FIELDS,
    ExperimentConfig,
    run_experiment,
    sample_instances,
    sample_weights,
    summarize,
    write_outputs,
)
from uasplan.world import BoundingBox

SPEC = GridSpec(BoundingBox(0, 0, 100, 100), 5.0)
SMALL = {"synth": {"bbox": [0, 0, 100, 100], "obstacle_count": 6, "block_grid": [2, 2], "seed": 1}}


def test_sample_instances_deterministic_and_free():
    maps = random_maps(SPEC, 0, occupied=[(x, 4) for x in range(20)])
    a = sample_instances(maps, 12, 7)
    assert a == sample_instances(maps, 12, 7)
    assert a != sample_instances(maps, 12, 8)
    for s, g in a:
        assert s != g
        for p in (s, g):
            idx, idy = int(p[0] // 5), int(p[1] // 5)
            assert maps.obstacle.values[idy, idx] == 0
            assert p == SPEC.cell_center(idx, idy)
    # instance i starts in quadrant i mod 4
    q = [(s[0] >= 50) + 2 * (s[1] >= 50) for s, _ in a]
    assert q[:4] == [0, 1, 3, 2]


def test_sample_instances_empty_domain():
    full = random_maps(SPEC, 0, occ=np.ones(SPEC.shape))
    with pytest.raises(EmptyDomainError):
        sample_instances(full, 3, 0)
    with pytest.raises(PreconditionError):
        sample_instances(random_maps(SPEC, 0), 0, 0)


def _irwin_hall4(s):
    return sum((-1) ** k * math.comb(4, k) * max(s - k, 0.0) ** 3 for k in range(5)) / 6.0


def _w0_moment(p):
    f = lambda s, a: (a / (a + s)) ** p * _irwin_hall4(s) / 0.9
    val, _ = integrate.dblquad(f, 0.1, 1.0, 0.0, 4.0, epsabs=1e-10)
    return val


def test_weights_sum_and_means():
    ws = np.array([sample_weights(s).as_tuple() for s in range(1000)])
    assert np.allclose(ws.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(ws >= 0) and np.all(ws[:, 0] > 0)
    m1, m2 = _w0_moment(1), _w0_moment(2)
    sigma0 = math.sqrt(m2 - m1 * m1)
    assert abs(ws[:, 0].mean() - m1) < 3 * sigma0 / math.sqrt(1000)
    ej = (1 - m1) / 4
    for j in range(1, 5):
        assert abs(ws[:, j].mean() - ej) < 3 * ws[:, j].std() / math.sqrt(1000)


@pytest.fixture(scope="module")
def records():
    cfg = ExperimentConfig(scene=SMALL, instance_count=2, seed=3, batches=2, samples=80, deadline=60)
    return run_experiment(cfg), cfg


def test_record_count_and_order(records):
    recs, _ = records
    assert len(recs) == 10
    assert [r.planner for r in recs[:5]] == ["ptp", "astar_dist", "astar_plus", "bitstar_dist", "bitstar_plus"]
    keys = [r.sort_key() for r in recs]
    assert keys == sorted(keys)
    # same instance shares start, goal and weights across planners
    for i in (0, 1):
        rs = [r for r in recs if r.instance == i]
        assert len({(r.start, r.goal, r.weights) for r in rs}) == 1


def test_outputs(records, tmp_path):
    recs, cfg = records
    summary = write_outputs(recs, tmp_path, cfg)
    with open(tmp_path / "records.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == RECORD_FIELDS and len(rows) == 11
    assert "elapsed" not in rows[0]
    numeric = [i for i, k in enumerate(RECORD_FIELDS) if k not in ("day_night", "planner", "status")]
    for row in rows[1:]:
        for i in numeric:
            if row[i] != "":
                float(row[i])  # plain numbers only, no numpy reprs
    timings = json.loads((tmp_path / "timings.json").read_text())
    assert len(timings) == 10 and all(t["elapsed"] >= 0 for t in timings)
    on_disk = json.loads((tmp_path / "summary.json").read_text())
    assert on_disk["config"]["instance_count"] == 2
    assert summary["instances"] == 2
    assert set(summary["planners"]) <= {"ptp", "astar_dist", "astar_plus", "bitstar_dist", "bitstar_plus"}
    for p, s in summary["planners"].items():
        assert s["runs"] == 2 and 0 <= s["solve_rate"] <= 1


def test_forced_timeout():
    cfg = ExperimentConfig(scene=SMALL, instance_count=1, planners=("astar_dist", "bitstar_dist"),
                           deadline=1e-9, batches=1, samples=50)
    recs = run_experiment(cfg)
    assert {r.result.status.value for r in recs} == {"timeout"}
    s = summarize(recs)
    assert s["commonly_solved"] == 0
    assert s["planners"]["astar_dist"]["mean_total_common"] is None


def test_summarize_rejects_empty_and_config_rejects_unknown_keys():
    with pytest.raises(PreconditionError):
        summarize([])
    with pytest.raises(PreconditionError):
        ExperimentConfig.from_mapping({"instances": 3})
    with pytest.raises(PreconditionError):
        ExperimentConfig(instance_count=0)
