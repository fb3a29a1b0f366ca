import json

import pytest

from uasplan.errors import BoundsError, CapacityError, PreconditionError, SceneParseError, SceneSchemaError
from uasplan.world import (
    BoundingBox,
    SynthConfig,
    load_scene,
    save_scene,
    scene_to_dict,
    synth_scene,
    validate_scene,
)


def minimal_doc():
    return {
        "bbox": {"x_min": 0, "y_min": 0, "x_max": 100, "y_max": 100},
        "obstacles": [{"ring": [[10, 10], [20, 10], [20, 20], [10, 20]], "height": 50}],
        "census": [],
        "satellites": [{"x": 0, "y": 0, "z": 2e7}, {"x": 1e7, "y": 0, "z": 2e7},
                       {"x": 0, "y": 1e7, "z": 2e7}, {"x": -1e7, "y": -1e7, "z": 1.5e7}],
    }


def test_minimal_scene_loads():
    sc = load_scene(minimal_doc())
    assert len(sc.obstacles) == 1
    assert sc.obstacles[0].height == 50
    assert len(sc.satellites) == 4
    assert validate_scene(sc) == []


def test_load_from_json_text():
    assert load_scene(json.dumps(minimal_doc())) == load_scene(minimal_doc())


def test_self_intersecting_ring_is_parse_error():
    doc = minimal_doc()
    doc["obstacles"][0]["ring"] = [[10, 10], [20, 20], [20, 10], [10, 20]]
    with pytest.raises(SceneParseError):
        load_scene(doc)


def test_missing_height_is_schema_error():
    doc = minimal_doc()
    del doc["obstacles"][0]["height"]
    with pytest.raises(SceneSchemaError):
        load_scene(doc)


def test_missing_zoning_is_schema_error():
    doc = minimal_doc()
    doc["census"] = [{"ring": [[0, 0], [50, 0], [50, 50]], "population": 3}]
    with pytest.raises(SceneSchemaError):
        load_scene(doc)


def test_geometry_outside_bbox_is_bounds_error():
    doc = minimal_doc()
    doc["obstacles"][0]["ring"] = [[90, 90], [110, 90], [110, 99], [90, 99]]
    with pytest.raises(BoundsError):
        load_scene(doc)


def test_indivisible_bbox_rejected_for_default_resolutions():
    doc = minimal_doc()
    doc["bbox"]["x_max"] = 101
    with pytest.raises(SceneSchemaError):
        load_scene(doc)
    assert load_scene(doc, resolutions=()).bbox.x_max == 101


def test_round_trip_200_block_city():
    cfg = SynthConfig(bbox=BoundingBox(0, 0, 1000, 800), obstacle_count=300, block_grid=(20, 10), seed=11)
    sc = synth_scene(cfg)
    assert len(sc.census) == 200
    again = load_scene(save_scene(sc))
    assert again == sc
    assert save_scene(again) == save_scene(sc)


def test_synth_is_deterministic():
    assert synth_scene(SynthConfig(seed=7)) == synth_scene(SynthConfig(seed=7))
    assert synth_scene(SynthConfig(seed=7)) != synth_scene(SynthConfig(seed=8))


def test_synth_zero_obstacles():
    assert synth_scene(SynthConfig(obstacle_count=0)).obstacles == ()


def test_synth_fifty_rectangles_valid():
    sc = synth_scene(SynthConfig(obstacle_count=50, seed=3))
    assert len(sc.obstacles) == 50
    assert validate_scene(sc, resolutions=(2, 5, 10)) == []
    for ob in sc.obstacles:
        xs = [p[0] for p in ob.ring]
        ys = [p[1] for p in ob.ring]
        assert max(xs) > min(xs) and max(ys) > min(ys)


def test_synth_capacity_error():
    with pytest.raises(CapacityError):
        synth_scene(SynthConfig(obstacle_count=65, block_grid=(4, 4)))


def test_synth_bad_heights():
    with pytest.raises(PreconditionError):
        synth_scene(SynthConfig(height_range=(0, 10)))


def test_validate_flags_zero_height():
    sc = load_scene(minimal_doc())
    doc = scene_to_dict(sc)
    doc["obstacles"][0]["height"] = 0
    bad = sc.__class__(sc.bbox, (sc.obstacles[0].__class__(sc.obstacles[0].ring, 0.0),), (), sc.satellites)
    report = validate_scene(bad)
    assert len(report) == 1
    assert report[0].feature == "obstacles[0]"


def test_validate_flags_census_crossing_bbox():
    sc = synth_scene(SynthConfig(bbox=BoundingBox(0, 0, 100, 100), obstacle_count=0, block_grid=(2, 2)))
    blk = sc.census[0]
    moved = blk.__class__(tuple((x - 5, y) for x, y in blk.ring), blk.population, blk.zoning)
    bad = sc.__class__(sc.bbox, (), (moved,) + sc.census[1:], sc.satellites)
    report = validate_scene(bad)
    assert [v.kind for v in report] == ["bounds"]
    assert report[0].feature == "census[0]"
