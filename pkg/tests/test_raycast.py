import numpy as np
import pytest

from conftest import square
from oracles import segment_hits_prism
from uasplan.errors import PreconditionError
from uasplan.raycast import PrismSet, ray_hits_obstacle
from uasplan.world import ObstaclePolygon

WALL = square(40, 40, 20, 100)


def test_vertical_ray_beside_wall_misses():
    assert not ray_hits_obstacle((35, 50, 10), (35, 50, 500), [WALL])


def test_horizontal_ray_through_interior_hits():
    assert ray_hits_obstacle((10, 50, 30), (90, 50, 30), [WALL])


def test_ray_over_roof_misses_and_through_roof_hits():
    assert not ray_hits_obstacle((10, 50, 101), (90, 50, 101), [WALL])
    assert ray_hits_obstacle((50, 50, 150), (50, 50, 50.5), [WALL])


def test_segment_stopping_short():
    assert not ray_hits_obstacle((10, 50, 30), (39, 50, 30), [WALL])


def test_coincident_endpoints_rejected():
    with pytest.raises(PreconditionError):
        ray_hits_obstacle((1, 1, 1), (1, 1, 1), [WALL])


def test_empty_obstacle_set():
    assert not ray_hits_obstacle((0, 0, 0), (10, 10, 10), [])


def test_random_rays_agree_with_shapely_oracle():
    rng = np.random.default_rng(0)
    obstacles = [
        square(10, 10, 15, 40),
        square(60, 20, 25, 80),
        ObstaclePolygon(((30, 60), (70, 55), (75, 90), (50, 80), (35, 95)), 60.0),
        ObstaclePolygon(((5, 50), (20, 50), (20, 70), (12, 60), (5, 70)), 120.0),
    ]
    prisms = PrismSet(obstacles)
    o = np.column_stack([rng.uniform(0, 100, 1000), rng.uniform(0, 100, 1000), rng.uniform(0, 150, 1000)])
    t = np.column_stack([rng.uniform(0, 100, 1000), rng.uniform(0, 100, 1000), rng.uniform(0, 150, 1000)])
    got = prisms.segments_hit(o, t)
    for i in range(1000):
        expected = any(segment_hits_prism(o[i], t[i], ob.ring, ob.height) for ob in obstacles)
        assert got[i] == expected, i
    assert 100 < got.sum() < 900
    # symmetry
    assert np.array_equal(prisms.segments_hit(t, o), got)
