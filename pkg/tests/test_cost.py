import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_maps as _random_maps
from uasplan.cost import (
    WeightVector,
    cell_cost_field,
    path_cost,
    path_distance,
    transition_cost,
)
from uasplan.errors import InfeasiblePathError, InfeasibleTransitionError, PreconditionError
from uasplan.grid import GridSpec, trace_segment
from uasplan.world import BoundingBox

SPEC = GridSpec(BoundingBox(0, 0, 100, 100), 5.0)


def random_maps(seed=0, occupied=()):
    return _random_maps(SPEC, seed, occupied)


def test_weight_vector_parse_and_validate():
    w = WeightVector.parse("1, 0.5,0,0,0.25")
    assert w.as_tuple() == (1.0, 0.5, 0.0, 0.0, 0.25)
    assert WeightVector.parse(str(w)) == w
    for bad in ("1,2,3", "a,b,c,d,e", "0,0,0,0,0", "-1,0,0,0,1"):
        with pytest.raises(PreconditionError):
            WeightVector.parse(bad)


def test_transition_examples():
    maps = random_maps()
    c5 = SPEC.cell_center(5, 5)
    c6 = SPEC.cell_center(6, 6)
    assert transition_cost(c5, c6, maps, WeightVector(1, 0, 0, 0, 0)) == pytest.approx(7.0711, abs=1e-4)
    maps.gps.values[6, 6] = 0.3
    assert transition_cost(c5, c6, maps, WeightVector(0, 1, 0, 0, 0)) == 0.3


def test_transition_into_obstacle():
    maps = random_maps(occupied=[(6, 6)])
    with pytest.raises(InfeasibleTransitionError) as exc:
        transition_cost(SPEC.cell_center(5, 5), SPEC.cell_center(6, 6), maps, WeightVector())
    assert exc.value.cell == (6, 6)


def test_transition_direct_formula():
    maps = random_maps(3)
    rng = np.random.default_rng(3)
    for _ in range(200):
        a, b = rng.uniform(0, 99.9, 2), rng.uniform(0, 99.9, 2)
        w = WeightVector(*rng.uniform(0, 1, 5))
        idx, idy = int(b[0] // 5), int(b[1] // 5)
        expected = w.w0 * math.hypot(*(b - a)) + (
            w.gps * maps.gps.values[idy, idx] + w.lidar * maps.lidar.values[idy, idx]
            + w.population * maps.population.values[idy, idx] + w.risk * maps.risk.values[idy, idx])
        assert transition_cost(a, b, maps, w) == pytest.approx(expected, rel=1e-12)
        assert transition_cost(a, b, maps, w) >= w.w0 * math.hypot(*(b - a))


def test_path_cost_examples():
    maps = random_maps()
    w = WeightVector(1, 0, 0, 0, 0)
    assert path_cost([(12.5, 12.5)], maps, w).total == 0
    path = [SPEC.cell_center(i, 4) for i in range(3)]
    b = path_cost(path, maps, w)
    assert b.total == 10.0 and b.distance_m == 10.0 and b.cells_visited == 3


def test_path_distance_examples():
    assert path_distance([(0, 0), (3, 4)]) == 5.0
    assert path_distance([(1, 1)]) == 0.0
    with pytest.raises(PreconditionError):
        path_distance([])
    rng = np.random.default_rng(0)
    pts = rng.uniform(0, 100, (11, 2))
    assert path_distance(pts) == pytest.approx(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum(), rel=1e-12)


def test_grid_path_cost_equals_sum_of_transitions():
    maps = random_maps(5)
    w = WeightVector(0.4, 0.1, 0.2, 0.2, 0.1)
    cells = [(2, 2), (3, 3), (4, 3), (5, 4), (5, 5), (4, 6)]
    path = [SPEC.cell_center(*c) for c in cells]
    total = sum(transition_cost(a, b, maps, w) for a, b in zip(path[:-1], path[1:]))
    assert path_cost(path, maps, w).total == pytest.approx(total, rel=1e-12)


def test_polyline_cost_matches_cell_accumulation():
    maps = random_maps(7)
    w = WeightVector(0.3, 0.2, 0.1, 0.3, 0.1)
    rng = np.random.default_rng(7)
    field = cell_cost_field(maps, w)
    for _ in range(50):
        pts = [tuple(p) for p in rng.uniform(0, 99.9, (6, 2))]
        acc = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            cells = trace_segment(a, b, SPEC)
            acc += sum(field[idy, idx] for idx, idy in cells[1:])
        expected = w.w0 * path_distance(pts) + acc
        bd = path_cost(pts, maps, w)
        assert bd.total == pytest.approx(expected, rel=1e-9)
        recomposed = w.w0 * bd.distance_m + sum(wj * s for wj, s in zip(w.layer_weights, bd.layer_sums()))
        assert bd.total == pytest.approx(recomposed, rel=1e-9)


def test_path_cost_reports_occupied_cell():
    maps = random_maps(occupied=[(3, 4)])
    with pytest.raises(InfeasiblePathError) as exc:
        path_cost([SPEC.cell_center(0, 4), SPEC.cell_center(6, 4)], maps, WeightVector())
    assert exc.value.cell == (3, 4)


cell = st.tuples(st.integers(0, 19), st.integers(0, 19))


@settings(max_examples=100, deadline=None)
@given(st.lists(cell, min_size=2, max_size=6), st.lists(cell, min_size=1, max_size=6))
def test_path_cost_additive_at_shared_endpoint(first, second):
    maps = random_maps(11)
    w = WeightVector(0.5, 0.2, 0.1, 0.1, 0.1)
    p1 = [SPEC.cell_center(*c) for c in first]
    p2 = [p1[-1]] + [SPEC.cell_center(*c) for c in second]
    whole = path_cost(p1 + p2[1:], maps, w).total
    assert whole == pytest.approx(path_cost(p1, maps, w).total + path_cost(p2, maps, w).total, rel=1e-9)
