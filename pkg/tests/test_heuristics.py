import math

import numpy as np
import pytest

from conftest import random_maps
from oracles import dijkstra, enumerate_path_costs
from uasplan.cost import WeightVector, cell_cost_field
from uasplan.grid import GridSpec
from uasplan.planners.heuristics import (
    h_dist_field,
    h_plus,
    h_plus_field,
    layer_bound,
    layer_bound_field,
    octile_distance,
    octile_field,
)
from uasplan.world import BoundingBox

SPEC = GridSpec(BoundingBox(0, 0, 100, 100), 5.0)
W = WeightVector(0.4, 0.2, 0.1, 0.2, 0.1)


def test_octile_examples():
    assert octile_distance((0, 0), (3, 2), 5.0) == pytest.approx(19.1421, abs=1e-4)
    assert octile_distance((0, 0), (8, 8), 1.0) == pytest.approx(11.3137, abs=1e-4)
    assert octile_distance((4, 7), (4, 7), 5.0) == 0.0
    f = octile_field((3, 5), (10, 12), 2.0)
    for y in range(10):
        for x in range(12):
            assert f[y, x] == octile_distance((x, y), (3, 5), 2.0)


def test_octile_between_chebyshev_and_manhattan():
    rng = np.random.default_rng(0)
    for _ in range(500):
        a, b = rng.integers(0, 50, 2), rng.integers(0, 50, 2)
        d = octile_distance(a, b, 1.0)
        dx, dy = abs(a - b)
        assert math.hypot(dx, dy) <= d + 1e-12
        assert max(dx, dy) <= d + 1e-12 <= dx + dy + 2e-12


@pytest.mark.parametrize("mode", ["aabb", "full"])
@pytest.mark.parametrize("anchor_included", [True, False])
def test_field_and_node_routes_agree_exactly(mode, anchor_included):
    maps = random_maps(SPEC, 2)
    stack = maps.cost_stack()
    rng = np.random.default_rng(1)
    for _ in range(4):
        anchor = tuple(int(v) for v in rng.integers(0, 20, 2))
        for k in range(4):
            field = layer_bound_field(stack[k], anchor, mode, anchor_included)
            for y in range(20):
                for x in range(20):
                    assert field[y, x] == layer_bound(stack[k], (x, y), anchor, mode, anchor_included)
        if anchor_included:
            hf = h_plus_field(anchor, maps, W, mode)
            for y in range(0, 20, 3):
                for x in range(0, 20, 3):
                    assert hf[y, x] == h_plus((x, y), anchor, maps, W, mode)


def test_h_plus_special_cases():
    maps = random_maps(SPEC, 3)
    for mode in ("aabb", "full"):
        assert h_plus((7, 7), (7, 7), maps, W, mode) == 0.0
        f = h_plus_field((4, 9), maps, WeightVector(1, 0, 0, 0, 0), mode)
        assert np.array_equal(f, octile_field((4, 9), SPEC.shape, 5.0))
        assert np.all(h_plus_field((4, 9), maps, W, mode) >= h_dist_field((4, 9), maps, W))
    # full-map minima never exceed box minima
    assert np.all(h_plus_field((4, 9), maps, W, "full") <= h_plus_field((4, 9), maps, W, "aabb"))


def test_full_mode_admissible_against_dijkstra():
    for seed in range(5):
        occ = (np.random.default_rng(seed).random(SPEC.shape) < 0.15).astype(float)
        maps = random_maps(SPEC, seed, occ=occ)
        goal = (10, 10)
        occ[goal[1], goal[0]] = 0
        cc = cell_cost_field(maps, W)
        true = dijkstra(occ, cc, 5.0, W.w0, SPEC.flat(*goal), reverse=True).reshape(SPEC.shape)
        h = h_plus_field(goal, maps, W, "full")
        reach = np.isfinite(true)
        assert np.all(h[reach] <= true[reach] + 1e-9)


def test_full_mode_consistent():
    maps = random_maps(SPEC, 6)
    goal = (3, 15)
    h = h_plus_field(goal, maps, W, "full")
    cc = cell_cost_field(maps, W)
    for y in range(20):
        for x in range(20):
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    nx, ny = x + dx, y + dy
                    if (dx or dy) and 0 <= nx < 20 and 0 <= ny < 20:
                        step = W.w0 * 5.0 * math.hypot(dx, dy) + cc[ny, nx]
                        assert h[y, x] <= step + h[ny, nx] + 1e-9


def test_cost_to_come_bound():
    maps = random_maps(SPEC, 8)
    start = (12, 4)
    cc = cell_cost_field(maps, W)
    true = dijkstra(np.zeros(SPEC.shape), cc, 5.0, W.w0, SPEC.flat(*start)).reshape(SPEC.shape)
    h = h_plus_field(start, maps, W, "full", anchor_included=False)
    assert h[start[1], start[0]] == 0.0
    assert np.all(h <= true + 1e-9)


def test_exhaustive_small_grid():
    """4x4 grids: every simple path is enumerated. Full mode must never
    overestimate; box mode violations are counted and reported."""
    spec = GridSpec(BoundingBox(0, 0, 20, 20), 5.0)
    violations = 0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        maps = random_maps(spec, seed)
        layer = maps.cost_stack()[0]
        w = WeightVector(float(rng.uniform(0.05, 1)), 1.0, 0, 0, 0)
        start, goal = (0, int(rng.integers(0, 4))), (3, int(rng.integers(0, 4)))
        best = enumerate_path_costs(layer, 5.0, w.w0, w.gps, start, goal)
        assert h_plus(start, goal, maps, w, "full") <= best + 1e-9
        violations += h_plus(start, goal, maps, w, "aabb") > best + 1e-9
    print(f"aabb overestimates on {violations}/10 exhaustive cases")
