import math

import numpy as np
import pytest

from uasplan.world import BoundingBox, ObstaclePolygon, SatellitePosition, SynthConfig, WorldScene, synth_scene


def square(x0, y0, size, height):
    ring = ((x0, y0), (x0 + size, y0), (x0 + size, y0 + size), (x0, y0 + size))
    return ObstaclePolygon(ring, float(height))


def sky_satellites(n=8, seed=0, center=(50.0, 50.0)):
    rng = np.random.default_rng(seed)
    out = []
    for k in range(n):
        az = 2 * math.pi * k / n + rng.uniform(0, 0.3)
        el = math.radians(rng.uniform(20, 80))
        r = 2.0e7
        out.append(SatellitePosition(center[0] + r * math.cos(el) * math.cos(az),
                                     center[1] + r * math.cos(el) * math.sin(az), r * math.sin(el)))
    return tuple(out)


@pytest.fixture
def small_city():
    return synth_scene(SynthConfig(bbox=BoundingBox(0, 0, 100, 100), obstacle_count=8, block_grid=(2, 2), seed=4))


@pytest.fixture
def empty_scene():
    return WorldScene(BoundingBox(0, 0, 100, 100), satellites=sky_satellites())


def random_maps(spec, seed=0, occupied=(), occ=None):
    """Map set with uniform random cost layers; obstacles at ``occupied`` cells or from ``occ``."""
    from uasplan.grid import GridLayer
    from uasplan.metrics import MetricMapSet

    rng = np.random.default_rng(seed)
    grid = np.zeros(spec.shape) if occ is None else np.asarray(occ, dtype=float)
    for idx, idy in occupied:
        grid[idy, idx] = 1
    layers = [GridLayer(spec, grid, 30.0, "obstacle")]
    for name in ("gps", "lidar", "population", "risk"):
        layers.append(GridLayer(spec, rng.random(spec.shape), 30.0, name))
    return MetricMapSet(*layers)


_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def report():
    """Record one PASS/FAIL line per acceptance criterion; printed in the terminal summary."""

    def _report(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
