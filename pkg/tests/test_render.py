import numpy as np

from uasplan.grid import GridLayer, GridSpec
from uasplan.render import OBSTACLE_RGB, TAB10, colorize, heatmap, read_ppm, write_ppm
from uasplan.world import BoundingBox

SPEC = GridSpec(BoundingBox(0, 0, 40, 20), 5.0)


def test_colorize_endpoints():
    c = colorize(np.array([0.0, 1.0, 2.0, -1.0]))
    assert c.dtype == np.uint8
    assert tuple(c[0]) == (0, 0, 0) and tuple(c[1]) == (255, 255, 255)
    assert tuple(c[2]) == (255, 255, 255) and tuple(c[3]) == (0, 0, 0)


def test_heatmap_orientation_and_overlays():
    vals = np.zeros(SPEC.shape)
    vals[0, 0] = 1.0  # south-west corner
    occ = np.zeros(SPEC.shape, dtype=bool)
    occ[-1, -1] = True  # north-east corner
    img = heatmap(GridLayer(SPEC, vals), occ, scale=2)
    assert img.shape == (8, 16, 3)
    assert tuple(img[-1, 0]) == (255, 255, 255)
    assert tuple(img[0, -1]) == OBSTACLE_RGB
    img = heatmap(GridLayer(SPEC, vals), scale=2, paths=[[(2.5, 7.5), (37.5, 7.5)]])
    row = img[::-1][int(7.5 * 2 / 5)]
    assert (row == TAB10[0]).all(axis=1).sum() >= 14


def test_ppm_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, (7, 5, 3), dtype=np.uint8)
    write_ppm(img, tmp_path / "x.ppm")
    assert (tmp_path / "x.ppm").read_bytes().startswith(b"P6\n5 7\n255\n")
    assert np.array_equal(read_ppm(tmp_path / "x.ppm"), img)
