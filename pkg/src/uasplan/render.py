"""Static heatmap figures as binary PPM (P6) images, north up."""

from __future__ import annotations

from os import PathLike
from typing import Sequence

import numpy as np

from .grid import GridLayer

# matplotlib's tab10 palette, for path overlays
TAB10 = (
    (31, 119, 180), (255, 127, 14), (44, 160, 44), (214, 39, 40), (148, 103, 189),
    (140, 86, 75), (227, 119, 194), (127, 127, 127), (188, 189, 34), (23, 190, 207),
)
OBSTACLE_RGB = (40, 40, 40)

# black -> red -> yellow -> white
_STOPS = np.array([0.0, 0.35, 0.7, 1.0])
_RGB = np.array([[0, 0, 0], [200, 30, 20], [250, 210, 40], [255, 255, 255]], dtype=float)


def colorize(values: np.ndarray) -> np.ndarray:
    """Map values in [0, 1] to uint8 RGB, shaped ``values.shape + (3,)``."""
    v = np.clip(np.asarray(values, dtype=float), 0.0, 1.0)
    rgb = np.stack([np.interp(v, _STOPS, _RGB[:, c]) for c in range(3)], axis=-1)
    return np.round(rgb).astype(np.uint8)


def heatmap(layer: GridLayer, occupied: np.ndarray | None = None, scale: int = 4,
            paths: Sequence[Sequence[Sequence[float]]] = ()) -> np.ndarray:
    """RGB image (rows top to bottom = north to south) of a layer with optional
    obstacle mask and polyline overlays in world coordinates."""
    vals = layer.values
    lo, hi = float(vals.min()), float(vals.max())
    norm = (vals - lo) / (hi - lo) if hi > lo else np.zeros_like(vals)
    img = colorize(norm)
    if occupied is not None:
        img[np.asarray(occupied, dtype=bool)] = OBSTACLE_RGB
    img = np.repeat(np.repeat(img, scale, axis=0), scale, axis=1)
    spec = layer.spec
    px_per_m = scale / spec.resolution
    h, w = img.shape[:2]
    for k, path in enumerate(paths):
        color = TAB10[k % len(TAB10)]
        pts = np.asarray(path, dtype=float).reshape(-1, 2)
        if len(pts) == 1:
            pts = np.vstack([pts, pts])
        for a, b in zip(pts[:-1], pts[1:]):
            n = max(2, int(np.ceil(np.hypot(*(b - a)) * px_per_m * 2)) + 1)
            t = np.linspace(0.0, 1.0, n)[:, None]
            seg = a + t * (b - a)
            cols = np.floor((seg[:, 0] - spec.bbox.x_min) * px_per_m).astype(int)
            rows = np.floor((seg[:, 1] - spec.bbox.y_min) * px_per_m).astype(int)
            ok = (cols >= 0) & (cols < w) & (rows >= 0) & (rows < h)
            img[rows[ok], cols[ok]] = color
    # row 0 of the grid is the southmost; images start at the top
    return img[::-1]


def write_ppm(img: np.ndarray, path: str | PathLike) -> None:
    img = np.ascontiguousarray(img, dtype=np.uint8)
    h, w = img.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_ppm(path: str | PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P6":
        raise ValueError("not a binary PPM file")
    w, h, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise ValueError("only 8-bit PPM is supported")
    pos += 1
    return np.frombuffer(data[pos:pos + w * h * 3], dtype=np.uint8).reshape(h, w, 3)
