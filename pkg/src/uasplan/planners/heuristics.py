"""Grid heuristics: octile distance and the layer-aware ``h_plus``.

``h_plus(n) = w0 * octile(n, goal) + sum_k w_k * s_k(n)`` where ``s_k`` lower
bounds the layer-k cost a path still has to pay. Every 8-connected step
moves at most one column and one row, so a path from ``n`` to the goal must
enter each column strictly between them, plus the goal column, at least
once; each entry pays at least that column's minimum. The same holds for
rows, and ``s_k`` takes the larger of the two sums.

In ``aabb`` mode column minima are taken over the rows of the box spanned
by ``n`` and the goal; ``full`` mode uses whole map columns/rows, which is
admissible and consistent even for paths that leave the box.

Both a per-node route (:func:`h_plus`) and a whole-grid route
(:func:`h_plus_field`) are provided. They sum in the same order (from the
anchor cell outward) and agree exactly.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..cost import WeightVector
from ..metrics import MetricMapSet

SQRT2 = math.sqrt(2.0)


def octile_distance(a: Sequence[int], b: Sequence[int], res: float) -> float:
    dx = abs(int(b[0]) - int(a[0]))
    dy = abs(int(b[1]) - int(a[1]))
    return res * (abs(dx - dy) + SQRT2 * min(dx, dy))


def octile_field(anchor: Sequence[int], shape: tuple[int, int], res: float) -> np.ndarray:
    n_rows, n_cols = shape
    dx = np.abs(np.arange(n_cols) - int(anchor[0]))[None, :]
    dy = np.abs(np.arange(n_rows) - int(anchor[1]))[:, None]
    return res * (np.abs(dx - dy) + SQRT2 * np.minimum(dx, dy))


# ---------------------------------------------------------------------------
# per-node route


def _line_sum(mins, node: int, anchor: int, anchor_included: bool) -> float:
    """Sum ``mins[c]`` over the indices between node and anchor, walking
    outward from the anchor. The node's own index is excluded when the
    anchor is included and vice versa."""
    s = 0.0
    if node == anchor:
        return s
    step = 1 if node > anchor else -1
    if anchor_included:
        c, stop = anchor, node
    else:
        c, stop = anchor + step, node + step
    while c != stop:
        s += mins[c]
        c += step
    return s


def _span(a: int, b: int, n: int, mode: str) -> slice:
    if mode == "full":
        return slice(0, n)
    return slice(min(a, b), max(a, b) + 1)


def layer_bound(layer: np.ndarray, node: Sequence[int], anchor: Sequence[int],
                mode: str = "aabb", anchor_included: bool = True) -> float:
    """``max(column-minimum sum, row-minimum sum)`` for one layer.

    With ``anchor_included`` the bound covers a path from ``node`` to
    ``anchor`` (anchor is the goal); otherwise a path from ``anchor`` to
    ``node`` (anchor is the start, costs accrue on arrival at ``node``).
    """
    nx, ny = int(node[0]), int(node[1])
    ax, ay = int(anchor[0]), int(anchor[1])
    n_rows, n_cols = layer.shape
    col_mins = layer[_span(ny, ay, n_rows, mode), :].min(axis=0)
    row_mins = layer[:, _span(nx, ax, n_cols, mode)].min(axis=1)
    cs = _line_sum(col_mins, nx, ax, anchor_included)
    rs = _line_sum(row_mins, ny, ay, anchor_included)
    return max(cs, rs)


def h_plus(node: Sequence[int], goal: Sequence[int], maps: MetricMapSet, w: WeightVector,
           mode: str = "aabb") -> float:
    h = w.w0 * octile_distance(node, goal, maps.resolution)
    stack = maps.cost_stack()
    for k, wk in enumerate(w.layer_weights):
        if wk != 0:
            h = h + wk * layer_bound(stack[k], node, goal, mode)
    return h


# ---------------------------------------------------------------------------
# whole-grid route


def _band_mins(layer: np.ndarray, ay: int, mode: str) -> np.ndarray:
    """``out[y, c]`` = min of column c over the rows between y and ``ay``."""
    if mode == "full":
        return np.broadcast_to(layer.min(axis=0), layer.shape).copy()
    out = np.empty_like(layer)
    out[ay:] = np.minimum.accumulate(layer[ay:], axis=0)
    out[: ay + 1] = np.minimum.accumulate(layer[ay::-1], axis=0)[::-1]
    return out


def _outward_sums(mins: np.ndarray, ax: int, anchor_included: bool) -> np.ndarray:
    """Row-wise :func:`_line_sum` for every node column at once."""
    n_rows, n_cols = mins.shape
    out = np.zeros((n_rows, n_cols))
    if anchor_included:
        right = np.cumsum(mins[:, ax:], axis=1)          # cols ax..ax+k
        left = np.cumsum(mins[:, ax::-1], axis=1)        # cols ax-k..ax
        out[:, ax + 1 :] = right[:, : n_cols - ax - 1]
        out[:, :ax] = left[:, :ax][:, ::-1]
    else:
        if ax + 1 < n_cols:
            right = np.cumsum(mins[:, ax + 1 :], axis=1)  # cols ax+1..ax+1+k
            out[:, ax + 1 :] = right
        if ax > 0:
            left = np.cumsum(mins[:, ax - 1 :: -1], axis=1)  # cols ax-1-k..ax-1
            out[:, :ax] = left[:, ::-1]
    return out


def layer_bound_field(layer: np.ndarray, anchor: Sequence[int], mode: str = "aabb",
                      anchor_included: bool = True) -> np.ndarray:
    ax, ay = int(anchor[0]), int(anchor[1])
    cols = _outward_sums(_band_mins(layer, ay, mode), ax, anchor_included)
    rows = _outward_sums(_band_mins(layer.T, ax, mode), ay, anchor_included).T
    return np.maximum(cols, rows)


def h_plus_field(anchor: Sequence[int], maps: MetricMapSet, w: WeightVector, mode: str = "aabb",
                 anchor_included: bool = True) -> np.ndarray:
    """:func:`h_plus` for every cell toward ``anchor``, shaped like the grid.

    With ``anchor_included=False`` the field instead lower-bounds the cost
    of reaching each cell from ``anchor``.
    """
    h = w.w0 * octile_field(anchor, maps.spec.shape, maps.resolution)
    stack = maps.cost_stack()
    for k, wk in enumerate(w.layer_weights):
        if wk != 0:
            h = h + wk * layer_bound_field(stack[k], anchor, mode, anchor_included)
    return h


def h_dist_field(anchor: Sequence[int], maps: MetricMapSet, w: WeightVector) -> np.ndarray:
    return w.w0 * octile_field(anchor, maps.spec.shape, maps.resolution)
