"""Time the compiled kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from uasplan import _kernels
from uasplan.metrics import LidarConfig
from uasplan.raycast import PrismSet
from uasplan.world import SynthConfig, synth_scene


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    n = 64
    occ = (rng.random(n * n) < 0.15).astype(np.uint8)
    free = np.nonzero(occ == 0)[0]
    cost = rng.random(n * n)
    h = np.zeros(n * n)
    s, g = int(free[0]), int(free[-1])
    segs = rng.uniform(0, 319.9, (500, 4))
    occ2d = (rng.random((128, 128)) < 0.05).astype(np.uint8)
    sc = synth_scene(SynthConfig(obstacle_count=30, seed=1))
    prisms = PrismSet(sc.obstacles).packed()
    pos = np.column_stack([rng.uniform(0, 320, 20), rng.uniform(0, 320, 20), np.full(20, 30.0)])
    dirs = LidarConfig(b_lidar=8, k_lidar=90).beam_directions()
    o = np.column_stack([rng.uniform(0, 320, 2000), rng.uniform(0, 320, 2000), rng.uniform(0, 150, 2000)])
    t = np.column_stack([rng.uniform(0, 320, 2000), rng.uniform(0, 320, 2000), rng.uniform(0, 150, 2000)])

    def seg(k):
        for a in segs:
            k.segment_cost(a[0], a[1], a[2], a[3], 0.0, 0.0, 5.0, n, n, occ, cost)

    return {
        "astar 64x64": lambda k: k.astar(occ, cost, h, n, n, s, g, 5.0, 1.0, 60.0),
        "segment_cost x500": seg,
        "edt_sq 128x128": lambda k: k.edt_sq(occ2d),
        "segments_hit x2000": lambda k: k.segments_hit(o, t, prisms),
        "lidar_returns 20 pos": lambda k: k.lidar_returns(pos, dirs, 100.0, prisms),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = _kernels.available_backends()
    mods = {b: _kernels.get_backend(b) for b in backends}
    print(f"{'kernel':<24}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name, fn in cases().items():
        t = {b: _best(lambda: fn(mods[b]), args.repeat) for b in backends}
        line = f"{name:<24}" + "".join(f"{t[b] * 1e3:>10.2f}ms" for b in backends)
        if "cython" in t and "python" in t:
            line += f"{t['python'] / t['cython']:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
