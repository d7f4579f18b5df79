"""Benchmark of the hot kernels under both lanes (numba vs pure numpy).

Run as `mpteleop bench` or `python -m mpteleop.bench`. Workloads mirror
the real loop: library generation, a worst-case full-grid prune against a
populated map, bulk NN queries, and a two-camera raycast frame.
"""

import time

import numpy as np

from . import backend
from .kdtree import KDTree, empty_tree
from .localmap import MapView
from .planner import ActionGrid, build_library, prune_and_select
from .trajectory import Action, LocalFrame, RefState
from .world import DepthSensor, World, raycast_scan
from .geometry import Pose


def _timeit(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best * 1e3


def _workloads(rng):
    grid = ActionGrid.regular(vx=(0.0, 10.0, 25), omega=(-2.0, 2.0, 11),
                              vz=(-1.0, 1.0, 5))
    ref = RefState.zero()
    frame = LocalFrame()
    # dense shell so that no candidate is free: the prune visits all 1375
    u = rng.uniform(0, 2 * np.pi, 4000)
    v = rng.uniform(-1, 1, 4000)
    shell = 0.45 * np.stack([np.sqrt(1 - v * v) * np.cos(u),
                             np.sqrt(1 - v * v) * np.sin(u), v], axis=1)
    map_pts = rng.uniform(-15, 15, size=(20000, 3))
    queries = rng.uniform(-16, 16, size=(10000, 3))
    world = World.from_dicts([
        {"type": "cylinder", "center": [6.0, 1.0], "radius": 0.6, "z": [0, 6]},
        {"type": "box", "min": [4.0, -4.0, 0.0], "max": [6.0, -2.0, 3.0]},
        {"type": "wall", "p1": [9.0, -8.0], "p2": [9.0, 8.0]},
    ])
    sensor = DepthSensor()
    return grid, ref, frame, shell, map_pts, queries, world, sensor


def run(repeats=3, lanes=None):
    rng = np.random.default_rng(0)
    grid, ref, frame, shell, map_pts, queries, world, sensor = _workloads(rng)
    if lanes is None:
        lanes = ["numba", "numpy"] if backend._numba_available() else ["numpy"]

    rows = {}
    for lane in lanes:
        backend.use(lane)
        shell_view = MapView(KDTree(shell), empty_tree(), np.empty((0, 3)))
        tree = KDTree(map_pts)

        def gen():
            build_library(grid, ref, frame, durations=1.5)

        def prune_all():
            prune_and_select(grid, Action(10, 0, 0), ref, frame, shell_view,
                             0.4, 0.3, 0.04, t_base=1.5, k_t=0.0)

        def nn():
            tree.query_many(queries)

        def rays():
            raycast_scan(world, Pose(), sensor)
            raycast_scan(world, Pose([0, 0, 1], [1, 0, 0, 0]), sensor)

        cases = [("library generation (1375)", gen),
                 ("worst-case prune (1375 blocked)", prune_all),
                 ("kd-tree NN (10k queries, 20k pts)", nn),
                 ("raycast 2x64x36 rays", rays)]
        for name, fn in cases:
            fn()  # warm-up (JIT compile on the numba lane)
            rows.setdefault(name, {})[lane] = _timeit(fn, repeats)
    backend.use(backend._default_lane())
    return rows, lanes


def format_table(rows, lanes):
    w = max(len(k) for k in rows) + 2
    head = "kernel".ljust(w) + "".join(f"{lane + ' (ms)':>14}" for lane in lanes)
    if len(lanes) == 2:
        head += f"{'speedup':>10}"
    lines = [head, "-" * len(head)]
    for name, vals in rows.items():
        line = name.ljust(w) + "".join(f"{vals[lane]:>14.3f}" for lane in lanes)
        if len(lanes) == 2:
            line += f"{vals[lanes[1]] / vals[lanes[0]]:>9.1f}x"
        lines.append(line)
    return "\n".join(lines)


def main(repeats=3):
    rows, lanes = run(repeats=repeats)
    print(format_table(rows, lanes))


if __name__ == "__main__":
    main()
