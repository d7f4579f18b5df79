"""Array-based KD-tree over 3-D points with exact nearest-neighbor queries.

The tree is a flat bundle of ndarrays (see njit_kernels for the layout),
so the same instance works under either kernel lane and can be handed to
compiled kernels without boxing. Instances are immutable after build.
"""

import numpy as np

from . import backend


class KDTree:
    __slots__ = ("points", "pts_perm", "perm", "sdim", "sval",
                 "left", "right", "start", "end")

    def __init__(self, points, leaf_size=16):
        points = np.ascontiguousarray(np.asarray(points, dtype=np.float64).reshape(-1, 3))
        if leaf_size < 1:
            raise ValueError("leaf_size must be >= 1")
        self.points = points
        (self.pts_perm, self.perm, self.sdim, self.sval,
         self.left, self.right, self.start, self.end) = backend.kern.kd_build(
            points, leaf_size)

    @property
    def n(self):
        return self.points.shape[0]

    def query(self, q):
        """Nearest stored point to q. Returns (distance, index); (inf, -1) if empty."""
        d2, idx = self.query_many(np.asarray(q, dtype=np.float64).reshape(1, 3))
        return float(np.sqrt(d2[0])), int(idx[0])

    def query_many(self, queries):
        """Batch NN. Returns (squared_distances, indices into the original points)."""
        queries = np.ascontiguousarray(np.asarray(queries, dtype=np.float64).reshape(-1, 3))
        return backend.kern.kd_query_many(
            self.pts_perm, self.perm, self.sdim, self.sval,
            self.left, self.right, self.start, self.end, queries)

    def kernel_args(self):
        """Array tuple consumed by the map-scan kernels."""
        return (self.pts_perm, self.sdim, self.sval,
                self.left, self.right, self.start, self.end)


_EMPTY = None


def empty_tree():
    global _EMPTY
    if _EMPTY is None:
        _EMPTY = KDTree(np.empty((0, 3)))
    return _EMPTY
