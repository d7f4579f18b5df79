"""Rolling local occupancy map.

Incoming depth scans are classified against displacement/heading
thresholds as KeyFrames (spawn a fresh map window), SubFrames (novel
detail, merged into the current window) or BufferFrames (transient, kept
for a single cycle only). Voxel centers of the current and previous
KeyFrame windows live in two KD-trees; queries take the exact nearest
neighbor over both trees plus the buffer.

Ground-truth simulator state means no estimator drift, so voxel centers
are stored directly in the world frame; the KF anchor poses are kept on
the map so an anchored-frame mode can be added without changing the
retention logic.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .geometry import Pose, wrap_angle
from .kdtree import KDTree, empty_tree


class FrameClass(enum.Enum):
    KF = "KF"
    SF = "SF"
    BF = "BF"


@dataclass
class SensorScan:
    """Stamped point cloud in the sensor frame plus the sensor's world pose."""

    points: np.ndarray
    sensor_pose: Pose
    stamp: float
    sensor_id: str = "sensor0"

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)

    def points_world(self):
        return self.sensor_pose.transform_points(self.points)


def classify(scan_pose, last_kf_pose, last_sf_pose, alpha_k, alpha_s, beta_s):
    """Table-driven frame classification from vehicle poses.

    Missing reference poses count as infinitely far, so the first scan is
    always a KF.
    """
    if last_kf_pose is None:
        return FrameClass.KF
    if np.linalg.norm(scan_pose.translation - last_kf_pose.translation) > alpha_k:
        return FrameClass.KF
    if last_sf_pose is None:
        return FrameClass.SF
    trans = np.linalg.norm(scan_pose.translation - last_sf_pose.translation)
    head = abs(wrap_angle(scan_pose.yaw - last_sf_pose.yaw))
    if trans > alpha_s or head > beta_s:
        return FrameClass.SF
    return FrameClass.BF


def voxelize(points, voxel_size):
    """Map world points to deduplicated voxel centers (floor convention),
    sorted by voxel index."""
    if voxel_size <= 0:
        raise ValueError("voxel_size must be > 0")
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    if points.shape[0] == 0:
        return np.empty((0, 3))
    idx = np.unique(np.floor(points / voxel_size).astype(np.int64), axis=0)
    return (idx + 0.5) * voxel_size


def _voxel_indices(points, voxel_size):
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    if points.shape[0] == 0:
        return np.empty((0, 3), dtype=np.int64)
    return np.unique(np.floor(points / voxel_size).astype(np.int64), axis=0)


@dataclass(frozen=True)
class MapView:
    """Immutable snapshot handed to the planner; shares tree handles."""

    cur_tree: KDTree
    prev_tree: KDTree
    buffer_points: np.ndarray
    stamp: float = 0.0

    @property
    def n_points(self):
        return self.cur_tree.n + self.prev_tree.n + self.buffer_points.shape[0]

    def kernel_args(self):
        return (*self.cur_tree.kernel_args(), *self.prev_tree.kernel_args(),
                self.buffer_points)

    def nearest_sqdist_many(self, queries):
        queries = np.ascontiguousarray(np.asarray(queries, dtype=float).reshape(-1, 3))
        cur, prev = self.cur_tree, self.prev_tree
        return backend.kern.map_nn_sqdist(
            queries,
            cur.pts_perm, cur.sdim, cur.sval, cur.left, cur.right, cur.start, cur.end,
            prev.pts_perm, prev.sdim, prev.sval, prev.left, prev.right, prev.start, prev.end,
            self.buffer_points)

    def nearest(self, query):
        """Exact nearest stored point; (None, inf) when the map is empty."""
        q = np.asarray(query, dtype=float).reshape(3)
        best_d2, best_pt = np.inf, None
        for tree in (self.cur_tree, self.prev_tree):
            if tree.n:
                d2, idx = tree.query_many(q.reshape(1, 3))
                if d2[0] < best_d2:
                    best_d2, best_pt = float(d2[0]), tree.points[idx[0]].copy()
        if self.buffer_points.shape[0]:
            d2 = np.square(self.buffer_points - q).sum(axis=1)
            i = int(np.argmin(d2))
            if d2[i] < best_d2:
                best_d2, best_pt = float(d2[i]), self.buffer_points[i].copy()
        return best_pt, float(np.sqrt(best_d2))


class LocalMap:
    """Mutable map state owned by the mapping task."""

    def __init__(self, voxel_size=0.2, alpha_k=2.0, alpha_s=0.2, beta_s=0.1):
        if voxel_size <= 0:
            raise ValueError("voxel_size must be > 0")
        self.voxel_size = float(voxel_size)
        self.alpha_k = float(alpha_k)
        self.alpha_s = float(alpha_s)
        self.beta_s = float(beta_s)
        self.last_kf_pose = None
        self.last_sf_pose = None
        self._cur_idx = np.empty((0, 3), dtype=np.int64)
        self._cur_tree = empty_tree()
        self._prev_tree = empty_tree()
        self._buffer = np.empty((0, 3))
        self._last_stamp = -np.inf
        self._event_stamp = None
        self._event_class = None

    @property
    def buffer_points(self):
        return self._buffer

    @property
    def current_points(self):
        return self._cur_tree.points

    @property
    def previous_points(self):
        return self._prev_tree.points

    def _centers(self, idx):
        return (idx + 0.5) * self.voxel_size

    def integrate(self, scan: SensorScan, body_pose: Pose | None = None) -> FrameClass:
        """Classify and register one scan. Returns the frame class.

        Scans sharing a stamp (multiple rigidly mounted sensors) form one
        measurement event: they share the first scan's classification, with
        KF follow-ups merged into the freshly spawned window.
        """
        if scan.stamp < self._last_stamp:
            raise ValueError(
                f"scan stamp {scan.stamp} precedes map time {self._last_stamp}")
        pose = body_pose if body_pose is not None else scan.sensor_pose
        same_event = self._event_stamp is not None and scan.stamp == self._event_stamp

        if same_event:
            cls = self._event_class
        else:
            cls = classify(pose, self.last_kf_pose, self.last_sf_pose,
                           self.alpha_k, self.alpha_s, self.beta_s)
            self._event_stamp = scan.stamp
            self._event_class = cls
            self._buffer = np.empty((0, 3))  # BFs live one measurement cycle only

        vox = _voxel_indices(scan.points_world(), self.voxel_size)

        if cls is FrameClass.KF:
            if same_event:
                self._merge_current(vox)
            else:
                self._prev_tree = self._cur_tree
                self._cur_idx = vox
                self._cur_tree = KDTree(self._centers(vox))
                self.last_kf_pose = pose
                self.last_sf_pose = pose
        elif cls is FrameClass.SF:
            self._merge_current(vox)
            if not same_event:
                self.last_sf_pose = pose
        else:
            centers = self._centers(vox)
            if same_event and self._buffer.shape[0]:
                self._buffer = np.concatenate([self._buffer, centers], axis=0)
            else:
                self._buffer = centers
        self._last_stamp = scan.stamp
        return cls

    def _merge_current(self, vox):
        if vox.shape[0] == 0:
            return
        merged = np.unique(np.concatenate([self._cur_idx, vox], axis=0), axis=0)
        if merged.shape[0] != self._cur_idx.shape[0]:
            self._cur_idx = merged
            self._cur_tree = KDTree(self._centers(merged))
        else:
            self._cur_idx = merged

    def snapshot(self) -> MapView:
        return MapView(self._cur_tree, self._prev_tree, self._buffer.copy(),
                       stamp=self._last_stamp)

    def nearest(self, query):
        return self.snapshot().nearest(query)

    def nearest_distance_many(self, queries):
        return np.sqrt(self.snapshot().nearest_sqdist_many(queries))
