"""Rigid transforms and angle utilities shared across the stack.

Poses are stored as translation + unit quaternion (w, x, y, z), matching
the on-disk scan log layout. All frames are z-up.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def wrap_angle(a):
    """Wrap an angle (or array of angles) to (-pi, pi]."""
    w = -((-np.asarray(a) + np.pi) % (2.0 * np.pi) - np.pi)
    return w


def quat_from_rpy(roll, pitch, yaw):
    """Unit quaternion (w, x, y, z) from intrinsic roll-pitch-yaw (ZYX order)."""
    cr, sr = np.cos(roll / 2), np.sin(roll / 2)
    cp, sp = np.cos(pitch / 2), np.sin(pitch / 2)
    cy, sy = np.cos(yaw / 2), np.sin(yaw / 2)
    return np.array([
        cy * cp * cr + sy * sp * sr,
        cy * cp * sr - sy * sp * cr,
        cy * sp * cr + sy * cp * sr,
        sy * cp * cr - cy * sp * sr,
    ])


def quat_from_yaw(yaw):
    return np.array([np.cos(yaw / 2), 0.0, 0.0, np.sin(yaw / 2)])


def quat_mul(q1, q2):
    w1, x1, y1, z1 = q1
    w2, x2, y2, z2 = q2
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ])


def quat_to_mat(q):
    """3x3 rotation matrix from a unit quaternion (w, x, y, z)."""
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def quat_yaw(q):
    """Heading (rotation about world z) extracted from a unit quaternion."""
    w, x, y, z = q
    return float(np.arctan2(2 * (w * z + x * y), 1 - 2 * (y * y + z * z)))


@dataclass(frozen=True)
class Pose:
    """Rigid transform child->parent: p_parent = R(quat) @ p_child + translation."""

    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    quaternion: np.ndarray = field(default_factory=lambda: np.array([1.0, 0, 0, 0]))

    def __post_init__(self):
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float))
        q = np.asarray(self.quaternion, dtype=float)
        n = np.linalg.norm(q)
        if not np.isfinite(n) or n < 1e-12:
            raise ValueError("quaternion must be finite and nonzero")
        object.__setattr__(self, "quaternion", q / n)

    @classmethod
    def from_xyz_yaw(cls, xyz, yaw):
        return cls(np.asarray(xyz, dtype=float), quat_from_yaw(yaw))

    @property
    def yaw(self):
        return quat_yaw(self.quaternion)

    def matrix(self):
        return quat_to_mat(self.quaternion)

    def compose(self, other: "Pose") -> "Pose":
        """self ∘ other: apply `other` first, then `self`."""
        t = self.matrix() @ other.translation + self.translation
        return Pose(t, quat_mul(self.quaternion, other.quaternion))

    def transform_points(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 3)
        return pts @ self.matrix().T + self.translation

    def flat(self):
        """7-vector (tx, ty, tz, qw, qx, qy, qz) used by the scan log."""
        return np.concatenate([self.translation, self.quaternion])

    @classmethod
    def from_flat(cls, v):
        v = np.asarray(v, dtype=float)
        return cls(v[:3], v[3:7])
