"""Closed-loop test world: static obstacles, simulated depth sensors and
a vehicle that tracks the active primitive.

Obstacle distances are analytic per shape, so the world doubles as the
ground-truth safety oracle for closed-loop audits, independent of the
voxel map the planner sees.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import backend
from .geometry import Pose, quat_from_rpy, wrap_angle
from .localmap import SensorScan
from .trajectory import MotionPrimitive


@dataclass(frozen=True)
class World:
    """Static geometry: vertical cylinders, axis-aligned boxes, vertical walls."""

    cylinders: np.ndarray = field(default_factory=lambda: np.empty((0, 5)))
    boxes: np.ndarray = field(default_factory=lambda: np.empty((0, 6)))
    walls: np.ndarray = field(default_factory=lambda: np.empty((0, 4)))
    bounds: np.ndarray = field(default_factory=lambda: np.array([[-50.0, -50, -1],
                                                                 [50.0, 50, 20]]))

    def __post_init__(self):
        for name, cols in (("cylinders", 5), ("boxes", 6), ("walls", 4)):
            arr = np.asarray(getattr(self, name), dtype=float).reshape(-1, cols)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} parameters must be finite")
            object.__setattr__(self, name, arr)
        if np.any(self.cylinders[:, 2] <= 0):
            raise ValueError("cylinder radii must be positive")
        if self.boxes.shape[0] and np.any(self.boxes[:, 3:] <= self.boxes[:, :3]):
            raise ValueError("box max corner must exceed min corner")
        object.__setattr__(self, "bounds", np.asarray(self.bounds, dtype=float).reshape(2, 3))

    @classmethod
    def from_dicts(cls, obstacles, bounds=None):
        cyl, box, wall = [], [], []
        for ob in obstacles:
            kind = ob["type"]
            if kind == "cylinder":
                cx, cy = ob["center"]
                z0, z1 = ob.get("z", (-1.0, 20.0))
                cyl.append([cx, cy, ob["radius"], z0, z1])
            elif kind == "box":
                box.append([*ob["min"], *ob["max"]])
            elif kind == "wall":
                wall.append([*ob["p1"], *ob["p2"]])
            else:
                raise ValueError(f"unknown obstacle type {kind!r}")
        kw = {}
        if bounds is not None:
            kw["bounds"] = bounds
        return cls(cylinders=np.array(cyl).reshape(-1, 5),
                   boxes=np.array(box).reshape(-1, 6),
                   walls=np.array(wall).reshape(-1, 4), **kw)

    @property
    def n_obstacles(self):
        return self.cylinders.shape[0] + self.boxes.shape[0] + self.walls.shape[0]

    def min_obstacle_distance_many(self, points):
        """Exact Euclidean distance to the nearest obstacle surface, clamped
        to 0 inside an obstacle. inf for an empty world."""
        p = np.asarray(points, dtype=float).reshape(-1, 3)
        best = np.full(p.shape[0], np.inf)
        for c in self.cylinders:
            dr = np.hypot(p[:, 0] - c[0], p[:, 1] - c[1]) - c[2]
            dz = np.maximum(np.maximum(c[3] - p[:, 2], p[:, 2] - c[4]), 0.0)
            best = np.minimum(best, np.hypot(np.maximum(dr, 0.0), dz))
        for b in self.boxes:
            gap = np.maximum(np.maximum(b[:3] - p, p - b[3:]), 0.0)
            best = np.minimum(best, np.sqrt(np.square(gap).sum(axis=1)))
        for w in self.walls:
            e = w[2:] - w[:2]
            rel = p[:, :2] - w[:2]
            t = np.clip((rel @ e) / (e @ e), 0.0, 1.0)
            closest = w[:2] + t[:, None] * e
            best = np.minimum(best, np.hypot(*(p[:, :2] - closest).T))
        return best

    def min_obstacle_distance(self, point):
        return float(self.min_obstacle_distance_many(np.asarray(point).reshape(1, 3))[0])

    def penetrates(self, point):
        """True when the point is strictly inside a solid obstacle."""
        p = np.asarray(point, dtype=float).reshape(3)
        for c in self.cylinders:
            if (np.hypot(p[0] - c[0], p[1] - c[1]) < c[2] and c[3] < p[2] < c[4]):
                return True
        for b in self.boxes:
            if np.all(p > b[:3]) and np.all(p < b[3:]):
                return True
        return False


@dataclass(frozen=True)
class DepthSensor:
    """Pinhole-style depth sensor: a cols x rows ray fan over h_fov x v_fov,
    boresight along the sensor +x axis."""

    sensor_id: str = "depth0"
    mount: Pose = field(default_factory=Pose)
    h_fov: float = np.deg2rad(87.0)
    v_fov: float = np.deg2rad(58.0)
    max_range: float = 10.0
    cols: int = 64
    rows: int = 36
    rate: float = 30.0

    def __post_init__(self):
        if not (0 < self.h_fov < np.pi and 0 < self.v_fov < np.pi):
            raise ValueError("fov must lie in (0, pi)")
        if self.max_range <= 0:
            raise ValueError("max_range must be positive")
        if self.cols < 1 or self.rows < 1:
            raise ValueError("ray counts must be >= 1")

    def ray_directions(self):
        """(cols*rows, 3) unit directions in the sensor frame."""
        az = (np.linspace(-self.h_fov / 2, self.h_fov / 2, self.cols)
              if self.cols > 1 else np.zeros(1))
        el = (np.linspace(-self.v_fov / 2, self.v_fov / 2, self.rows)
              if self.rows > 1 else np.zeros(1))
        aa, ee = np.meshgrid(az, el)
        d = np.stack([np.cos(ee) * np.cos(aa),
                      np.cos(ee) * np.sin(aa),
                      np.sin(ee)], axis=-1).reshape(-1, 3)
        return np.ascontiguousarray(d)


def raycast_scan(world: World, vehicle_pose: Pose, sensor: DepthSensor,
                 stamp=0.0) -> SensorScan:
    """Simulate one depth frame; returned points are in the sensor frame."""
    spose = vehicle_pose.compose(sensor.mount)
    dirs_local = sensor.ray_directions()
    dirs_world = np.ascontiguousarray(dirs_local @ spose.matrix().T)
    o = spose.translation
    t = backend.kern.raycast(o[0], o[1], o[2], dirs_world, sensor.max_range,
                             world.cylinders, world.boxes, world.walls)
    hit = np.isfinite(t)
    return SensorScan(points=dirs_local[hit] * t[hit, None], sensor_pose=spose,
                      stamp=stamp, sensor_id=sensor.sensor_id)


@dataclass(frozen=True)
class VehicleState:
    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray
    yaw: float
    yaw_rate: float
    stamp: float

    def __post_init__(self):
        for name in ("position", "velocity", "acceleration"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(3))

    @classmethod
    def at_rest(cls, position, yaw=0.0, stamp=0.0):
        return cls(np.asarray(position, dtype=float), np.zeros(3), np.zeros(3),
                   float(yaw), 0.0, float(stamp))

    def pose(self) -> Pose:
        return Pose.from_xyz_yaw(self.position, self.yaw)

    @property
    def speed(self):
        return float(np.linalg.norm(self.velocity))


def _reference_rows(mp: MotionPrimitive, elapsed):
    """World position/velocity/acceleration/yaw rows with past-T clamping
    (constant endpoint velocity)."""
    t = mp.duration
    if elapsed <= t:
        w0 = mp.to_world(elapsed, 0)
        w1 = mp.to_world(elapsed, 1)
        w2 = mp.to_world(elapsed, 2)
        return w0, w1, w2
    w0 = mp.to_world(t, 0)
    w1 = mp.to_world(t, 1)
    extra = elapsed - t
    w0 = w0 + w1 * extra
    return w0, w1, np.zeros(4)


def step_vehicle(state: VehicleState, active: MotionPrimitive, start_time, now,
                 mode="perfect", tau_lag=0.15) -> VehicleState:
    """Advance the vehicle to `now` while tracking the active primitive.

    "perfect" pins the state to the reference; "lag" low-passes position
    and yaw toward it with time constant tau_lag.
    """
    elapsed = now - start_time
    if elapsed < -1e-9:
        raise ValueError("primitive starts in the future")
    w0, w1, w2 = _reference_rows(active, max(elapsed, 0.0))
    if mode == "perfect":
        return VehicleState(w0[:3], w1[:3], w2[:3], wrap_angle(w0[3]), w1[3], now)
    if mode != "lag":
        raise ValueError(f"unknown tracking mode {mode!r}")
    dt = now - state.stamp
    if dt <= 0:
        return state
    alpha = 1.0 - np.exp(-dt / max(tau_lag, 1e-6))
    pos = state.position + alpha * (w0[:3] - state.position)
    yaw = wrap_angle(state.yaw + alpha * wrap_angle(w0[3] - state.yaw))
    vel = (pos - state.position) / dt
    acc = (vel - state.velocity) / dt
    yaw_rate = wrap_angle(yaw - state.yaw) / dt
    return VehicleState(pos, vel, acc, yaw, yaw_rate, now)


def sensor_from_dict(d) -> DepthSensor:
    mount = d.get("mount", {})
    pose = Pose(np.asarray(mount.get("translation", [0, 0, 0]), dtype=float),
                quat_from_rpy(*np.deg2rad(mount.get("rpy_deg", [0, 0, 0]))))
    return DepthSensor(
        sensor_id=d.get("id", "depth0"),
        mount=pose,
        h_fov=np.deg2rad(d.get("h_fov_deg", 87.0)),
        v_fov=np.deg2rad(d.get("v_fov_deg", 58.0)),
        max_range=d.get("max_range", 10.0),
        cols=int(d.get("cols", 64)),
        rows=int(d.get("rows", 36)),
        rate=float(d.get("rate", 30.0)),
    )
