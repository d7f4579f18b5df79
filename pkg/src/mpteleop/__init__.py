"""Collision-aware motion-primitive teleoperation for a simulated multirotor.

Velocity-space operator actions become snap-continuous polynomial
primitives; a rolling KD-tree voxel map built from simulated depth scans
prunes them, and the closest collision-free primitive is tracked at a
fixed planning rate.
"""

from .kdtree import KDTree
from .localmap import FrameClass, LocalMap, MapView, SensorScan, classify, voxelize
from .planner import (
    ActionGrid,
    PruneResult,
    build_library,
    collision_check,
    max_safe_velocity,
    nearest_action_queue,
    prune_and_select,
)
from .scenario import Scenario
from .session import Session, SessionResult, run_session
from .trajectory import (
    Action,
    LocalFrame,
    MotionPrimitive,
    RefState,
    flat_feedforward,
    generate_primitive,
    unicycle_velocity,
)
from .world import DepthSensor, VehicleState, World, raycast_scan, step_vehicle

__version__ = "0.1.0"

__all__ = [
    "Action", "ActionGrid", "DepthSensor", "FrameClass", "KDTree", "LocalFrame",
    "LocalMap", "MapView", "MotionPrimitive", "PruneResult", "RefState",
    "Scenario", "SensorScan", "Session", "SessionResult", "VehicleState",
    "World", "build_library", "classify", "collision_check", "flat_feedforward",
    "generate_primitive", "max_safe_velocity", "nearest_action_queue",
    "prune_and_select", "raycast_scan", "run_session", "step_vehicle",
    "unicycle_velocity", "voxelize",
]
