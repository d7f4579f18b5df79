"""Scenario configs: world geometry, sensor rig, vehicle, planner and map
parameters, rates, and an optional scripted input trace.

Scenarios are JSON files; the package ships a handful under
mpteleop/scenarios/ addressable by bare name.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .planner import ActionGrid
from .world import DepthSensor, World, sensor_from_dict


@dataclass
class PlannerParams:
    t_base: float = 1.5
    k_t: float = 0.15
    r: float = 0.4
    dt: float = 0.04
    rotation: float = 0.0
    grid: ActionGrid = field(default_factory=ActionGrid.regular)

    @property
    def v_max(self):
        return self.grid.vx_bounds[1]


@dataclass
class MapParams:
    voxel_size: float = 0.2
    alpha_k: float = 2.0
    alpha_s: float = 0.2
    beta_s: float = 0.1


@dataclass
class Rates:
    plan: float = 25.0
    map: float = 30.0
    track: float = 100.0

    def __post_init__(self):
        if min(self.plan, self.map, self.track) <= 0:
            raise ValueError("rates must be positive")


@dataclass
class WorldEvent:
    """Scene change applied at a fixed time (teleporting obstacles)."""

    t: float
    op: str                  # "add_box" | "remove_added"
    box: list | None = None


@dataclass
class Scenario:
    name: str = "unnamed"
    seed: int = 0
    duration: float = 10.0
    world: World = field(default_factory=World)
    sensors: list = field(default_factory=lambda: [DepthSensor()])
    start: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 2.0]))
    start_yaw: float = 0.0
    r_v: float = 0.3
    a_max: float = 6.0
    tracking: str = "perfect"
    tau_lag: float = 0.15
    planner: PlannerParams = field(default_factory=PlannerParams)
    map_params: MapParams = field(default_factory=MapParams)
    rates: Rates = field(default_factory=Rates)
    trace: np.ndarray | None = None          # rows (t, vx, vz, omega, rot)
    world_events: list = field(default_factory=list)

    @classmethod
    def from_dict(cls, d) -> "Scenario":
        world_cfg = d.get("world", {})
        world = World.from_dicts(world_cfg.get("obstacles", []),
                                 bounds=world_cfg.get("bounds"))
        sensors = [sensor_from_dict(s) for s in d.get("sensors", [{}])]
        veh = d.get("vehicle", {})
        pl = d.get("planner", {})
        grid_cfg = pl.get("grid", {})
        grid = ActionGrid.regular(
            vx=tuple(grid_cfg.get("vx", (0.0, 10.0, 25))),
            omega=tuple(grid_cfg.get("omega", (-2.0, 2.0, 11))),
            vz=tuple(grid_cfg.get("vz", (-1.0, 1.0, 5))),
            rotation=pl.get("rotation", 0.0))
        planner = PlannerParams(
            t_base=pl.get("t_base", 1.5), k_t=pl.get("k_t", 0.15),
            r=pl.get("r", 0.4), dt=pl.get("dt", 0.04),
            rotation=pl.get("rotation", 0.0), grid=grid)
        mp = d.get("map", {})
        map_params = MapParams(
            voxel_size=mp.get("voxel_size", 0.2), alpha_k=mp.get("alpha_k", 2.0),
            alpha_s=mp.get("alpha_s", 0.2), beta_s=mp.get("beta_s", 0.1))
        rt = d.get("rates", {})
        rates = Rates(plan=rt.get("plan", 25.0), map=rt.get("map", 30.0),
                      track=rt.get("track", 100.0))
        trace = d.get("trace")
        if trace is not None:
            trace = np.asarray(trace, dtype=float).reshape(-1, 5)
            if trace.shape[0] and np.any(np.diff(trace[:, 0]) < 0):
                raise ValueError("trace stamps must be non-decreasing")
        events = [WorldEvent(t=e["t"], op=e["op"], box=e.get("box"))
                  for e in d.get("world_events", [])]
        return cls(
            name=d.get("name", "unnamed"), seed=int(d.get("seed", 0)),
            duration=float(d.get("duration", 10.0)), world=world, sensors=sensors,
            start=np.asarray(veh.get("start", [0, 0, 2]), dtype=float),
            start_yaw=float(veh.get("yaw", 0.0)),
            r_v=float(veh.get("radius", 0.3)), a_max=float(veh.get("a_max", 6.0)),
            tracking=veh.get("tracking", "perfect"),
            tau_lag=float(veh.get("tau_lag", 0.15)),
            planner=planner, map_params=map_params, rates=rates, trace=trace,
            world_events=events)

    @classmethod
    def from_file(cls, path) -> "Scenario":
        try:
            with open(path) as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ValueError(f"cannot load scenario {path}: {e}") from e
        return cls.from_dict(data)

    @classmethod
    def load(cls, name_or_path) -> "Scenario":
        """Resolve a filesystem path or the bare name of a shipped scenario."""
        p = Path(name_or_path)
        if p.exists():
            return cls.from_file(p)
        shipped = resources.files("mpteleop") / "scenarios" / f"{name_or_path}.json"
        if shipped.is_file():
            return cls.from_dict(json.loads(shipped.read_text()))
        raise ValueError(f"scenario {name_or_path!r} not found "
                         f"(not a file, not shipped: {shipped_names()})")


def shipped_names():
    base = resources.files("mpteleop") / "scenarios"
    return sorted(p.name.removesuffix(".json") for p in base.iterdir()
                  if p.name.endswith(".json"))


def apply_overrides(scn: Scenario, *, r=None, r_v=None, t_base=None, v_max=None,
                    voxel_size=None, duration=None, seed=None) -> Scenario:
    """CLI parameter overrides; v_max rescales the forward-velocity axis."""
    if r is not None:
        scn.planner.r = float(r)
    if r_v is not None:
        scn.r_v = float(r_v)
    if t_base is not None:
        scn.planner.t_base = float(t_base)
    if v_max is not None:
        g = scn.planner.grid
        scn.planner.grid = ActionGrid.regular(
            vx=(g.vx_bounds[0], float(v_max), g.counts[0]),
            omega=(*g.omega_bounds, g.counts[1]),
            vz=(*g.vz_bounds, g.counts[2]), rotation=g.rotation)
    if voxel_size is not None:
        scn.map_params.voxel_size = float(voxel_size)
    if duration is not None:
        scn.duration = float(duration)
    if seed is not None:
        scn.seed = int(seed)
    return scn
