"""Closed-loop session: deterministic fixed-step scheduler firing sensor,
mapping, planning and tracking events in stamp order (ties broken in that
order), with optional wall-clock pacing and a live telemetry/teleop socket.

Per planning cycle one metrics row is recorded: operator vs selected
action, pruning flags, clearance, speed, and per-stage timings.
"""

from __future__ import annotations

import csv
import heapq
import itertools
import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .localmap import LocalMap
from .planner import adaptive_durations, nearest_action_queue, prune_and_select
from .scenario import Scenario
from .trajectory import (
    Action,
    RefState,
    frame_from_ref,
    generate_primitive,
    ref_state_world,
    ref_to_frame,
)
from .world import VehicleState, World, raycast_scan, step_vehicle

_PRIO = {"world": -1, "sensor": 0, "map": 1, "plan": 2, "track": 3}

METRICS_HEADER = [
    "stamp", "op_vx", "op_vz", "op_omega", "sel_vx", "sel_vz", "sel_omega",
    "pruned", "emergency", "min_clearance", "speed", "accel",
    "gen_ms", "prune_ms", "map_ms",
]


@dataclass
class MetricsRecord:
    stamp: float
    op_vx: float
    op_vz: float
    op_omega: float
    sel_vx: float
    sel_vz: float
    sel_omega: float
    pruned: bool
    emergency: bool
    min_clearance: float
    speed: float
    accel: float
    gen_ms: float
    prune_ms: float
    map_ms: float

    def csv_row(self):
        d = asdict(self)
        d["pruned"] = int(self.pruned)
        d["emergency"] = int(self.emergency)
        return [d[k] for k in METRICS_HEADER]


@dataclass
class SessionResult:
    exit_code: int
    summary: dict
    rows: list
    metrics_path: str | None = None
    path: np.ndarray | None = None      # (N, 5) rows (t, x, y, z, yaw) when captured


class TraceInput:
    """Scripted operator: rows (t, vx, vz, omega, rot), held between stamps."""

    def __init__(self, rows):
        rows = np.asarray(rows, dtype=float).reshape(-1, 5)
        self.ts = rows[:, 0]
        self.rows = rows

    def at(self, t):
        i = int(np.searchsorted(self.ts, t, side="right")) - 1
        if i < 0:
            return Action(), 0.0
        r = self.rows[i]
        return Action(r[1], r[2], r[3]), float(r[4])


class LatestActionCell:
    """Single-writer/single-reader latest-value mailbox for live input."""

    def __init__(self):
        import threading
        self._lock = threading.Lock()
        self._value = None  # (Action, rot, wall time)

    def set(self, action, rot, wall=None):
        with self._lock:
            self._value = (action, rot, time.monotonic() if wall is None else wall)

    def get(self):
        with self._lock:
            return self._value


class Session:
    """One closed-loop run of a scenario."""

    def __init__(self, scenario: Scenario, mode="scripted", listen=None,
                 metrics_path=None, realtime=None, record_scans=None,
                 renew_last_action=False, input_timeout=0.5, quiet=True,
                 capture_path=False):
        if mode not in ("scripted", "live"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "scripted" and scenario.trace is None:
            raise ValueError("scripted mode requires an input trace")
        self.scenario = scenario
        self.mode = mode
        self.listen = listen
        self.metrics_path = metrics_path
        self.realtime = (mode == "live") if realtime is None else bool(realtime)
        self.record_scans = record_scans
        self.renew_last_action = renew_last_action
        self.input_timeout = input_timeout
        self.quiet = quiet
        self.capture_path = capture_path
        self.mailbox = LatestActionCell()
        self._server = None
        self._path = []

    # ------------------------------------------------------------- helpers

    def _initial_ref(self):
        rows = np.zeros((5, 4))
        rows[0, :3] = self.scenario.start
        rows[0, 3] = self.scenario.start_yaw
        return RefState(rows)

    def _operator_action(self, t, trace, last):
        if self.mode == "scripted":
            return trace.at(t)
        msg = self.mailbox.get()
        if msg is None or time.monotonic() - msg[2] > self.input_timeout:
            if self.renew_last_action and last is not None:
                return last
            return Action(), 0.0
        return msg[0], msg[1]

    def _config_payload(self):
        scn = self.scenario
        g = scn.planner.grid
        return {
            "type": "config",
            "scenario": scn.name,
            "grid": {"vx": [*g.vx_bounds, g.counts[0]],
                     "omega": [*g.omega_bounds, g.counts[1]],
                     "vz": [*g.vz_bounds, g.counts[2]]},
            "r": scn.planner.r, "r_v": scn.r_v,
            "voxel_size": scn.map_params.voxel_size,
            "rates": {"plan": scn.rates.plan, "map": scn.rates.map,
                      "track": scn.rates.track},
            "start": list(map(float, scn.start)),
            "bounds": scn.world.bounds.tolist(),
            "world": self._world_outline(),
        }

    def _world_outline(self):
        w = self.scenario.world
        out = [{"type": "cylinder", "center": [c[0], c[1]], "radius": c[2]}
               for c in w.cylinders]
        out += [{"type": "box", "min": list(b[:3]), "max": list(b[3:])}
                for b in w.boxes]
        out += [{"type": "wall", "p1": list(v[:2]), "p2": list(v[2:])}
                for v in w.walls]
        return out

    # ----------------------------------------------------------------- run

    def run(self) -> SessionResult:
        if self.mode == "live" and self.listen is not None:
            from .protocol import TelemetryServer
            self._server = TelemetryServer(
                self.listen[0], self.listen[1],
                on_action=lambda a, rot: self.mailbox.set(a, rot),
                config_provider=self._config_payload)
            self._server.start()
            self.bound_port = self._server.port
        try:
            rows, audit = self._loop()
        finally:
            if self._server is not None:
                self._server.stop()
                self._server = None
        summary = self._summarize(rows, audit)
        if self.metrics_path:
            self._write_metrics(rows, summary)
        if not self.quiet:
            print(json.dumps(summary, indent=2))
        path = np.asarray(self._path) if self._path else None
        return SessionResult(exit_code=0, summary=summary, rows=rows,
                             metrics_path=self.metrics_path, path=path)

    def _loop(self):
        scn = self.scenario
        world = scn.world
        added_boxes = []
        lm = LocalMap(voxel_size=scn.map_params.voxel_size,
                      alpha_k=scn.map_params.alpha_k,
                      alpha_s=scn.map_params.alpha_s,
                      beta_s=scn.map_params.beta_s)
        trace = TraceInput(scn.trace) if scn.trace is not None else None

        ref0 = self._initial_ref()
        frame0 = frame_from_ref(ref0, 0.0)
        active = generate_primitive(ref_to_frame(ref0, frame0), Action(),
                                    scn.planner.t_base, frame0)
        active_start = 0.0
        state = VehicleState.at_rest(scn.start, scn.start_yaw, 0.0)
        last_op = None

        rows = []
        recorded = [] if self.record_scans else None
        pending = []
        last_map_ms = 0.0
        audit = {"min_clearance": np.inf, "max_speed": 0.0, "max_accel": 0.0}

        events = []
        seq = itertools.count()

        def push(t, kind, data=None):
            heapq.heappush(events, (t, _PRIO[kind], next(seq), kind, data))

        for i in range(len(scn.sensors)):
            push(0.0, "sensor", i)
        push(0.0, "map")
        push(0.0, "plan")
        push(0.0, "track")
        for ev in scn.world_events:
            if ev.t < scn.duration:
                push(ev.t, "world", ev)
        counters = {"sensor": [0] * len(scn.sensors), "map": 0, "plan": 0,
                    "track": 0}

        tele = None
        if self._server:
            tele = _Telemetry(self, scn)
            self._server.snapshot_provider = tele.snapshot_messages
        wall0 = time.monotonic()

        while events:
            t, _, _, kind, data = heapq.heappop(events)
            if self.realtime:
                lag = wall0 + t - time.monotonic()
                if lag > 1e-4:
                    time.sleep(lag)

            if kind == "world":
                if data.op == "add_box":
                    added_boxes.append(data.box)
                elif data.op == "remove_added":
                    added_boxes.clear()
                else:
                    raise ValueError(f"unknown world event op {data.op!r}")
                boxes = (np.concatenate([scn.world.boxes,
                                         np.asarray(added_boxes, dtype=float).reshape(-1, 6)])
                         if added_boxes else scn.world.boxes)
                world = World(cylinders=scn.world.cylinders, boxes=boxes,
                              walls=scn.world.walls, bounds=scn.world.bounds)

            elif kind == "sensor":
                i = data
                sensor = scn.sensors[i]
                scan = raycast_scan(world, state.pose(), sensor, stamp=t)
                pending.append((scan, state.pose()))
                if recorded is not None:
                    recorded.append(scan)
                counters["sensor"][i] += 1
                nxt = counters["sensor"][i] / sensor.rate
                if nxt < scn.duration - 1e-12:
                    push(nxt, "sensor", i)

            elif kind == "map":
                if pending:
                    pending.sort(key=lambda sp: (sp[0].stamp, sp[0].sensor_id))
                    t0 = time.perf_counter()
                    for scan, body in pending:
                        lm.integrate(scan, body_pose=body)
                    last_map_ms = (time.perf_counter() - t0) * 1e3
                    pending = []
                    if tele:
                        tele.on_map(t, lm)
                counters["map"] += 1
                nxt = counters["map"] / scn.rates.map
                if nxt < scn.duration - 1e-12:
                    push(nxt, "map")

            elif kind == "plan":
                op_action, rot = self._operator_action(t, trace, last_op)
                last_op = (op_action, rot)
                ref_w = ref_state_world(active, t - active_start)
                frame = frame_from_ref(ref_w, t)
                ref_local = ref_to_frame(ref_w, frame)
                view = lm.snapshot()
                timings = {}
                t0 = time.perf_counter()
                result = prune_and_select(
                    scn.planner.grid, op_action, ref_local, frame, view,
                    scn.planner.r, scn.r_v, scn.planner.dt,
                    t_base=scn.planner.t_base, k_t=scn.planner.k_t,
                    rotation=rot + scn.planner.rotation, a_max=scn.a_max,
                    timings=timings)
                total_ms = (time.perf_counter() - t0) * 1e3
                gen_ms = timings.get("generation", 0.0) * 1e3
                active = result.chosen
                active_start = t
                rows.append(MetricsRecord(
                    stamp=t, op_vx=op_action.vx, op_vz=op_action.vz,
                    op_omega=op_action.omega, sel_vx=result.chosen_action.vx,
                    sel_vz=result.chosen_action.vz,
                    sel_omega=result.chosen_action.omega,
                    pruned=result.operator_action_pruned,
                    emergency=result.emergency,
                    min_clearance=result.min_clearance,
                    speed=state.speed,
                    accel=float(np.linalg.norm(state.acceleration)),
                    gen_ms=gen_ms, prune_ms=max(total_ms - gen_ms, 0.0),
                    map_ms=last_map_ms))
                if tele:
                    tele.on_plan(t, result, scn, ref_local, frame, op_action)
                counters["plan"] += 1
                nxt = counters["plan"] / scn.rates.plan
                if nxt < scn.duration - 1e-12:
                    push(nxt, "plan")

            elif kind == "track":
                state = step_vehicle(state, active, active_start, t,
                                     mode=scn.tracking, tau_lag=scn.tau_lag)
                if self.capture_path:
                    self._path.append((t, *state.position, state.yaw))
                if world.n_obstacles:
                    audit["min_clearance"] = min(
                        audit["min_clearance"],
                        world.min_obstacle_distance(state.position))
                audit["max_speed"] = max(audit["max_speed"], state.speed)
                audit["max_accel"] = max(audit["max_accel"],
                                         float(np.linalg.norm(state.acceleration)))
                if tele:
                    tele.on_track(t, state)
                counters["track"] += 1
                nxt = counters["track"] / scn.rates.track
                if nxt < scn.duration - 1e-12:
                    push(nxt, "track")

        if recorded is not None:
            from .scanlog import write_scanlog
            write_scanlog(self.record_scans, recorded)
        audit["events"] = {"plan": counters["plan"], "map": counters["map"],
                           "track": counters["track"],
                           "sensor": list(counters["sensor"])}
        return rows, audit

    # ------------------------------------------------------------- metrics

    @staticmethod
    def _summarize(rows, audit):
        def stats(vals):
            a = np.asarray(vals, dtype=float)
            return {"mean": float(a.mean()), "std": float(a.std())} if a.size \
                else {"mean": 0.0, "std": 0.0}

        return {
            "cycles": len(rows),
            "gen_ms": stats([r.gen_ms for r in rows]),
            "prune_ms": stats([r.prune_ms for r in rows]),
            "map_ms": stats([r.map_ms for r in rows]),
            "max_speed": audit["max_speed"],
            "max_accel": audit["max_accel"],
            "min_gt_clearance": (None if np.isinf(audit["min_clearance"])
                                 else float(audit["min_clearance"])),
            "pruned_cycles": sum(1 for r in rows if r.pruned),
            "emergency_cycles": sum(1 for r in rows if r.emergency),
            "final_speed": rows[-1].speed if rows else 0.0,
            "events": audit.get("events", {}),
        }

    def _write_metrics(self, rows, summary):
        with open(self.metrics_path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(METRICS_HEADER)
            for r in rows:
                w.writerow(r.csv_row())
        with open(str(self.metrics_path) + ".summary.json", "w") as f:
            json.dump(summary, f, indent=2)


class _Telemetry:
    """Decimated broadcast state for a live session."""

    def __init__(self, session, scn):
        self.session = session
        self.server = session._server
        self.state_period = 1.0 / 30.0
        self.map_period = 0.2
        self.library_period = 0.2
        self.checksum_period = 1.0
        self.next_state = 0.0
        self.next_map = 0.0
        self.next_library = 0.0
        self.next_checksum = 0.0
        self.sent_voxels = set()
        self.voxel_size = scn.map_params.voxel_size
        self.library_cap = 400

    def on_track(self, t, state):
        if t + 1e-12 < self.next_state:
            return
        self.next_state = t + self.state_period
        self.server.broadcast({
            "type": "state", "t": round(t, 4),
            "pos": [round(float(v), 3) for v in state.position],
            "vel": [round(float(v), 3) for v in state.velocity],
            "yaw": round(state.yaw, 4),
            "speed": round(state.speed, 3),
            "accel": [round(float(v), 3) for v in state.acceleration],
        })

    def _voxel_indices(self, lm):
        parts = [lm.current_points, lm.previous_points, lm.buffer_points]
        pts = np.concatenate([p for p in parts if p.shape[0]]) \
            if any(p.shape[0] for p in parts) else np.empty((0, 3))
        idx = np.round(pts / self.voxel_size - 0.5).astype(np.int64)
        return set(map(tuple, idx.tolist()))

    def snapshot_messages(self):
        """Replay base for late joiners: the full decimated voxel state."""
        vs = self.voxel_size
        voxels = sorted(self.sent_voxels)
        return [{
            "type": "map_diff",
            "add": [[(i + 0.5) * vs for i in v] for v in voxels],
            "remove": [],
        }]

    def on_map(self, t, lm):
        if t + 1e-12 >= self.next_map:
            self.next_map = t + self.map_period
            current = self._voxel_indices(lm)
            add = sorted(current - self.sent_voxels)
            remove = sorted(self.sent_voxels - current)
            # publish the new state before broadcasting so a client that
            # registers in between still snapshots a consistent base
            self.sent_voxels = current
            if add or remove:
                vs = self.voxel_size
                self.server.broadcast({
                    "type": "map_diff",
                    "add": [[(i + 0.5) * vs for i in v] for v in add],
                    "remove": [[(i + 0.5) * vs for i in v] for v in remove],
                })
        if t + 1e-12 >= self.next_checksum:
            self.next_checksum = t + self.checksum_period
            from .protocol import voxel_checksum
            self.server.broadcast({
                "type": "map_sum",
                "count": len(self.sent_voxels),
                "fnv": voxel_checksum(self.sent_voxels),
            })

    def on_plan(self, t, result, scn, ref_local, frame, op_action):
        pts = [result.chosen.to_world(tau, 0)[:3]
               for tau in np.linspace(0, result.chosen.duration, 10)]
        self.server.broadcast({
            "type": "chosen", "t": round(t, 4),
            "points": [[round(float(c), 2) for c in p] for p in pts],
            "pruned": bool(result.operator_action_pruned),
            "emergency": bool(result.emergency),
            "clearance": (None if np.isinf(result.min_clearance)
                          else round(result.min_clearance, 3)),
        })
        if t + 1e-12 < self.next_library:
            return
        self.next_library = t + self.library_period
        grid = scn.planner.grid
        stride = max(1, grid.size // self.library_cap)
        sub = np.arange(0, grid.size, stride)
        durations = adaptive_durations(grid, ref_local, scn.planner.t_base,
                                       scn.planner.k_t, scn.planner.rotation)
        op_nearest = int(nearest_action_queue(grid, op_action)[0])
        trajs = []
        chosen_i = -1
        op_i = -1
        for j, gi in enumerate(sub):
            mp = generate_primitive(ref_local, grid.action(gi), durations[gi],
                                    frame, rotation=scn.planner.rotation)
            samples = [mp.to_world(tau, 0)[:3]
                       for tau in np.linspace(0, mp.duration, 10)]
            trajs.append([[round(float(c), 2) for c in p] for p in samples])
            if grid.action(gi) == result.chosen_action:
                chosen_i = j
            if gi == op_nearest:
                op_i = j
        self.server.broadcast({
            "type": "library", "t": round(t, 4), "trajs": trajs,
            "chosen": chosen_i, "op": op_i,
            "pruned": bool(result.operator_action_pruned),
        })


def run_session(scenario, **kwargs) -> SessionResult:
    """Run a scenario (Scenario object, path, or shipped name) to completion."""
    if not isinstance(scenario, Scenario):
        scenario = Scenario.load(scenario)
    return Session(scenario, **kwargs).run()
