"""Action-space discretization and collision-aware primitive selection.

The operator's velocity-space input is snapped to a discretized action
grid; candidates are visited in ascending input distance and the first
whose primitive clears the local map by r + r_v at every sample becomes
the command. When nothing clears, an emergency braking primitive (zero
endpoint velocity over a shortened horizon) is returned and flagged.

A trajectory is feasible only if EVERY sample along it clears the map;
a single clear sample is not enough.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import backend
from .localmap import MapView
from .trajectory import (
    Action,
    LocalFrame,
    MotionPrimitive,
    RefState,
    generate_batch,
    generate_primitive,
)

# candidates generated one-by-one up to here, then batched for the rest;
# the common case pops once, the boxed-in case pops the whole grid
_LAZY_LIMIT = 16


@dataclass(frozen=True)
class ActionGrid:
    """Regular discretization of (v_x, v_z, omega) space.

    actions is (K, 3) with columns (v_x, v_z, omega), flattened with v_x
    outermost and v_z innermost. The zero action must be on the grid; the
    planner's stop fallback depends on it.
    """

    actions: np.ndarray
    vx_bounds: tuple
    vz_bounds: tuple
    omega_bounds: tuple
    counts: tuple
    rotation: float = 0.0

    @classmethod
    def regular(cls, vx=(0.0, 10.0, 25), omega=(-2.0, 2.0, 11), vz=(-1.0, 1.0, 5),
                rotation=0.0) -> "ActionGrid":
        """Build from per-dimension (min, max, count) triples."""
        axes = []
        for lo, hi, n in (vx, omega, vz):
            n = int(n)
            if n < 1 or hi < lo:
                raise ValueError("each dimension needs count >= 1 and max >= min")
            axes.append(np.linspace(lo, hi, n) if n > 1 else np.array([(lo + hi) / 2]))
        vxs, oms, vzs = axes
        acts = np.stack(np.meshgrid(vxs, oms, vzs, indexing="ij"), axis=-1).reshape(-1, 3)
        # meshgrid order is (vx, omega, vz); store columns as (vx, vz, omega)
        acts = acts[:, [0, 2, 1]]
        grid = cls(actions=np.ascontiguousarray(acts),
                   vx_bounds=(vx[0], vx[1]), vz_bounds=(vz[0], vz[1]),
                   omega_bounds=(omega[0], omega[1]),
                   counts=(int(vx[2]), int(omega[2]), int(vz[2])),
                   rotation=float(rotation))
        if grid.zero_index() < 0:
            raise ValueError("action grid must contain the zero action (0, 0, 0)")
        return grid

    @property
    def size(self):
        return self.actions.shape[0]

    def zero_index(self):
        hits = np.flatnonzero(np.abs(self.actions).max(axis=1) <= 1e-9)
        return int(hits[0]) if hits.size else -1

    def action(self, i) -> Action:
        vx, vz, om = self.actions[i]
        return Action(float(vx), float(vz), float(om))

    def clamp(self, a: Action) -> Action:
        return Action(
            float(np.clip(a.vx, *self.vx_bounds)),
            float(np.clip(a.vz, *self.vz_bounds)),
            float(np.clip(a.omega, *self.omega_bounds)),
        )


@dataclass(frozen=True)
class PruneResult:
    chosen: MotionPrimitive
    chosen_action: Action
    operator_action_pruned: bool
    candidates_checked: int
    min_clearance: float
    emergency: bool = False


def nearest_action_queue(grid: ActionGrid, joystick: Action):
    """Grid indices ordered by ascending Euclidean distance to the (clamped)
    operator input; ties prefer smaller |omega|, then |v_z|, then index."""
    j = grid.clamp(joystick).as_array()
    d = np.sqrt(np.square(grid.actions - j).sum(axis=1))
    k = grid.size
    return np.lexsort((np.arange(k), np.abs(grid.actions[:, 1]),
                       np.abs(grid.actions[:, 2]), d))


def adaptive_durations(grid: ActionGrid, ref: RefState, t_base, k_t=0.15,
                       rotation=0.0):
    """Per-action horizons growing with the requested velocity change."""
    if k_t == 0.0:
        return np.full(grid.size, float(t_base))
    vx, vz = grid.actions[:, 0], grid.actions[:, 1]
    vdes = np.stack([vx * np.cos(rotation), vx * np.sin(rotation), vz], axis=1)
    dv = np.sqrt(np.square(vdes - ref.vel).sum(axis=1))
    return np.maximum(t_base, t_base + k_t * dv)


def build_library(grid: ActionGrid, ref: RefState, frame: LocalFrame,
                  durations, rotation=None):
    """One primitive per grid action (used for visualization and timing;
    selection itself generates lazily)."""
    if grid.size == 0:
        raise ValueError("action grid is empty")
    rot = grid.rotation if rotation is None else rotation
    durations = np.broadcast_to(np.asarray(durations, dtype=float), (grid.size,))
    coeffs = generate_batch(ref, grid.actions, durations, frame, rotation=rot)
    return [MotionPrimitive(coeffs[i], float(durations[i]), grid.action(i), frame)
            for i in range(grid.size)]


def _sample_times(duration, dt):
    if dt <= 0:
        raise ValueError("sampling step dt must be > 0")
    n = int(np.floor(duration / dt + 1e-12))
    taus = dt * np.arange(n + 1)
    if duration - taus[-1] > 1e-12:
        taus = np.append(taus, duration)
    return taus


def _world_coeff_rows(coeffs, frame: LocalFrame):
    c, s = np.cos(frame.heading), np.sin(frame.heading)
    wc = np.empty((3, 9))
    wc[0] = c * coeffs[0] - s * coeffs[1]
    wc[1] = s * coeffs[0] + c * coeffs[1]
    wc[2] = coeffs[2]
    wc[:, 0] += frame.origin
    return wc


def collision_check(mp: MotionPrimitive, view: MapView, r, r_v, dt):
    """Sample the primitive at 0, dt, ..., T (T always included) and test the
    exact map clearance at each sample.

    Returns (is_free, min_clearance); min_clearance is inf for an empty map.
    """
    taus = _sample_times(mp.duration, dt)
    free, min_d2 = backend.kern.collision_scan(
        mp.world_position_coeffs(), taus, *view.kernel_args(),
        float(r + r_v), True)
    return bool(free), float(np.sqrt(min_d2))


def _scan_candidate(wc, duration, view, thresh, dt, full_scan):
    taus = _sample_times(duration, dt)
    free, min_d2 = backend.kern.collision_scan(
        wc, taus, *view.kernel_args(), thresh, full_scan)
    return bool(free), float(np.sqrt(min_d2))


def prune_and_select(grid: ActionGrid, joystick: Action, ref: RefState,
                     frame: LocalFrame, view: MapView, r, r_v, dt, *,
                     t_base, k_t=0.15, rotation=None, a_max=6.0,
                     timings=None) -> PruneResult:
    """Pick the collision-free primitive closest (in action space) to the
    operator input; fall back to an emergency brake when the whole grid is
    blocked. Total by construction.

    `timings`, when given, is a dict accumulating 'generation' seconds so
    the caller can split generation from pruning cost.
    """
    if grid.zero_index() < 0:
        raise ValueError("action grid must contain the zero action")
    rot = grid.rotation if rotation is None else rotation
    order = nearest_action_queue(grid, joystick)
    durations = adaptive_durations(grid, ref, t_base, k_t, rot)
    thresh = float(r + r_v)

    def _result(idx, coeffs, checked, clearance):
        chosen = MotionPrimitive(coeffs, float(durations[idx]),
                                 grid.action(idx), frame)
        return PruneResult(chosen=chosen, chosen_action=chosen.action,
                           operator_action_pruned=bool(idx != order[0]),
                           candidates_checked=checked, min_clearance=clearance)

    # common case: the first few pops are generated one at a time
    lazy = min(_LAZY_LIMIT, grid.size)
    for pos in range(lazy):
        idx = order[pos]
        t0 = time.perf_counter()
        mp = generate_primitive(ref, grid.action(idx), durations[idx], frame,
                                rotation=rot)
        if timings is not None:
            timings["generation"] = timings.get("generation", 0.0) + (
                time.perf_counter() - t0)
        wc = _world_coeff_rows(mp.coeffs, frame)
        free, clearance = _scan_candidate(wc, durations[idx], view, thresh, dt,
                                          full_scan=False)
        if free:
            return _result(idx, mp.coeffs, pos + 1, clearance)

    checked = lazy
    rest = order[lazy:]
    if rest.size:
        # crowded case: batch-generate the remaining queue and scan it in
        # one kernel call (still first-free-wins in queue order)
        t0 = time.perf_counter()
        batch = generate_batch(ref, grid.actions[rest], durations[rest],
                               frame, rotation=rot)
        if timings is not None:
            timings["generation"] = timings.get("generation", 0.0) + (
                time.perf_counter() - t0)
        c, s = np.cos(frame.heading), np.sin(frame.heading)
        wcs = np.empty((batch.shape[0], 3, 9))
        wcs[:, 0] = c * batch[:, 0] - s * batch[:, 1]
        wcs[:, 1] = s * batch[:, 0] + c * batch[:, 1]
        wcs[:, 2] = batch[:, 2]
        wcs[:, :, 0] += frame.origin
        first_free, scanned, min_d2 = backend.kern.prune_scan_batch(
            np.ascontiguousarray(wcs), durations[rest], float(dt),
            *view.kernel_args(), thresh)
        checked += int(scanned)
        if first_free >= 0:
            return _result(int(rest[first_free]), batch[first_free], checked,
                           float(np.sqrt(min_d2)))

    # whole grid blocked: brake to rest over a shortened horizon
    t0 = time.perf_counter()
    speed = float(np.linalg.norm(ref.vel))
    t_stop = max(0.3, 2.0 * speed / max(a_max, 1e-6))
    brake = generate_primitive(ref, Action(), t_stop, frame, rotation=rot)
    if timings is not None:
        timings["generation"] = timings.get("generation", 0.0) + (
            time.perf_counter() - t0)
    _, clearance = collision_check(brake, view, r, r_v, dt)
    return PruneResult(chosen=brake, chosen_action=brake.action,
                       operator_action_pruned=True, candidates_checked=checked,
                       min_clearance=clearance, emergency=True)


def max_safe_velocity(a_max, sensor_range, latency):
    """Largest speed whose braking distance plus reaction distance fits
    inside the sensor range: the positive root of v^2/(2a) + v*latency = R."""
    if a_max <= 0 or sensor_range < 0 or latency < 0:
        raise ValueError("a_max must be > 0, sensor_range and latency >= 0")
    return float(-a_max * latency
                 + np.sqrt(a_max * a_max * latency * latency
                           + 2.0 * a_max * sensor_range))
