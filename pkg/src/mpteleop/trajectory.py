"""Snap-continuous motion primitives.

A primitive is four 8th-order polynomials (x, y, z, yaw) over tau in
[0, T], generated in a gravity-aligned local frame from a velocity-space
action. The nine coefficients per axis interpolate the full reference
state (orders 0-4) at tau=0, meet the unicycle endpoint velocity at
tau=T, and bring acceleration, jerk and snap to zero at tau=T; the
endpoint position (and yaw angle) stay unconstrained.

The constraint system is assembled once in normalized time s = tau/T, so
a single constant 9x9 inverse serves every axis, action and duration;
per-call work is one small matmul plus a power-of-T rescale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import wrap_angle

GRAVITY = 9.80665

# falling factorials: _FALL[o, i] = i! / (i-o)!  (0 where i < o)
_FALL = np.zeros((5, 9))
for _o in range(5):
    for _i in range(9):
        if _i >= _o:
            _FALL[_o, _i] = math.factorial(_i) / math.factorial(_i - _o)


def _constraint_matrix():
    """Rows: orders 0-4 at s=0, then orders 1-4 at s=1."""
    a = np.zeros((9, 9))
    for j in range(5):
        a[j, j] = math.factorial(j)
    for o in range(1, 5):
        a[4 + o] = _FALL[o]
    return a


_A = _constraint_matrix()
# block inverse: [[D, 0], [L, M]]^-1 = [[D^-1, 0], [-M^-1 L D^-1, M^-1]]
_D_INV = np.diag(1.0 / np.diag(_A[:5, :5]))
_M_INV = np.linalg.inv(_A[5:, 5:])
_A_INV = np.zeros((9, 9))
_A_INV[:5, :5] = _D_INV
_A_INV[5:, 5:] = _M_INV
_A_INV[5:, :5] = -_M_INV @ _A[5:, :5] @ _D_INV

_RESIDUAL_TOL = 1e-8


class GenerationError(RuntimeError):
    """Primitive generation could not satisfy the boundary constraints."""


class FreeFallError(ValueError):
    """Commanded acceleration cancels gravity; thrust direction undefined."""


@dataclass(frozen=True)
class Action:
    """Operator intent in the local frame: forward and vertical velocity, yaw rate."""

    vx: float = 0.0
    vz: float = 0.0
    omega: float = 0.0

    def as_array(self):
        return np.array([self.vx, self.vz, self.omega])


@dataclass(frozen=True)
class LocalFrame:
    """Gravity-aligned frame snapshotted at a regeneration instant."""

    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))
    heading: float = 0.0
    stamp: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float).reshape(3))


class RefState:
    """Position/yaw and time derivatives 1-4, one 4-vector (x, y, z, yaw) per order."""

    __slots__ = ("derivs",)

    def __init__(self, derivs):
        derivs = np.asarray(derivs, dtype=float).reshape(5, 4).copy()
        if not np.all(np.isfinite(derivs)):
            raise ValueError("reference state must be finite")
        derivs[0, 3] = wrap_angle(derivs[0, 3])
        self.derivs = derivs

    @classmethod
    def zero(cls):
        return cls(np.zeros((5, 4)))

    @property
    def pos(self):
        return self.derivs[0, :3]

    @property
    def yaw(self):
        return float(self.derivs[0, 3])

    @property
    def vel(self):
        return self.derivs[1, :3]

    def __repr__(self):
        return f"RefState(pos={self.pos}, yaw={self.yaw:.3f})"


@dataclass(frozen=True)
class MotionPrimitive:
    """Four 8th-order polynomials in local-frame time tau in [0, T]."""

    coeffs: np.ndarray          # (4, 9), row order x, y, z, yaw; powers 0..8
    duration: float
    action: Action
    frame: LocalFrame

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float).reshape(4, 9))
        if not self.duration > 0:
            raise ValueError("duration must be positive")

    def evaluate(self, tau, order=0):
        """Order-th derivative of (x, y, z, yaw) at tau, in the local frame."""
        if not 0 <= order <= 4:
            raise ValueError("order must be in 0..4")
        if tau < -1e-9 or tau > self.duration + 1e-9:
            raise ValueError(f"tau={tau} outside [0, {self.duration}]")
        scaled = self.coeffs * _FALL[order]
        out = scaled[:, 8].copy()
        for i in range(7, order - 1, -1):
            out = out * tau + scaled[:, i]
        return out

    def to_world(self, tau, order=0):
        """Same as evaluate, rotated (and for order 0 translated) into the world frame."""
        v = self.evaluate(tau, order)
        c, s = np.cos(self.frame.heading), np.sin(self.frame.heading)
        out = np.array([c * v[0] - s * v[1], s * v[0] + c * v[1], v[2], v[3]])
        if order == 0:
            out[:3] += self.frame.origin
            out[3] += self.frame.heading
        return out

    def world_position_coeffs(self):
        """(3, 9) world-frame position coefficients (rotation folded in)."""
        c, s = np.cos(self.frame.heading), np.sin(self.frame.heading)
        wc = np.empty((3, 9))
        wc[0] = c * self.coeffs[0] - s * self.coeffs[1]
        wc[1] = s * self.coeffs[0] + c * self.coeffs[1]
        wc[2] = self.coeffs[2]
        wc[:, 0] += self.frame.origin
        return wc


def unicycle_velocity(action: Action, tau):
    """Velocity 4-vector (xdot, ydot, zdot, yawdot) of the constant-action unicycle."""
    ang = action.omega * tau
    return np.array([action.vx * np.cos(ang), action.vx * np.sin(ang),
                     action.vz, action.omega])


def _rhs_matrix(derivs, vend, t):
    """(9, 4) normalized-time constraint RHS for one primitive."""
    rhs = np.zeros((9, 4))
    tp = t ** np.arange(5)
    rhs[:5] = derivs * tp[:, None]
    rhs[5] = vend * t
    return rhs


def _solve_normalized(rhs, t):
    b = _A_INV @ rhs
    resid = np.abs(_A @ b - rhs).max()
    if resid > _RESIDUAL_TOL * max(1.0, np.abs(rhs).max()):
        raise GenerationError(
            f"constraint residual {resid:.3e} exceeds tolerance; T={t} too small "
            "for the requested boundary data")
    return b


def generate_primitive(ref: RefState, action: Action, t, frame: LocalFrame | None = None,
                       rotation=0.0) -> MotionPrimitive:
    """Build one primitive from an in-frame reference state and an action.

    `rotation` turns the endpoint velocity about the frame z-axis (library
    rotation); the yaw-rate endpoint is unaffected.
    """
    if not t > 0:
        raise ValueError("primitive duration must be > 0")
    if frame is None:
        frame = LocalFrame()
    ang = action.omega * t + rotation
    vend = np.array([action.vx * np.cos(ang), action.vx * np.sin(ang),
                     action.vz, action.omega])
    rhs = _rhs_matrix(ref.derivs, vend, t)
    b = _solve_normalized(rhs, t)
    coeffs = (b / (t ** np.arange(9))[:, None]).T
    return MotionPrimitive(coeffs=coeffs, duration=float(t), action=action, frame=frame)


def generate_batch(ref: RefState, actions, ts, frame: LocalFrame, rotation=0.0):
    """Coefficient blocks (K, 4, 9) for many actions at once (one matmul)."""
    actions = np.asarray(actions, dtype=float).reshape(-1, 3)
    k = actions.shape[0]
    ts = np.broadcast_to(np.asarray(ts, dtype=float), (k,))
    if np.any(ts <= 0):
        raise ValueError("primitive durations must be > 0")
    ang = actions[:, 2] * ts + rotation
    vend = np.stack([actions[:, 0] * np.cos(ang), actions[:, 0] * np.sin(ang),
                     actions[:, 1], actions[:, 2]], axis=1)          # (K, 4)
    tp = ts[None, :] ** np.arange(5)[:, None]                        # (5, K)
    rhs = np.zeros((9, k, 4))
    rhs[:5] = ref.derivs[:, None, :] * tp[:, :, None]
    rhs[5] = vend * ts[:, None]
    flat = rhs.reshape(9, k * 4)
    b = _A_INV @ flat
    resid = np.abs(_A @ b - flat).max()
    if resid > _RESIDUAL_TOL * max(1.0, np.abs(flat).max()):
        raise GenerationError(f"constraint residual {resid:.3e} exceeds tolerance")
    scale = ts[None, :] ** np.arange(9)[:, None]                     # (9, K)
    coeffs = (b.reshape(9, k, 4) / scale[:, :, None]).transpose(1, 2, 0)
    return coeffs


def ref_state_world(mp: MotionPrimitive, tau) -> RefState:
    """World-frame reference state along a primitive; clamps past T with
    constant endpoint velocity (higher orders zero)."""
    t = mp.duration
    if tau <= t:
        rows = [mp.to_world(tau, o) for o in range(5)]
        return RefState(np.stack(rows))
    extra = tau - t
    rows = np.stack([mp.to_world(t, o) for o in range(5)])
    rows[0, :3] = rows[0, :3] + rows[1, :3] * extra
    rows[0, 3] = wrap_angle(rows[0, 3] + rows[1, 3] * extra)
    rows[2:] = 0.0
    return RefState(rows)


def frame_from_ref(ref: RefState, stamp=0.0) -> LocalFrame:
    """Local frame snapshotted at a world-frame reference: origin at its
    position, heading at its yaw."""
    return LocalFrame(origin=ref.pos.copy(), heading=ref.yaw, stamp=stamp)


def ref_to_frame(ref: RefState, frame: LocalFrame) -> RefState:
    """Express a world-frame reference state in a local frame."""
    c, s = np.cos(frame.heading), np.sin(frame.heading)
    rows = ref.derivs.copy()
    p = rows[0, :3] - frame.origin
    rows[0, 0] = c * p[0] + s * p[1]
    rows[0, 1] = -s * p[0] + c * p[1]
    rows[0, 2] = p[2]
    rows[0, 3] = wrap_angle(rows[0, 3] - frame.heading)
    x, y = rows[1:, 0].copy(), rows[1:, 1].copy()
    rows[1:, 0] = c * x + s * y
    rows[1:, 1] = -s * x + c * y
    return RefState(rows)


def flat_feedforward(acc, yaw, gravity=GRAVITY):
    """Thrust direction and attitude from flat outputs.

    Returns (body_z, R) where R's columns are the body axes; body z points
    along acc + g*e_z and the body x-axis heading matches yaw.
    """
    f = np.asarray(acc, dtype=float) + np.array([0.0, 0.0, gravity])
    n = np.linalg.norm(f)
    if n < 1e-9:
        raise FreeFallError("free-fall commanded: acc + g*e_z vanishes")
    z_b = f / n
    x_c = np.array([np.cos(yaw), np.sin(yaw), 0.0])
    y_dir = np.cross(z_b, x_c)
    ny = np.linalg.norm(y_dir)
    if ny < 1e-9:
        raise ValueError("attitude singular: thrust direction parallel to heading")
    y_b = y_dir / ny
    x_b = np.cross(y_b, z_b)
    return z_b, np.column_stack([x_b, y_b, z_b])
