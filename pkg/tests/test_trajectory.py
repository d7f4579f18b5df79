import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpteleop.trajectory import (
    Action,
    FreeFallError,
    LocalFrame,
    MotionPrimitive,
    RefState,
    flat_feedforward,
    frame_from_ref,
    generate_batch,
    generate_primitive,
    ref_state_world,
    ref_to_frame,
    unicycle_velocity,
)


def random_ref(rng, scale=1.0):
    d = rng.normal(size=(5, 4))
    d[1] *= 5 * scale
    d[2] *= 8 * scale
    d[3] *= 15 * scale
    d[4] *= 30 * scale
    return RefState(d)


def poly_derivative_at(coeffs_low_first, tau, order):
    """Independent evaluation path: numpy poly1d/polyder."""
    p = np.poly1d(coeffs_low_first[::-1])
    return float(np.polyval(np.polyder(p, order), tau)) if order else float(np.polyval(p, tau))


# ---------------------------------------------------------------- unicycle

def test_unicycle_straight_line():
    assert np.allclose(unicycle_velocity(Action(1, 0, 0), 5.0), [1, 0, 0, 0])


def test_unicycle_quarter_turn():
    v = unicycle_velocity(Action(2, 0.5, np.pi / 2), 1.0)
    assert np.allclose(v, [0, 2, 0.5, np.pi / 2], atol=1e-12)


def test_unicycle_pure_yaw():
    assert np.allclose(unicycle_velocity(Action(0, 0, 1.0), 0.7), [0, 0, 0, 1.0])


# ---------------------------------------------------------------- generation

def test_zero_boundary_data_gives_zero_polynomial():
    mp = generate_primitive(RefState.zero(), Action(), 1.3)
    assert np.abs(mp.coeffs).max() == 0.0


def test_forward_action_matches_dense_solver_oracle():
    # frozen from an independent raw-time dense solve (np.polyder row assembly)
    expected_x = np.array([0, 0, 0, 0, 0, 7 / 16, -7 / 16, 5 / 32, -5 / 256])
    mp = generate_primitive(RefState.zero(), Action(1, 0, 0), 2.0)
    assert np.abs(mp.coeffs[1:]).max() == 0.0
    np.testing.assert_allclose(mp.coeffs[0], expected_x, atol=1e-12)
    # every constraint re-checked through numpy's polynomial machinery
    for order in range(5):
        assert abs(poly_derivative_at(mp.coeffs[0], 0.0, order)) < 1e-12
    assert abs(poly_derivative_at(mp.coeffs[0], 2.0, 1) - 1.0) < 1e-9
    for order in (2, 3, 4):
        assert abs(poly_derivative_at(mp.coeffs[0], 2.0, order)) < 1e-9


def test_initial_snap_reproduced():
    d = np.zeros((5, 4))
    d[4] = [3.7, -1.2, 0.4, 2.2]
    mp = generate_primitive(RefState(d), Action(1, 0, 0.3), 1.5)
    np.testing.assert_allclose(mp.evaluate(0.0, 4), d[4], atol=1e-10)


@pytest.mark.parametrize("seed", range(8))
def test_all_nine_constraints_hold(seed):
    rng = np.random.default_rng(seed)
    ref = random_ref(rng)
    action = Action(*rng.uniform(-3, 3, size=3))
    t = rng.uniform(0.5, 2.5)
    mp = generate_primitive(ref, action, t)
    for order in range(5):
        np.testing.assert_allclose(mp.evaluate(0.0, order), ref.derivs[order], atol=1e-6)
    np.testing.assert_allclose(mp.evaluate(t, 1), unicycle_velocity(action, t), atol=1e-6)
    for order in (2, 3, 4):
        np.testing.assert_allclose(mp.evaluate(t, order), 0.0, atol=1e-6)


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(0, 2**31 - 1),
    vx=st.floats(-10, 10),
    vz=st.floats(-3, 3),
    omega=st.floats(-2, 2),
    t=st.floats(0.3, 3.0),
)
def test_constraint_satisfaction_property(seed, vx, vz, omega, t):
    ref = random_ref(np.random.default_rng(seed))
    mp = generate_primitive(ref, Action(vx, vz, omega), t)
    worst = max(
        np.abs(mp.evaluate(0.0, o) - ref.derivs[o]).max() for o in range(5))
    worst = max(worst, np.abs(mp.evaluate(t, 1) - unicycle_velocity(mp.action, t)).max())
    worst = max(worst, max(np.abs(mp.evaluate(t, o)).max() for o in (2, 3, 4)))
    assert worst < 1e-6


def test_batch_matches_single_generation():
    rng = np.random.default_rng(42)
    ref = random_ref(rng)
    actions = rng.uniform(-2, 2, size=(25, 3))
    ts = rng.uniform(0.8, 2.2, size=25)
    frame = LocalFrame(origin=[1, 2, 3], heading=0.7)
    batch = generate_batch(ref, actions, ts, frame, rotation=0.3)
    for i in range(25):
        single = generate_primitive(
            ref, Action(*actions[i]), ts[i], frame, rotation=0.3)
        np.testing.assert_allclose(batch[i], single.coeffs, atol=1e-12)


def test_nonpositive_duration_rejected():
    with pytest.raises(ValueError):
        generate_primitive(RefState.zero(), Action(1, 0, 0), 0.0)
    with pytest.raises(ValueError):
        generate_primitive(RefState.zero(), Action(1, 0, 0), -1.0)


# ---------------------------------------------------------------- evaluation

def test_zero_primitive_evaluates_to_zero():
    mp = generate_primitive(RefState.zero(), Action(), 1.0)
    for order in range(5):
        assert np.all(mp.evaluate(0.61, order) == 0.0)


def test_tau_out_of_range_rejected():
    mp = generate_primitive(RefState.zero(), Action(1, 0, 0), 1.0)
    with pytest.raises(ValueError):
        mp.evaluate(-0.1)
    with pytest.raises(ValueError):
        mp.evaluate(1.2)
    with pytest.raises(ValueError):
        mp.evaluate(0.5, order=5)


def test_terminal_acceleration_vanishes():
    rng = np.random.default_rng(3)
    mp = generate_primitive(random_ref(rng), Action(2, -0.5, 1.1), 1.8)
    np.testing.assert_allclose(mp.evaluate(1.8, 2), 0.0, atol=1e-9)


# ---------------------------------------------------------------- world frame

def test_to_world_identity_frame():
    rng = np.random.default_rng(5)
    mp = generate_primitive(random_ref(rng), Action(1, 0.2, 0.5), 1.4)
    for order in range(5):
        np.testing.assert_allclose(
            mp.to_world(0.9, order), mp.evaluate(0.9, order), atol=1e-12)


def test_to_world_quarter_turn_translation():
    coeffs = np.zeros((4, 9))
    coeffs[0, 0] = 1.0  # constant in-frame position (1, 0, 0), yaw 0
    mp = MotionPrimitive(coeffs, 1.0, Action(), LocalFrame([1, 0, 0], np.pi / 2))
    np.testing.assert_allclose(mp.to_world(0.3, 0), [1, 1, 0, np.pi / 2], atol=1e-12)


def test_to_world_preserves_speed():
    rng = np.random.default_rng(11)
    ref = random_ref(rng)
    for heading in rng.uniform(-np.pi, np.pi, size=5):
        frame = LocalFrame([0, 0, 0], heading)
        mp = generate_primitive(ref, Action(3, 1, -0.5), 2.0, frame)
        v_local = mp.evaluate(1.1, 1)
        v_world = mp.to_world(1.1, 1)
        assert abs(np.linalg.norm(v_world[:3]) - np.linalg.norm(v_local[:3])) < 1e-12


def test_frame_equivariance():
    rng = np.random.default_rng(9)
    ref = random_ref(rng)
    action = Action(2.5, 0.4, -0.9)
    base = generate_primitive(ref, action, 1.6, LocalFrame())
    h = 1.234
    rot = generate_primitive(ref, action, 1.6, LocalFrame(heading=h))
    c, s = np.cos(h), np.sin(h)
    rz = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    for tau in (0.0, 0.4, 1.1, 1.6):
        for order in range(5):
            a = rot.to_world(tau, order)
            b = base.to_world(tau, order)
            np.testing.assert_allclose(a[:3], rz @ b[:3], atol=1e-9)
            if order == 0:
                assert abs(np.angle(np.exp(1j * (a[3] - b[3] - h)))) < 1e-9
            else:
                assert abs(a[3] - b[3]) < 1e-9


def test_world_position_coeffs_match_to_world():
    rng = np.random.default_rng(21)
    mp = generate_primitive(random_ref(rng), Action(4, -1, 1.5), 2.0,
                            LocalFrame([3, -2, 1], 0.8))
    wc = mp.world_position_coeffs()
    for tau in np.linspace(0, 2.0, 7):
        pos = [poly_derivative_at(wc[a], tau, 0) for a in range(3)]
        np.testing.assert_allclose(pos, mp.to_world(tau, 0)[:3], atol=1e-10)


# ---------------------------------------------------------------- chaining

def chain_once(rng, mp, t_switch, action, t_new):
    ref_w = ref_state_world(mp, t_switch)
    frame = frame_from_ref(ref_w, stamp=t_switch)
    ref_local = ref_to_frame(ref_w, frame)
    assert np.abs(ref_local.pos).max() < 1e-12
    assert abs(ref_local.yaw) < 1e-12
    return generate_primitive(ref_local, action, t_new, frame)


def test_chaining_continuity():
    rng = np.random.default_rng(17)
    worst = 0.0
    for _ in range(50):
        mp = generate_primitive(random_ref(rng), Action(*rng.uniform(-3, 3, 3)),
                                rng.uniform(1.0, 2.5))
        t_s = rng.uniform(0.2, 0.8) * mp.duration
        nxt = chain_once(rng, mp, t_s, Action(*rng.uniform(-3, 3, 3)),
                         rng.uniform(1.0, 2.5))
        for order in range(5):
            a = mp.to_world(t_s, order)
            b = nxt.to_world(0.0, order)
            d = np.abs(a - b)
            if order == 0:
                d[3] = abs(np.angle(np.exp(1j * (a[3] - b[3]))))
            worst = max(worst, d.max())
    assert worst < 1e-6


def test_reference_clamps_past_duration():
    mp = generate_primitive(RefState.zero(), Action(2, 0, 0), 1.0)
    ref = ref_state_world(mp, 1.5)
    end = mp.to_world(1.0, 0)
    vel = mp.to_world(1.0, 1)
    np.testing.assert_allclose(ref.pos, end[:3] + 0.5 * vel[:3], atol=1e-9)
    np.testing.assert_allclose(ref.derivs[2:], 0.0)


# ---------------------------------------------------------------- feedforward

def test_feedforward_hover():
    z, r = flat_feedforward(np.zeros(3), 0.0)
    np.testing.assert_allclose(z, [0, 0, 1], atol=1e-12)
    np.testing.assert_allclose(r, np.eye(3), atol=1e-12)


def test_feedforward_forty_five_degree_pitch():
    g = 9.80665
    z, r = flat_feedforward([g, 0, 0], 0.0, gravity=g)
    np.testing.assert_allclose(z, [1 / np.sqrt(2), 0, 1 / np.sqrt(2)], atol=1e-12)
    assert abs(np.linalg.det(r) - 1.0) < 1e-12
    np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-12)


def test_feedforward_free_fall_rejected():
    g = 9.80665
    with pytest.raises(FreeFallError):
        flat_feedforward([0, 0, -g], 0.0, gravity=g)
