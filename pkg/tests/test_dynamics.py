from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tumblesim.chain_model import ControllerGains
from tumblesim.contact import detect_contacts, ground_force, world_force
from tumblesim.dynamics import (IllConditionedError, TumblerSystem, actuation_matrix, bias_vector,
                                controller_energy, dynamics_terms, forward_dynamics,
                                gravity_forces, gravity_vector, mass_matrix, posture_controller,
                                potential_energy, solve_spd)
from tumblesim.kinematics import State, com_velocities, forward_kinematics, point_jacobian
from tumblesim.momentum import angular_momentum_com, kinetic_energy
from tumblesim.validation import random_state

EPS = 1e-4


def advance(state, qdd, h):
    """Second-order Taylor step used as a finite-difference probe."""
    return State.from_vectors(state.q + h * state.qd + 0.5 * h * h * qdd, state.qd + h * qdd)


def rate_of(fn, state, qdd, eps=EPS):
    """Time derivative along (qd, qdd): central differences with one Richardson step."""
    def central(h):
        return (np.asarray(fn(advance(state, qdd, h)))
                - np.asarray(fn(advance(state, qdd, -h)))) / (2 * h)
    return (4 * central(eps / 2) - central(eps)) / 3


def with_gains(robot, **kw):
    return replace(robot, controller_gains=ControllerGains(**kw))


def test_mass_matrix_symmetric_positive_definite(robot, rng):
    for _ in range(200):
        D = mass_matrix(robot, random_state(robot, rng))
        assert np.abs(D - D.T).max() < 1e-12
        assert np.linalg.eigvalsh(D).min() > 0.0


def test_energy_oracle(robot, states):
    for s in states:
        assert 0.5 * s.qd @ mass_matrix(robot, s) @ s.qd == pytest.approx(
            kinetic_energy(robot, s), rel=1e-9)


def test_translational_block_is_total_mass(robot, states):
    for s in states[:5]:
        D = mass_matrix(robot, s)
        np.testing.assert_allclose(D[11:14, 11:14], robot.total_mass * np.eye(3), atol=1e-12)
        # translational rows times unit head velocity give the total momentum
        for c in range(3):
            qd = np.zeros(17)
            qd[11 + c] = 1.0
            np.testing.assert_allclose(D[11:14] @ qd, robot.total_mass * np.eye(3)[c], atol=1e-12)


def test_partition_blocks(robot, states):
    t = dynamics_terms(robot, states[0])
    np.testing.assert_array_equal(t.D_Ha, t.D_aH.T)
    assert t.D_a.shape == (11, 11) and t.D_H.shape == (6, 6)
    np.testing.assert_array_equal(np.concatenate((t.H_a, t.H_H)), t.H)


def test_actuation_rows(robot):
    B = actuation_matrix(robot)
    np.testing.assert_array_equal(B[:11], np.eye(11))
    np.testing.assert_array_equal(B[11:], 0.0)


def test_bias_at_rest_is_gravity(robot, states):
    for s in states[:5]:
        rest = s.with_rates(np.zeros(17))
        np.testing.assert_allclose(bias_vector(robot, rest), gravity_forces(robot, rest),
                                   rtol=1e-13, atol=1e-13)


def test_gravity_is_potential_gradient(robot, states):
    s = states[0]
    eps = 1e-6
    grad = np.empty(17)
    for k in range(17):
        dq = np.zeros(17)
        dq[k] = eps
        grad[k] = (potential_energy(robot, State.from_vectors(s.q + dq, s.qd))
                   - potential_energy(robot, State.from_vectors(s.q - dq, s.qd))) / (2 * eps)
    np.testing.assert_allclose(gravity_forces(robot, s), grad, rtol=1e-7, atol=1e-8)


def test_recursive_bias_matches_finite_difference_form(robot, states):
    for s in states[:5]:
        rec = bias_vector(robot, s)
        fd = bias_vector(robot, s, method="finite_difference")
        assert np.abs(rec - fd).max() <= 1e-5 * np.abs(rec).max()
    with pytest.raises(ValueError):
        bias_vector(robot, states[0], method="symbolic")


def test_skew_identity(robot, states):
    """qd^T (Ddot - 2C) qd = 0 with C qd = H - G."""
    for s in states[:10]:
        eps = 1e-7
        Ddot = (mass_matrix(robot, State.from_vectors(s.q + eps * s.qd, s.qd))
                - mass_matrix(robot, State.from_vectors(s.q - eps * s.qd, s.qd))) / (2 * eps)
        Cqd = bias_vector(robot, s) - gravity_forces(robot, s)
        scale = abs(s.qd @ Ddot @ s.qd)
        assert abs(s.qd @ Ddot @ s.qd - 2 * s.qd @ Cqd) <= 1e-6 * max(scale, 1.0)


def test_residual(robot, states, rng):
    for s in states:
        u = rng.normal(0, 5, 11)
        qdd = forward_dynamics(robot, s, u)
        D, H = mass_matrix(robot, s), bias_vector(robot, s)
        assert np.linalg.norm(D @ qdd + H - actuation_matrix(robot) @ u) < 1e-9 * np.linalg.norm(H)


def test_free_fall_momentum_rates(robot, states, rng):
    """No contact: CoM accelerates at g and sigma_cm is constant, whatever the torques."""
    for s in states[:10]:
        u = rng.normal(0, 5, 11)
        qdd = forward_dynamics(robot, s, u)
        a_cm = rate_of(lambda st: _v_cm(robot, st), s, qdd)
        np.testing.assert_allclose(a_cm, gravity_vector(), atol=1e-6)
        dsigma = rate_of(lambda st: angular_momentum_com(robot, st), s, qdd)
        assert np.linalg.norm(dsigma) < 1e-6 * max(1.0, np.linalg.norm(angular_momentum_com(robot, s)))


def _v_cm(robot, s):
    return com_velocities(robot, s)[1]


def test_contact_force_momentum_oracle(robot, ground, states):
    """A large force at one contact vertex plus a joint torque step: the total
    momenta change by the external force and its moment about the CoM."""
    s = State(states[3].q_b, np.array([0.0, 0.0, 0.05]), states[3].q_H, states[3].qd)
    cps = detect_contacts(robot, s, ground)
    assert cps
    cp = cps[0]
    F = np.array([15.0, -40.0, 500.0])
    u = np.zeros(11)
    u[4] = 20.0
    qdd = forward_dynamics(robot, s, u, [(cp, F)])
    m = robot.total_mass
    p_cm = forward_kinematics(robot, s).p_cm
    dP = rate_of(lambda st: m * _v_cm(robot, st), s, qdd)
    np.testing.assert_allclose(dP, m * gravity_vector() + F, rtol=1e-6, atol=1e-5)
    dsigma = rate_of(lambda st: angular_momentum_com(robot, st), s, qdd)
    np.testing.assert_allclose(dsigma, np.cross(cp.world_pos - p_cm, F), rtol=1e-5, atol=1e-4)


def test_power_balance(robot, ground, states, rng):
    """dK/dt = qd^T (B u + J^T F - G) at an instant."""
    for s in states[:5]:
        s = State(s.q_b, np.array([0.0, 0.0, 0.05]), s.q_H, s.qd)
        u = rng.normal(0, 5, 11)
        contacts = [(cp, world_force(ground_force(cp, ground), ground))
                    for cp in detect_contacts(robot, s, ground)]
        qdd = forward_dynamics(robot, s, u, contacts)
        dK = rate_of(lambda st: kinetic_energy(robot, st), s, qdd)
        power = s.qd @ (actuation_matrix(robot) @ u - gravity_forces(robot, s))
        for cp, f in contacts:
            power += (point_jacobian(robot, s, cp.module_index, cp.world_pos) @ s.qd) @ f
        assert dK == pytest.approx(power, rel=1e-6, abs=1e-6)


def test_system_matches_python_assembly(robot, ground, states):
    g = replace(ground, k2=2.0)
    sys = TumblerSystem(robot, g)
    for s in states[:5]:
        s = State(s.q_b, np.array([0.0, 0.0, 0.08]), s.q_H, s.qd)
        contacts = [(cp, world_force(ground_force(cp, g), g)) for cp in detect_contacts(robot, s, g)]
        u = posture_controller(robot, s)
        qdd = forward_dynamics(robot, s, u, contacts)
        y = np.concatenate((s.q, s.qd))
        dy = sys(0.0, y)
        np.testing.assert_array_equal(dy[:17], s.qd)
        np.testing.assert_allclose(dy[17:], qdd, rtol=1e-8, atol=1e-8)
        np.testing.assert_allclose(sys.outputs(y)[0], u, atol=0)


def test_system_without_ground(robot, states):
    s = states[0]
    dy = TumblerSystem(with_gains(robot, kp=0, kd=0), None)(0.0, np.concatenate((s.q, s.qd)))
    np.testing.assert_allclose(dy[17:], forward_dynamics(robot, s, np.zeros(11)), rtol=1e-8,
                               atol=1e-8)


def test_controller_examples(robot):
    at_target = State.at_rest(robot)
    np.testing.assert_array_equal(posture_controller(robot, at_target), 0.0)
    mdl = with_gains(robot, kp=50.0, kd=0.0, torque_limit=10.0)
    q_b = mdl.target - 0.1
    np.testing.assert_allclose(posture_controller(mdl, State.at_rest(mdl, q_b=q_b)), 5.0)
    q_b = mdl.target - 0.5
    np.testing.assert_array_equal(posture_controller(mdl, State.at_rest(mdl, q_b=q_b)), 10.0)
    np.testing.assert_array_equal(posture_controller(mdl, State.at_rest(mdl, q_b=mdl.target + 1)),
                                  -10.0)


@given(err=st.lists(st.floats(-1.0, 1.0), min_size=11, max_size=11))
def test_controller_storage_is_potential_of_spring_torque(robot, err):
    mdl = with_gains(robot, kp=200.0, kd=0.0, torque_limit=30.0)
    s = State.at_rest(mdl, q_b=mdl.target + np.array(err))
    eps = 1e-7
    grad = np.empty(11)
    for j in range(11):
        dq = np.zeros(11)
        dq[j] = eps
        grad[j] = (controller_energy(mdl, State.at_rest(mdl, q_b=s.q_b + dq))
                   - controller_energy(mdl, State.at_rest(mdl, q_b=s.q_b - dq))) / (2 * eps)
    np.testing.assert_allclose(-grad, posture_controller(mdl, s), atol=1e-5)
    assert controller_energy(mdl, s) >= 0.0


def test_controller_energy_zero_gain(robot):
    mdl = with_gains(robot, kp=0.0, kd=0.0)
    assert controller_energy(mdl, State.at_rest(mdl, q_b=np.zeros(11))) == 0.0


def test_ill_conditioned_rejected():
    with pytest.raises(IllConditionedError):
        solve_spd(np.diag([1.0, 1e-14]), np.ones(2))
    with pytest.raises(IllConditionedError):
        solve_spd(np.array([[1.0, 2.0], [2.0, 1.0]]), np.ones(2))
    np.testing.assert_allclose(solve_spd(np.diag([2.0, 4.0]), np.ones(2)), [0.5, 0.25])
