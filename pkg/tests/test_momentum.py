from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tumblesim.dynamics import mass_matrix
from tumblesim.kinematics import State, euler_rate_matrix, forward_kinematics
from tumblesim.momentum import (angular_momentum_about, angular_momentum_com, composite_mass_matrix,
                                default_pivot, kinetic_energy, kinetic_energy_direct,
                                momentum_from_energy, relative_offsets, report)
from tumblesim.validation import random_state


def rigid_rates(robot, state, w, point, v_point=np.zeros(3)):
    """Rates moving the frozen chain rigidly with angular velocity ``w``
    and velocity ``v_point`` at the world point ``point``."""
    m = robot.actuated_count
    qd = np.zeros(robot.n_dof)
    qd[m + 3:] = np.linalg.solve(euler_rate_matrix(state.q_H), w)
    qd[m:m + 3] = v_point + np.cross(w, state.p_H - point)
    return state.with_rates(qd)


def test_about_com_is_bitwise_com(robot, states):
    for s in states:
        p_cm = forward_kinematics(robot, s).p_cm
        np.testing.assert_array_equal(angular_momentum_about(robot, s, p_cm),
                                      angular_momentum_com(robot, s))


def test_zero_rates_and_pure_translation(robot, states):
    s = states[0]
    np.testing.assert_array_equal(angular_momentum_com(robot, s.with_rates(np.zeros(17))), 0.0)
    assert kinetic_energy(robot, s.with_rates(np.zeros(17))) == 0.0
    qd = np.zeros(17)
    qd[11:14] = [0.3, -1.0, 2.0]
    moving = s.with_rates(qd)
    assert np.abs(angular_momentum_com(robot, moving)).max() < 1e-14
    assert kinetic_energy(robot, moving) == pytest.approx(0.5 * 6.5 * (qd[11:14] @ qd[11:14]),
                                                          rel=1e-12)


def test_shift_identity(robot, rng):
    for _ in range(100):
        s = random_state(robot, rng)
        kin = forward_kinematics(robot, s)
        p_a = rng.normal(size=3)
        eps = 1e-7
        p_cm_p = forward_kinematics(robot, State.from_vectors(s.q + eps * s.qd, s.qd)).p_cm
        p_cm_m = forward_kinematics(robot, State.from_vectors(s.q - eps * s.qd, s.qd)).p_cm
        v_cm = (p_cm_p - p_cm_m) / (2 * eps)
        lhs = angular_momentum_about(robot, s, p_a)
        rhs = angular_momentum_com(robot, s) + robot.total_mass * np.cross(kin.p_cm - p_a, v_cm)
        assert np.linalg.norm(lhs - rhs) <= 1e-6 * np.linalg.norm(lhs)


def test_rigid_rotation_about_com(robot, states):
    w = np.array([0.4, -1.1, 0.7])
    for s in states[:5]:
        kin = forward_kinematics(robot, s)
        spun = rigid_rates(robot, s, w, kin.p_cm)
        expected = np.zeros(3)
        for m_i, p_i, R_i, I_i in zip(robot.masses, kin.p, kin.R, robot.inertias):
            r = p_i - kin.p_cm
            expected += m_i * np.cross(r, np.cross(w, r)) + R_i @ np.diag(I_i) @ R_i.T @ w
        np.testing.assert_allclose(angular_momentum_com(robot, spun), expected, rtol=1e-12,
                                   atol=1e-14)


def test_offsets_sum_to_zero(robot, states):
    scale = robot.total_mass * robot.chain_length
    for s in states:
        ups, ups_dot = relative_offsets(robot, s)
        assert np.linalg.norm(robot.masses @ ups) < 1e-12 * scale
        assert np.linalg.norm(robot.masses @ ups_dot) < 1e-12 * scale


def test_offsets_translation_invariant(robot, states):
    s = states[0]
    moved = State(s.q_b, s.p_H + [4.0, -2.0, 1.0], s.q_H, s.qd)
    np.testing.assert_allclose(relative_offsets(robot, moved)[0], relative_offsets(robot, s)[0],
                               atol=1e-14)


def test_offset_rates_match_finite_difference(robot, states):
    eps = 1e-7
    for s in states[:5]:
        up = relative_offsets(robot, State.from_vectors(s.q + eps * s.qd, s.qd))[0]
        um = relative_offsets(robot, State.from_vectors(s.q - eps * s.qd, s.qd))[0]
        np.testing.assert_allclose(relative_offsets(robot, s)[1], (up - um) / (2 * eps),
                                   rtol=1e-6, atol=1e-7)


def test_report_bundles_quantities(robot, states):
    s = states[2]
    r = report(robot, s)
    np.testing.assert_array_equal(r.sigma_cm, angular_momentum_com(robot, s))
    np.testing.assert_array_equal(r.sigma_a, r.sigma_cm)
    assert r.K == kinetic_energy(robot, s)
    assert r.upsilon.shape == r.upsilon_dot.shape == (13, 3)


def test_symmetric_chain_middle_offset_zero(robot):
    same = replace(robot, modules=tuple(replace(robot.modules[1], role=m.role)
                                        for m in robot.modules))
    ups, _ = relative_offsets(same, State.at_rest(same, q_b=np.zeros(11)))
    assert np.linalg.norm(ups[6]) < 1e-14


def test_energy_forms_agree(robot, states):
    for s in states:
        k = kinetic_energy_direct(robot, s)
        assert kinetic_energy(robot, s) == pytest.approx(k, rel=1e-9)
        assert 0.5 * s.qd @ mass_matrix(robot, s) @ s.qd == pytest.approx(k, rel=1e-9)
        np.testing.assert_allclose(composite_mass_matrix(robot, s), mass_matrix(robot, s),
                                   rtol=1e-9, atol=1e-12)


@given(seed=st.integers(0, 2**32 - 1))
def test_energy_positive_definite(robot, seed):
    s = random_state(robot, np.random.default_rng(seed))
    assert kinetic_energy(robot, s) > 0.0


def test_momentum_from_energy_zero_rates(robot, states):
    s = states[0].with_rates(np.zeros(17))
    np.testing.assert_array_equal(momentum_from_energy(robot, s), 0.0)


def test_momentum_from_energy_rigid_rotation_about_pivot(robot, states):
    w = np.array([0.3, 1.5, -0.6])
    for s in states[:10]:
        pivot = default_pivot(robot, s)
        spun = rigid_rates(robot, s, w, pivot)
        sigma = angular_momentum_about(robot, spun, pivot)
        got = momentum_from_energy(robot, spun, pivot)
        assert np.linalg.norm(got - sigma) <= 1e-5 * np.linalg.norm(sigma)


def test_momentum_from_energy_stationary_pivot(robot, states):
    """Joint motion plus a head velocity that keeps the pivot at rest."""
    for s in states[:10]:
        pivot = default_pivot(robot, s)
        m = robot.actuated_count
        w_H = euler_rate_matrix(s.q_H) @ s.qd[m + 3:]
        qd = s.qd.copy()
        qd[m:m + 3] = -np.cross(w_H, pivot - s.p_H)
        pinned = s.with_rates(qd)
        sigma = angular_momentum_about(robot, pinned, pivot)
        got = momentum_from_energy(robot, pinned, pivot)
        assert np.linalg.norm(got - sigma) <= 1e-5 * np.linalg.norm(sigma)


def test_momentum_about_com_differs_from_pivot_momentum(robot, states):
    s = states[0]
    pivot = default_pivot(robot, s)
    spun = rigid_rates(robot, s, np.array([0.0, 2.0, 0.0]), pivot)
    diff = momentum_from_energy(robot, spun, pivot) - angular_momentum_com(robot, spun)
    assert np.linalg.norm(diff) > 0.1
