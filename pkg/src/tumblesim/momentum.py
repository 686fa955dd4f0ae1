"""Angular momentum, CoM-relative offsets and kinetic energy of the chain."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .chain_model import RobotModel
from .kinematics import (State, _jacobians, check_pitch, euler_rate_matrix,
                         forward_kinematics, propagated_velocities, skew)

FD_STEP = 1e-7


@dataclass(frozen=True)
class MomentumEnergyReport:
    sigma_a: np.ndarray
    sigma_cm: np.ndarray
    K: float
    upsilon: np.ndarray
    upsilon_dot: np.ndarray


def _motion(model: RobotModel, state: State):
    kin = forward_kinematics(model, state)
    Jv, Jw, _ = _jacobians(model, state, kin)
    Iw = K.world_inertias(kin.R, model.inertias)
    return kin, Jv @ state.qd, Jw @ state.qd, Iw


def angular_momentum_about(model: RobotModel, state: State, p_a) -> np.ndarray:
    """Total angular momentum about the world point ``p_a``.

    Sum over modules of ``m_i S(p_cm,i - p_a) v_cm,i + J_i omega_i`` with the
    module inertia rotated into the world frame.
    """
    kin, v, w, Iw = _motion(model, state)
    p_a = np.asarray(p_a, dtype=float)
    sigma = np.zeros(3)
    for m_i, p_i, v_i, w_i, I_i in zip(model.masses, kin.p, v, w, Iw):
        sigma += m_i * skew(p_i - p_a) @ v_i + I_i @ w_i
    return sigma


def angular_momentum_com(model: RobotModel, state: State) -> np.ndarray:
    return angular_momentum_about(model, state, forward_kinematics(model, state).p_cm)


def relative_offsets(model: RobotModel, state: State) -> tuple[np.ndarray, np.ndarray]:
    """CoM offsets from the total CoM, Upsilon (N,3), and their rates (N,3)."""
    kin, v, _, _ = _motion(model, state)
    v_cm = model.masses @ v / model.total_mass
    return kin.p - kin.p_cm, v - v_cm


def composite_mass_matrix(model: RobotModel, state: State) -> np.ndarray:
    """Mass matrix split as total-CoM translation plus CoM-relative terms.

    ``D = m_tot Jcm^T Jcm + sum_i (m_i dU_i^T dU_i + beta_i^T J_i beta_i)``
    with ``dU_i = dUpsilon_i/dq = J_i - Jcm``.
    """
    kin = forward_kinematics(model, state)
    Jv, Jw, _ = _jacobians(model, state, kin)
    Iw = K.world_inertias(kin.R, model.inertias)
    m = model.masses
    Jcm = np.einsum("i,ijk->jk", m, Jv) / model.total_mass
    dU = Jv - Jcm
    D = model.total_mass * Jcm.T @ Jcm
    D += np.einsum("i,iaj,iak->jk", m, dU, dU)
    D += np.einsum("iaj,iab,ibk->jk", Jw, Iw, Jw)
    return D


def kinetic_energy(model: RobotModel, state: State) -> float:
    """K = 1/2 m_tot |v_cm|^2 + 1/2 qd^T [CoM-relative inertia] qd."""
    kin = forward_kinematics(model, state)
    Jv, Jw, _ = _jacobians(model, state, kin)
    Iw = K.world_inertias(kin.R, model.inertias)
    qd = state.qd
    m = model.masses
    Jcm = np.einsum("i,ijk->jk", m, Jv) / model.total_mass
    v_cm = Jcm @ qd
    dU = (Jv - Jcm) @ qd
    w = Jw @ qd
    rel = np.einsum("i,ia,ia->", m, dU, dU) + np.einsum("ia,iab,ib->", w, Iw, w)
    return float(0.5 * model.total_mass * v_cm @ v_cm + 0.5 * rel)


def kinetic_energy_direct(model: RobotModel, state: State) -> float:
    """Brute-force sum of module translational and rotational energies."""
    w, v = propagated_velocities(model, state)
    kin = forward_kinematics(model, state)
    Iw = K.world_inertias(kin.R, model.inertias)
    total = 0.0
    for m_i, v_i, w_i, I_i in zip(model.masses, v, w, Iw):
        total += 0.5 * m_i * v_i @ v_i + 0.5 * w_i @ I_i @ w_i
    return float(total)


def default_pivot(model: RobotModel, state: State) -> np.ndarray:
    """Lowest module end point (world z) standing in for the ground contact."""
    ends = forward_kinematics(model, state).ends.reshape(-1, 3)
    return ends[np.argmin(ends[:, 2])]


def momentum_from_energy(model: RobotModel, state: State, pivot=None,
                         eps: float = FD_STEP) -> np.ndarray:
    """Angular momentum about ``pivot`` recovered from dK/d(qdot_H).

    The base is re-parameterized by the pivot, a point fixed in the head
    frame: ``p_H = p_C - R_H l_C``. Kinetic energy is then differentiated
    numerically in the three Euler rates with the pivot velocity held fixed,
    and the conjugate momentum is mapped to a world vector through
    ``E(q_H)^-T``.
    """
    check_pitch(state)
    m = model.actuated_count
    p_H = state.p_H
    p_C = default_pivot(model, state) if pivot is None else np.asarray(pivot, dtype=float)
    E = euler_rate_matrix(state.q_H)
    r_C = p_C - p_H
    qd = state.qd
    v_C = qd[m:m + 3] + np.cross(E @ qd[m + 3:], r_C)

    def energy(euler_rates):
        rates = qd.copy()
        rates[m + 3:] = euler_rates
        # keep the pivot velocity fixed while the Euler rates vary
        rates[m:m + 3] = v_C - np.cross(E @ euler_rates, r_C)
        return kinetic_energy(model, state.with_rates(rates))

    grad = np.zeros(3)
    base = qd[m + 3:]
    for c in range(3):
        step = np.zeros(3)
        step[c] = eps
        grad[c] = (energy(base + step) - energy(base - step)) / (2 * eps)
    return np.linalg.solve(E.T, grad)


def report(model: RobotModel, state: State, p_a=None) -> MomentumEnergyReport:
    kin = forward_kinematics(model, state)
    p_a = kin.p_cm if p_a is None else p_a
    ups, ups_dot = relative_offsets(model, state)
    return MomentumEnergyReport(
        sigma_a=angular_momentum_about(model, state, p_a),
        sigma_cm=angular_momentum_com(model, state),
        K=kinetic_energy(model, state),
        upsilon=ups,
        upsilon_dot=ups_dot,
    )
