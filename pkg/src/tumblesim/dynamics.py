"""Equations of motion ``D(q) qdd + H(q, qd) = B u + sum_c J_c^T F_c``.

The first ``m`` coordinates are the actuated joints, the last six the
unactuated head position and orientation, so ``D`` partitions as
``[[D_a, D_aH], [D_Ha, D_H]]`` in storage order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .chain_model import GroundModel, RobotModel
from .contact import ContactPoint, GroundFrame, ground_params
from .kinematics import State, _jacobians, check_pitch, check_state, forward_kinematics

GRAVITY = 9.81
MAX_CONDITION = 1e12


class IllConditionedError(np.linalg.LinAlgError):
    """The mass matrix cannot be factored reliably."""


def gravity_vector(g: float = GRAVITY) -> np.ndarray:
    return np.array([0.0, 0.0, -g])


@dataclass(frozen=True)
class DynamicsTerms:
    D: np.ndarray
    H: np.ndarray
    B: np.ndarray
    contact_jacobians: tuple[np.ndarray, ...]
    m: int

    @property
    def D_a(self):
        return self.D[:self.m, :self.m]

    @property
    def D_aH(self):
        return self.D[:self.m, self.m:]

    @property
    def D_Ha(self):
        return self.D[self.m:, :self.m]

    @property
    def D_H(self):
        return self.D[self.m:, self.m:]

    @property
    def H_a(self):
        return self.H[:self.m]

    @property
    def H_H(self):
        return self.H[self.m:]


def mass_matrix(model: RobotModel, state: State) -> np.ndarray:
    kin = forward_kinematics(model, state)
    Jv, Jw, _ = _jacobians(model, state, kin)
    Iw = K.world_inertias(kin.R, model.inertias)
    return K.mass_matrix(model.masses, Iw, Jv, Jw)


def potential_energy(model: RobotModel, state: State, g: float = GRAVITY) -> float:
    p = forward_kinematics(model, state).p
    return float(g * model.masses @ p[:, 2])


def gravity_forces(model: RobotModel, state: State, g: float = GRAVITY) -> np.ndarray:
    """G = dV/dq for V = sum_i m_i g z_cm,i."""
    kin = forward_kinematics(model, state)
    Jv, _, _ = _jacobians(model, state, kin)
    return -np.einsum("i,iak,a->k", model.masses, Jv, gravity_vector(g))


def bias_vector(model: RobotModel, state: State, g: float = GRAVITY,
                method: str = "recursive", eps: float = 1e-7) -> np.ndarray:
    """Velocity-product and gravity terms H(q, qd).

    ``method="recursive"`` projects the chain's velocity-product accelerations
    through the Jacobians (exact). ``method="finite_difference"`` evaluates
    ``Ddot qd - 1/2 d(qd^T D qd)/dq + G`` with central differences of the mass
    matrix.
    """
    check_state(model, state)
    check_pitch(state)
    if method == "recursive":
        kin = forward_kinematics(model, state)
        Jv, Jw, _ = _jacobians(model, state, kin)
        Iw = K.world_inertias(kin.R, model.inertias)
        w, _, alpha, a, _ = K.velocity_recursion(state.q, state.qd, kin.R, kin.d, kin.p,
                                              model.junction_joint, model.axes)
        return K.bias_forces(model.masses, Iw, Jv, Jw, w, alpha, a, gravity_vector(g))
    if method != "finite_difference":
        raise ValueError(f"unknown method {method!r}")
    q, qd = state.q, state.qd
    n = q.size

    def D_at(qq):
        return mass_matrix(model, State.from_vectors(qq, qd))

    Ddot_qd = (D_at(q + eps * qd) - D_at(q - eps * qd)) @ qd / (2 * eps)
    grad = np.empty(n)
    for k in range(n):
        dq = np.zeros(n)
        dq[k] = eps
        grad[k] = qd @ (D_at(q + dq) - D_at(q - dq)) @ qd / (2 * eps)
    return Ddot_qd - 0.5 * grad + gravity_forces(model, state, g)


def actuation_matrix(model: RobotModel) -> np.ndarray:
    """B (n x m): joint torques enter only the joint rows."""
    B = np.zeros((model.n_dof, model.actuated_count))
    B[:model.actuated_count] = np.eye(model.actuated_count)
    return B


def posture_controller(model: RobotModel, state: State, t: float = 0.0) -> np.ndarray:
    """Saturated PD torques holding the joints at the posture target."""
    g = model.controller_gains
    return K.posture_torque(state.q_b, state.qd[:model.actuated_count], model.target,
                            g.kp, g.kd, g.torque_limit)


def controller_energy(model: RobotModel, state: State) -> float:
    """Storage of the saturated PD springs, the integral of ``sat(kp e)`` over ``e``.

    Quadratic while ``kp |e|`` is below the torque limit and linear beyond,
    so robot energy plus this term never increases under the controller.
    """
    g = model.controller_gains
    e = np.abs(model.target - state.q_b)
    if g.kp == 0.0:
        return 0.0
    knee = g.torque_limit / g.kp
    stored = np.where(e <= knee, 0.5 * g.kp * e * e, g.torque_limit * (e - 0.5 * knee))
    return float(stored.sum())


def contact_jacobian(model: RobotModel, state: State, cp: ContactPoint) -> np.ndarray:
    kin = forward_kinematics(model, state)
    return K.point_jacobian(state.q, cp.module_index, cp.world_pos, kin.R, kin.d,
                            model.junction_joint, model.axes)


def dynamics_terms(model: RobotModel, state: State, contacts=(), g: float = GRAVITY
                   ) -> DynamicsTerms:
    return DynamicsTerms(
        D=mass_matrix(model, state),
        H=bias_vector(model, state, g),
        B=actuation_matrix(model),
        contact_jacobians=tuple(contact_jacobian(model, state, cp) for cp in contacts),
        m=model.actuated_count,
    )


def solve_spd(D: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        x, diag = K.cholesky_solve(np.ascontiguousarray(D), np.ascontiguousarray(rhs))
    except np.linalg.LinAlgError as exc:
        raise IllConditionedError("mass matrix is not positive definite") from exc
    # (max/min Cholesky pivot)^2 is a lower bound on cond(D)
    if (diag.max() / diag.min()) ** 2 > MAX_CONDITION:
        raise IllConditionedError("mass matrix condition number exceeds 1e12")
    return x


def forward_dynamics(model: RobotModel, state: State, u, contacts=(),
                     g: float = GRAVITY) -> np.ndarray:
    """Generalized accelerations.

    ``contacts`` is a sequence of ``(ContactPoint, world_force)`` pairs.
    """
    terms = dynamics_terms(model, state, [cp for cp, _ in contacts], g)
    rhs = terms.B @ np.asarray(u, dtype=float) - terms.H
    for J, (_, f) in zip(terms.contact_jacobians, contacts):
        rhs += J.T @ np.asarray(f, dtype=float)
    return solve_spd(terms.D, rhs)


class TumblerSystem:
    """First-order system ``dy/dt = f(y)`` for ``y = [q, qd]``, ready for an integrator."""

    def __init__(self, model: RobotModel, ground: GroundModel | None, g: float = GRAVITY):
        self.model = model
        self.ground = ground
        self.g = g
        self.frame = GroundFrame.from_ground(ground or GroundModel())
        self._frame = self.frame.packed()
        self._gparams = ground_params(ground or GroundModel())
        gains = model.controller_gains
        self._gains = np.array([gains.kp, gains.kd, gains.torque_limit])
        self._gravity = gravity_vector(g)
        self.nfev = 0

    @property
    def n(self) -> int:
        return self.model.n_dof

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        self.nfev += 1
        mdl = self.model
        return K.state_derivative(y, mdl.masses, mdl.lengths, mdl.diameters, mdl.com_offsets,
                                  mdl.inertias, mdl.junction_joint, mdl.axes, mdl.target,
                                  self._gains, self._gravity, self._frame, self._gparams,
                                  self.ground is not None)

    def outputs(self, y: np.ndarray):
        """Joint torques (m,) and per-candidate ground-frame contact forces (2N,3)."""
        mdl = self.model
        n = self.n
        q, qd = y[:n], y[n:]
        u = K.posture_torque(q, qd, mdl.target, *self._gains)
        if self.ground is None:
            return u, np.zeros((2 * mdl.n_modules, 3))
        forces = K.contact_outputs(y, mdl.lengths, mdl.com_offsets, mdl.junction_joint,
                                   mdl.axes, mdl.diameters, self._frame, self._gparams)
        return u, forces
