"""Forward kinematics of the module chain.

Module ``i`` has rotation ``R_i`` (module frame to world) and frame origin
``d_i`` at its proximal end; its CoM is ``R_i @ com_i + d_i``. The head
orientation is ``R_z(q_z) R_y(q_y) R_x(q_x)`` and angular velocities are world
frame, ``hat(w) = Rdot @ R.T``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .chain_model import RobotModel

SINGULARITY_COS = 1e-9
PITCH_LIMIT = math.pi / 2 - 1e-6


class SingularityError(ArithmeticError):
    """The head pitch reached the Z-Y-X Euler singularity."""


@dataclass(frozen=True)
class State:
    """Generalized coordinates ``q = [q_b, p_H, q_H]`` and their rates ``qd``."""

    q_b: np.ndarray
    p_H: np.ndarray
    q_H: np.ndarray
    qd: np.ndarray

    def __post_init__(self):
        for name in ("q_b", "p_H", "q_H", "qd"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.p_H.shape != (3,) or self.q_H.shape != (3,):
            raise ValueError("p_H and q_H must be 3-vectors")
        if self.qd.shape != (self.q_b.size + 6,):
            raise ValueError(f"qd must have {self.q_b.size + 6} entries, got {self.qd.size}")

    @property
    def q(self) -> np.ndarray:
        return np.concatenate((self.q_b, self.p_H, self.q_H))

    @property
    def vector(self) -> np.ndarray:
        """Integrator state ``[q, qd]``."""
        return np.concatenate((self.q, self.qd))

    @classmethod
    def from_vectors(cls, q, qd) -> State:
        q = np.asarray(q, dtype=float)
        m = q.size - 6
        return cls(q[:m], q[m:m + 3], q[m + 3:], np.asarray(qd, dtype=float))

    @classmethod
    def from_vector(cls, y) -> State:
        y = np.asarray(y, dtype=float)
        n = y.size // 2
        return cls.from_vectors(y[:n], y[n:])

    @classmethod
    def at_rest(cls, model: RobotModel, q_b=None, p_H=(0.0, 0.0, 0.0),
                q_H=(0.0, 0.0, 0.0)) -> State:
        q_b = model.target if q_b is None else q_b
        return cls(q_b, p_H, q_H, np.zeros(model.n_dof))

    def with_rates(self, qd) -> State:
        return State(self.q_b, self.p_H, self.q_H, qd)


@dataclass(frozen=True)
class KinematicsResult:
    R: np.ndarray       # (N, 3, 3) module rotations
    d: np.ndarray       # (N, 3) module frame origins
    p: np.ndarray       # (N, 3) module CoMs
    p_cm: np.ndarray    # (3,) total CoM
    ends: np.ndarray    # (N, 2, 3) proximal and distal axis end points

    @property
    def tips(self) -> tuple[np.ndarray, np.ndarray]:
        """Free end of the head and free end of the tail."""
        return self.ends[0, 0], self.ends[-1, 1]


def check_state(model: RobotModel, state: State) -> None:
    if state.q_b.size != model.actuated_count:
        raise ValueError(f"state has {state.q_b.size} joint angles, model has "
                         f"{model.actuated_count} joints")


def check_pitch(state: State) -> None:
    if abs(math.cos(state.q_H[1])) < SINGULARITY_COS:
        raise SingularityError(f"head pitch q_y = {state.q_H[1]:.6g} is at the Euler singularity")


def skew(v) -> np.ndarray:
    """Matrix S(v) with S(v) @ u = v x u."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def unskew(S) -> np.ndarray:
    return 0.5 * np.array([S[2, 1] - S[1, 2], S[0, 2] - S[2, 0], S[1, 0] - S[0, 1]])


def head_rotation(q_H) -> np.ndarray:
    """R_H^0 = R_z(q_z) R_y(q_y) R_x(q_x)."""
    qx, qy, qz = (float(v) for v in q_H)
    return K.euler_zyx(qx, qy, qz)


def euler_rate_matrix(q_H) -> np.ndarray:
    """E(q_H) mapping Euler rates (qdot_x, qdot_y, qdot_z) to world angular velocity."""
    qx, qy, qz = (float(v) for v in q_H)
    return K.euler_rate_matrix(qx, qy, qz)


def forward_kinematics(model: RobotModel, state: State) -> KinematicsResult:
    check_state(model, state)
    R, d, p = K.chain_pose(state.q, model.lengths, model.com_offsets,
                           model.junction_joint, model.axes)
    p_cm = model.masses @ p / model.total_mass
    distal = d + R[:, :, 0] * model.lengths[:, None]
    return KinematicsResult(R, d, p, p_cm, np.stack((d, distal), axis=1))


def module_jacobians(model: RobotModel, state: State, kin: KinematicsResult | None = None):
    """Angular-velocity Jacobians ``beta`` (N,3,n) and the head's ``beta_H`` (3,n)."""
    return _jacobians(model, state, kin)[1:]


def com_jacobians(model: RobotModel, state: State, kin: KinematicsResult | None = None):
    """Module CoM Jacobians (N,3,n) with ``v_cm,i = J_i @ qd``."""
    return _jacobians(model, state, kin)[0]


def _jacobians(model, state, kin=None):
    check_state(model, state)
    check_pitch(state)
    kin = kin or forward_kinematics(model, state)
    q = state.q
    Jv, Jw = K.chain_jacobians(q, kin.R, kin.d, kin.p, model.junction_joint, model.axes)
    m = model.actuated_count
    beta_H = np.zeros((3, model.n_dof))
    beta_H[:, m + 3:] = euler_rate_matrix(state.q_H)
    return Jv, Jw, beta_H


def point_jacobian(model: RobotModel, state: State, module: int, x,
                   kin: KinematicsResult | None = None) -> np.ndarray:
    """Jacobian (3,n) of the point currently at world position ``x``, fixed to ``module``."""
    kin = kin or forward_kinematics(model, state)
    return K.point_jacobian(state.q, int(module), np.asarray(x, dtype=float), kin.R, kin.d,
                            model.junction_joint, model.axes)


def angular_velocities(model: RobotModel, state: State) -> np.ndarray:
    """World angular velocity of every module, (N,3)."""
    _, Jw, _ = _jacobians(model, state)
    return Jw @ state.qd


def com_velocities(model: RobotModel, state: State) -> tuple[np.ndarray, np.ndarray]:
    """Per-module CoM velocities (N,3) and the total CoM velocity."""
    Jv = com_jacobians(model, state)
    v = Jv @ state.qd
    return v, model.masses @ v / model.total_mass


def propagated_velocities(model: RobotModel, state: State) -> tuple[np.ndarray, np.ndarray]:
    """Module angular and CoM velocities by outward recursion, without Jacobians."""
    check_state(model, state)
    kin = forward_kinematics(model, state)
    w, v, _, _, _ = K.velocity_recursion(state.q, state.qd, kin.R, kin.d, kin.p,
                                      model.junction_joint, model.axes)
    return w, v
