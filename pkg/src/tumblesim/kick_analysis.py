"""Lateral "kick" needed to tilt the rotation plane of a spinning loop.

The posed loop is frozen into a composite rigid body. Its spin axis ``n(t)``
is tipped by a logistic angle ``theta(t)`` about a world-fixed axis lying in
the loop plane and perpendicular to gravity. The moment needed is the rate of
change of the angular momentum; the spin-only moment (``theta = 0``) is
subtracted and the remainder is expressed as a force at a lever arm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit

from . import _kernels as K
from .chain_model import KickProfile, RobotModel
from .kinematics import State, forward_kinematics
from .momentum import angular_momentum_about

MIN_RISE_POINTS = 100
# the logistic goes from 10 % to 90 % of its range in ln(81)/k
RISE_WIDTH = math.log(81.0)

# upright loop: module y (joint axis) -> world y, loop plane = world x-z
REFERENCE_Q_H = (0.0, 0.0, math.pi / 2)
SPIN_AXIS = np.array([0.0, 1.0, 0.0])
TILT_AXIS = np.array([1.0, 0.0, 0.0])


def sigmoid_tilt(profile: KickProfile, t):
    """Tilt angle ``theta_max / (1 + exp(-k (t - t_i)))``."""
    return profile.tilt_magnitude * expit(profile.growth_rate * (np.asarray(t) - profile.inflection_time))


def sigmoid_tilt_rate(profile: KickProfile, t):
    s = expit(profile.growth_rate * (np.asarray(t) - profile.inflection_time))
    return profile.tilt_magnitude * profile.growth_rate * s * (1.0 - s)


def reference_state(model: RobotModel) -> State:
    return State.at_rest(model, q_H=REFERENCE_Q_H)


def composite_inertia(model: RobotModel, state: State | None = None) -> np.ndarray:
    """World-frame inertia of the frozen chain about its centre of mass.

    Sum over modules of the rotated module inertia plus the parallel-axis term
    ``m_i (|r_i|^2 I - r_i r_i^T)``.
    """
    state = reference_state(model) if state is None else state
    kin = forward_kinematics(model, state)
    J = np.zeros((3, 3))
    for m_i, p_i, R_i, I_i in zip(model.masses, kin.p, kin.R, model.inertias):
        r = p_i - kin.p_cm
        J += R_i @ np.diag(I_i) @ R_i.T + m_i * ((r @ r) * np.eye(3) - np.outer(r, r))
    return J


def composite_inertia_from_momentum(model: RobotModel, state: State | None = None) -> np.ndarray:
    """Same inertia recovered column by column from the chain's angular momentum.

    The frozen chain is spun about each world axis in turn (rigid motion of
    the base about the CoM, joint rates zero) and ``sigma_cm`` is recorded.
    """
    state = reference_state(model) if state is None else state
    kin = forward_kinematics(model, state)
    m = model.actuated_count
    E = K.euler_rate_matrix(*state.q_H)
    J = np.empty((3, 3))
    for c in range(3):
        w = np.eye(3)[c]
        qd = np.zeros(model.n_dof)
        qd[m + 3:] = np.linalg.solve(E, w)
        qd[m:m + 3] = np.cross(w, state.p_H - kin.p_cm)
        J[:, c] = angular_momentum_about(model, state.with_rates(qd), kin.p_cm)
    return J


def loop_vertices(model: RobotModel, state: State | None = None) -> np.ndarray:
    """Polygon vertices of the loop: the proximal end of every rigid side."""
    state = reference_state(model) if state is None else state
    ends = forward_kinematics(model, state).ends
    starts = [0] + [k + 1 for k, j in enumerate(model.junction_joint) if j >= 0]
    return ends[starts, 0]


def circumradius(model: RobotModel, state: State | None = None) -> float:
    """Radius of the least-squares circle through the loop vertices."""
    v = loop_vertices(model, state)
    # the loop lies in a plane; fit in its two principal in-plane directions
    centred = v - v.mean(axis=0)
    _, _, Vt = np.linalg.svd(centred)
    xy = centred @ Vt[:2].T
    A = np.column_stack((2 * xy, np.ones(len(xy))))
    b = (xy ** 2).sum(axis=1)
    cx, cy, c = np.linalg.lstsq(A, b, rcond=None)[0]
    return float(math.sqrt(c + cx * cx + cy * cy))


def check_grid(profile: KickProfile, t) -> None:
    """Reject grids that do not cover the duration or resolve the sigmoid rise."""
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or len(t) < 3 or np.any(np.diff(t) <= 0):
        raise ValueError("time grid must be a strictly increasing 1-D array")
    if t[0] > 0.0 or t[-1] < profile.duration - 1e-12:
        raise ValueError("time grid must span [0, duration]")
    half = RISE_WIDTH / (2 * profile.growth_rate)
    inside = np.count_nonzero(np.abs(t - profile.inflection_time) <= half)
    if inside < MIN_RISE_POINTS:
        raise ValueError(f"time grid too coarse: {inside} points across the 10-90 % rise, "
                         f"need at least {MIN_RISE_POINTS}")


def time_grid(profile: KickProfile, time_step: float = 1e-3) -> np.ndarray:
    n = int(round(profile.duration / time_step))
    return np.linspace(0.0, profile.duration, n + 1)


def _rotation_series(axis, angles) -> np.ndarray:
    return np.array([K.axis_angle(axis, a) for a in np.asarray(angles, dtype=float)])


def angular_momentum_series(J0, profile: KickProfile, t, spin_rate: float | None = None,
                            tilt: bool = True, parts: bool = False):
    """``sigma(t) = J(t) (spin n(t) + theta_dot(t) a)`` for the frozen loop.

    The body attitude is ``R(a, theta) R(n0, spin t)`` relative to the
    reference pose, so ``J(t) = R J0 R^T``. With ``parts`` the spin and tilt
    contributions are returned separately.
    """
    t = np.asarray(t, dtype=float)
    spin = profile.spin_rate if spin_rate is None else spin_rate
    theta = sigmoid_tilt(profile, t) if tilt else np.zeros_like(t)
    theta_dot = sigmoid_tilt_rate(profile, t) if tilt else np.zeros_like(t)
    R_tilt = _rotation_series(TILT_AXIS, theta)
    R = R_tilt @ _rotation_series(SPIN_AXIS, spin * t)
    J = R @ J0 @ R.transpose(0, 2, 1)
    n = R_tilt @ SPIN_AXIS
    sigma_spin = spin * np.einsum("tij,tj->ti", J, n)
    sigma_tilt = theta_dot[:, None] * (J @ TILT_AXIS)
    if parts:
        return sigma_spin, sigma_tilt
    return sigma_spin + sigma_tilt


@dataclass(frozen=True)
class KickResult:
    t: np.ndarray
    moment: np.ndarray          # (T, 3) M - M_spin_only, N m
    force: np.ndarray           # (T,) N
    gyroscopic: np.ndarray      # (T,) N, from turning the spin angular momentum
    lever_arm: float

    @property
    def peak(self) -> float:
        return float(self.force.max())

    @property
    def peak_time(self) -> float:
        return float(self.t[np.argmax(self.force)])


def kick_force(model: RobotModel, profile: KickProfile, t=None, time_step: float = 1e-3
               ) -> KickResult:
    """Force series needed to follow the tilt profile, and its peak."""
    t = time_grid(profile, time_step) if t is None else np.asarray(t, dtype=float)
    check_grid(profile, t)
    J0 = composite_inertia(model)
    lever = profile.lever_arm if profile.lever_arm is not None else circumradius(model)

    def rate(sigma):
        return np.gradient(sigma, t, axis=0)

    spin_part, tilt_part = angular_momentum_series(J0, profile, t, parts=True)
    spin_only = rate(angular_momentum_series(J0, profile, t, tilt=False))
    gyro = rate(spin_part) - spin_only
    M = gyro + rate(tilt_part)
    return KickResult(
        t=t,
        moment=M,
        force=np.linalg.norm(M, axis=1) / lever,
        gyroscopic=np.linalg.norm(gyro, axis=1) / lever,
        lever_arm=lever,
    )


def kick_curves(model: RobotModel, profile: KickProfile, k_values, time_step: float = 1e-3
                ) -> tuple[np.ndarray, dict[float, KickResult]]:
    """One force curve per growth rate on a shared time grid."""
    if len(k_values) == 0:
        raise ValueError("k_values is empty")
    t = time_grid(profile, time_step)
    out = {}
    for k in k_values:
        out[float(k)] = kick_force(model, replace(profile, growth_rate=float(k)), t)
    return t, out
