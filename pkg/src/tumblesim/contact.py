"""Compliant ground contact on an inclined plane.

The plane passes through the world origin and descends along +x. Contact
candidates are the lowest points of the two end spheres of every capsule
module. Normal force is a spring-damper on penetration (no adhesion); the
tangential force follows a Stribeck law applied separately along the two
in-plane axes, with the sign function replaced by a linear ramp of
half-width ``slip_velocity``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .chain_model import GroundModel, RobotModel
from .kinematics import State, check_state, forward_kinematics, point_jacobian


@dataclass(frozen=True)
class GroundFrame:
    origin: np.ndarray
    tangent_x: np.ndarray   # downhill
    tangent_y: np.ndarray
    normal: np.ndarray

    @classmethod
    def from_ground(cls, ground: GroundModel) -> GroundFrame:
        a = ground.slope_angle
        return cls(
            origin=np.zeros(3),
            tangent_x=np.array([math.cos(a), 0.0, -math.sin(a)]),
            tangent_y=np.array([0.0, 1.0, 0.0]),
            normal=np.array([math.sin(a), 0.0, math.cos(a)]),
        )

    @property
    def rotation(self) -> np.ndarray:
        """Columns are the ground axes; ground-frame vector -> world."""
        return np.column_stack((self.tangent_x, self.tangent_y, self.normal))

    def packed(self) -> np.ndarray:
        return np.vstack((self.origin, self.tangent_x, self.tangent_y, self.normal))

    def to_ground(self, x) -> np.ndarray:
        return self.rotation.T @ (np.asarray(x, dtype=float) - self.origin)


def ground_params(ground: GroundModel) -> np.ndarray:
    return np.array([ground.k1, ground.k2, ground.mu_c, ground.mu_s, ground.mu_v,
                     ground.v_s, ground.smoothing_width, ground.slip_velocity])


@dataclass(frozen=True)
class ContactPoint:
    """A penetrating contact candidate.

    ``world_pos``/``world_vel`` are world frame; ``ground_pos``/``ground_vel``
    are the same quantities in ground-frame components (x downhill, z normal).
    """

    module_index: int
    local_offset: np.ndarray
    world_pos: np.ndarray
    world_vel: np.ndarray
    ground_pos: np.ndarray
    ground_vel: np.ndarray

    @property
    def penetration(self) -> float:
        return float(self.ground_pos[2])


def candidate_points(model: RobotModel, state: State, ground: GroundModel) -> np.ndarray:
    """All 2N candidate points, ordered (module 0 proximal, module 0 distal, ...)."""
    kin = forward_kinematics(model, state)
    frame = GroundFrame.from_ground(ground)
    return K.contact_candidates(kin.R, kin.d, model.lengths, model.diameters, frame.normal)


def detect_contacts(model: RobotModel, state: State, ground: GroundModel) -> list[ContactPoint]:
    check_state(model, state)
    kin = forward_kinematics(model, state)
    frame = GroundFrame.from_ground(ground)
    pts = K.contact_candidates(kin.R, kin.d, model.lengths, model.diameters, frame.normal)
    out = []
    for c, x in enumerate(pts):
        g = frame.to_ground(x)
        if g[2] >= 0.0:
            continue
        k = c // 2
        vel = point_jacobian(model, state, k, x, kin) @ state.qd
        out.append(ContactPoint(
            module_index=k,
            local_offset=kin.R[k].T @ (x - kin.d[k]),
            world_pos=x,
            world_vel=vel,
            ground_pos=g,
            ground_vel=frame.rotation.T @ vel,
        ))
    return out


def ground_force(cp: ContactPoint, ground: GroundModel) -> np.ndarray:
    """Reaction force on the robot in ground-frame components (x, y, normal)."""
    pz = cp.ground_pos[2]
    vx, vy, vz = cp.ground_vel
    return force_components(pz, vx, vy, vz, ground)


def force_components(pz, vx, vy, vz, ground: GroundModel) -> np.ndarray:
    return K.ground_force(float(pz), float(vx), float(vy), float(vz), ground.k1, ground.k2,
                          ground.mu_c, ground.mu_s, ground.mu_v, ground.v_s,
                          ground.smoothing_width, ground.slip_velocity)


def stribeck_coefficient(v, ground: GroundModel):
    """Speed-dependent friction coefficient, mu_s at rest falling to mu_c."""
    v = np.asarray(v, dtype=float)
    return ground.mu_c - (ground.mu_c - ground.mu_s) * np.exp(-(v / ground.v_s) ** 2)


def world_force(force_ground, ground: GroundModel) -> np.ndarray:
    return GroundFrame.from_ground(ground).rotation @ np.asarray(force_ground, dtype=float)


def contact_energy(model: RobotModel, state: State, ground: GroundModel) -> float:
    """Elastic energy stored in the normal springs."""
    pts = candidate_points(model, state, ground)
    pz = GroundFrame.from_ground(ground).normal @ pts.T
    pen = np.minimum(pz, 0.0)
    return float(0.5 * ground.k1 * pen @ pen)
