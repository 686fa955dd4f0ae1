"""Fast invariant checks on randomized states, used by ``tumblesim validate``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dynamics, kick_analysis, momentum
from .chain_model import RobotModel, default_robot
from .kinematics import State, forward_kinematics


def random_state(model: RobotModel, rng: np.random.Generator, joint_range: float = math.pi / 3,
                 pitch_range: float = 1.2, rate_scale: float = 2.0) -> State:
    """A random configuration and velocity away from the Euler singularity."""
    m = model.actuated_count
    q_b = model.target + rng.uniform(-joint_range, joint_range, m)
    p_H = rng.uniform(-1.0, 1.0, 3)
    q_H = np.array([rng.uniform(-math.pi, math.pi), rng.uniform(-pitch_range, pitch_range),
                    rng.uniform(-math.pi, math.pi)])
    qd = rng.normal(0.0, rate_scale, model.n_dof)
    return State(q_b=q_b, p_H=p_H, q_H=q_H, qd=qd)


@dataclass(frozen=True)
class PropertyResult:
    name: str
    max_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.max_error <= self.tolerance)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name:<28} max error {self.max_error:.3e}  (tol {self.tolerance:.0e})"


def _orthonormality(model, states):
    err = 0.0
    for s in states:
        R = forward_kinematics(model, s).R
        err = max(err, np.abs(R.transpose(0, 2, 1) @ R - np.eye(3)).max(),
                  np.abs(np.linalg.det(R) - 1.0).max())
    return err


def _offset_sums(model, states):
    scale = model.total_mass * model.chain_length
    err = 0.0
    for s in states:
        ups, ups_dot = momentum.relative_offsets(model, s)
        err = max(err, np.linalg.norm(model.masses @ ups) / scale,
                  np.linalg.norm(model.masses @ ups_dot) / scale)
    return err


def _energy(model, states):
    err = 0.0
    for s in states:
        k_split = momentum.kinetic_energy(model, s)
        k_direct = momentum.kinetic_energy_direct(model, s)
        k_quad = 0.5 * s.qd @ dynamics.mass_matrix(model, s) @ s.qd
        err = max(err, abs(k_split - k_direct) / k_direct, abs(k_quad - k_direct) / k_direct)
    return err


def _parallel_axis(model, states):
    """Composite inertia from the parallel-axis sum vs from angular momentum."""
    err = 0.0
    for s in states:
        rigid = s.with_rates(np.zeros(model.n_dof))
        J_sum = kick_analysis.composite_inertia(model, rigid)
        J_mom = kick_analysis.composite_inertia_from_momentum(model, rigid)
        err = max(err, np.abs(J_sum - J_mom).max() / np.abs(J_sum).max())
    return err


def _mass_matrix_spd(model, states):
    """Asymmetry of D plus a penalty if its smallest eigenvalue is not positive."""
    err = 0.0
    for s in states:
        D = dynamics.mass_matrix(model, s)
        err = max(err, np.abs(D - D.T).max())
        if np.linalg.eigvalsh(D).min() <= 0.0:
            err = math.inf
    return err


PROPERTIES = (
    ("rotation orthonormality", _orthonormality, 1e-12),
    ("CoM offset sums", _offset_sums, 1e-10),
    ("kinetic energy oracle", _energy, 1e-9),
    ("parallel-axis identity", _parallel_axis, 1e-9),
    ("mass matrix symmetric PD", _mass_matrix_spd, 1e-12),
)


def run_validation(model: RobotModel | None = None, samples: int = 50, seed: int = 0
                   ) -> list[PropertyResult]:
    model = default_robot() if model is None else model
    rng = np.random.default_rng(seed)
    states = [random_state(model, rng) for _ in range(samples)]
    return [PropertyResult(name, float(fn(model, states)), tol) for name, fn, tol in PROPERTIES]
