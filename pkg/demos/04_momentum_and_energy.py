"""Angular momentum read off the kinetic energy.

For a chain pivoting about a ground contact, differentiating its kinetic
energy with respect to the head's Euler rates (with the pivot velocity held
fixed) and mapping through the Euler-rate Jacobian gives the angular
momentum about the pivot. This script checks that on random postures, and
shows that the same quantity is not the momentum about the centre of mass.

Run:  python demos/04_momentum_and_energy.py
"""
import numpy as np

from tumblesim.chain_model import default_robot
from tumblesim.kinematics import euler_rate_matrix
from tumblesim.momentum import (angular_momentum_about, angular_momentum_com, default_pivot,
                                momentum_from_energy, relative_offsets)
from tumblesim.validation import random_state, run_validation

robot = default_robot()
rng = np.random.default_rng(7)
m = robot.actuated_count

print("  |from energy - about pivot|   |about pivot - about CoM|")
for _ in range(5):
    s = random_state(robot, rng)
    pivot = default_pivot(robot, s)
    qd = s.qd.copy()
    # choose the head velocity so the pivot point is at rest
    qd[m:m + 3] = -np.cross(euler_rate_matrix(s.q_H) @ qd[m + 3:], pivot - s.p_H)
    s = s.with_rates(qd)
    from_energy = momentum_from_energy(robot, s, pivot)
    about_pivot = angular_momentum_about(robot, s, pivot)
    about_com = angular_momentum_com(robot, s)
    print(f"  {np.linalg.norm(from_energy - about_pivot):24.2e}"
          f"   {np.linalg.norm(about_pivot - about_com):24.3f}")

# %% CoM offsets -------------------------------------------------------------------
ups, ups_dot = relative_offsets(robot, s)
print(f"\nmass-weighted CoM offsets sum to {np.linalg.norm(robot.masses @ ups):.1e} m kg, "
      f"their rates to {np.linalg.norm(robot.masses @ ups_dot):.1e}")

# %% The invariant suite behind `tumblesim validate` --------------------------------
for r in run_validation(samples=20):
    print(r.line())
