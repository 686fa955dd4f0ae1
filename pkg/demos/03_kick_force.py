"""Force needed to tip the plane of a spinning loop.

A spinning loop resists changes to its spin axis. To steer it sideways by a
small angle, something has to supply the rate of change of its angular
momentum. Here the loop is frozen into one rigid body, its spin axis is
tipped by a smooth one degree step, and the required moment is turned into
a force at the loop rim.

Run:  python demos/03_kick_force.py
"""
from dataclasses import replace

import numpy as np

from tumblesim.chain_model import default_scenario
from tumblesim.kick_analysis import circumradius, composite_inertia, kick_curves, kick_force

sc = default_scenario()
robot, profile = sc.robot, sc.kick.profile

J = composite_inertia(robot)
print("composite inertia about the CoM (kg m^2):")
print(np.array2string(J, precision=4, suppress_small=True))
print(f"loop circumradius {circumradius(robot):.3f} m")

# %% One curve per growth rate --------------------------------------------------
# A faster step (larger k) means a larger angular acceleration of the axis
# and a larger gyroscopic moment, both concentrated around the inflection.
t, curves = kick_curves(robot, profile, sc.kick.k_values)
print("\n   k   peak force   at t")
for k, r in curves.items():
    print(f"{k:4g}   {r.peak:8.3f} N   {r.peak_time:.3f} s")

# %% Spin matters -----------------------------------------------------------------
# The gyroscopic part of the moment is proportional to the spin rate.
for w in (5.0, 10.0, 20.0):
    r = kick_force(robot, replace(profile, spin_rate=w))
    print(f"spin {w:4g} rad/s: peak {r.peak:.3f} N, gyroscopic part {r.gyroscopic.max():.3f} N")
