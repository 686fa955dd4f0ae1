"""Tumbling down a 10 degree slope.

The 13-module chain is closed into a loop by its posture controller, set
upright on a soft inclined plane and given a small forward roll. Gravity
does the rest. This script runs a few seconds of that descent and looks at
what the loop does: how fast it rolls, how often it leaves the ground, and
how the contact forces repeat as each side of the polygon lands.

Run:  python demos/01_tumbling_on_a_slope.py [seconds]
"""
import math
import sys
from dataclasses import replace

import numpy as np

from tumblesim.analysis import polygon_sides, side_normal_forces, spike_report
from tumblesim.chain_model import default_scenario
from tumblesim.integrator import roll_angle, simulate_scenario, spin_rate, summarize

duration = float(sys.argv[1]) if len(sys.argv) > 1 else 10.0

# %% The scenario -----------------------------------------------------------
sc = default_scenario()
sc = replace(sc, sim=replace(sc.sim, settings=replace(sc.sim.settings, max_sim_time=duration)))
print(f"slope {math.degrees(sc.ground.slope_angle):.0f} deg, "
      f"{sc.robot.n_modules} modules, {sc.robot.total_mass:.1f} kg, "
      f"{len(polygon_sides(sc.robot))} polygon sides")

trace = simulate_scenario(sc)
s = summarize(trace, sc.ground)
print(f"{duration:g} s simulated in {trace.stats.accepted} steps "
      f"({trace.stats.rejected} rejected)")
print(f"descent {s.descent:.2f} m, mean speed {s.mean_speed:.2f} m/s, "
      f"{s.revolutions:.1f} revolutions, tipped over: {s.tipped_over}")

# %% Spin-up ------------------------------------------------------------------
# The loop accelerates until its ground contacts bleed energy as fast as the
# slope supplies it. Print the roll rate once per second.
w = spin_rate(trace)
for t_mark in np.arange(0.0, duration + 1e-9, 1.0):
    i = int(round(t_mark / sc.sim.sample_interval))
    print(f"  t = {t_mark:4.1f} s   roll rate {w[i]:6.2f} rad/s")

# %% Bounding -----------------------------------------------------------------
# On this soft ground the loop does not roll like a wheel: once it spins
# faster than about sqrt(g / R) it hops from side to side.
airborne = np.mean(trace.normal_force_total == 0.0)
print(f"airborne {100 * airborne:.0f} % of the time")

# %% Which side carries the load ---------------------------------------------
# Each polygon side takes the weight once per revolution. The dominant side
# at every sample, listed against roll angle, shows the sides landing in turn.
sides = side_normal_forces(trace, sc.robot)
roll = roll_angle(trace) / (2 * math.pi)
order = []
for i in range(0, len(trace.t), 50):
    if sides[i].max() > 0 and (not order or order[-1][1] != sides[i].argmax()):
        order.append((roll[i], int(sides[i].argmax())))
print("side landings (revolution, side):",
      " ".join(f"{r:.2f}:{k}" for r, k in order[-12:]))

# %% Spike periodicity ---------------------------------------------------------
if duration > 3.0:
    rep = spike_report(trace, sc.robot)
    print(f"GRF repeats every {rep.grf_period_rev:.3f} rev (correlation {rep.grf_correlation:.2f}), "
          f"joint torque every {rep.torque_period_rev:.3f} rev")
    print(f"so the pooled spike train has period {rep.grf_spike_period_ratio:.3f} x "
          f"(rotation period / {rep.vertex_count})")
