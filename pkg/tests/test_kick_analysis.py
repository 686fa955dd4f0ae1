import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import least_squares

from tumblesim.chain_model import KickProfile
from tumblesim.kick_analysis import (TILT_AXIS, angular_momentum_series, check_grid,
                                     circumradius, composite_inertia,
                                     composite_inertia_from_momentum, kick_curves, kick_force,
                                     loop_vertices, sigmoid_tilt, sigmoid_tilt_rate, time_grid)

PROFILE = KickProfile()


def test_sigmoid_shape():
    t = time_grid(PROFILE)
    theta = sigmoid_tilt(PROFILE, t)
    assert theta[0] == pytest.approx(PROFILE.tilt_magnitude / (1 + math.exp(5.0)))
    assert sigmoid_tilt(PROFILE, 1.0) == pytest.approx(PROFILE.tilt_magnitude / 2)
    assert np.all(np.diff(theta) > 0)
    np.testing.assert_allclose(sigmoid_tilt_rate(PROFILE, t[1:-1]),
                               (theta[2:] - theta[:-2]) / (t[2:] - t[:-2]), rtol=1e-4)


def test_composite_inertia_symmetric_pd(robot):
    J = composite_inertia(robot)
    np.testing.assert_allclose(J, J.T, atol=1e-15)
    assert np.linalg.eigvalsh(J).min() > 0
    # planar loop: the normal moment is the sum of the two in-plane moments (thin-figure bound)
    assert J[1, 1] <= J[0, 0] + J[2, 2] + 1e-12


def test_composite_inertia_matches_momentum(robot, states):
    for s in [None] + states[:5]:
        s = None if s is None else s.with_rates(np.zeros(17))
        np.testing.assert_allclose(composite_inertia(robot, s),
                                   composite_inertia_from_momentum(robot, s),
                                   rtol=1e-10, atol=1e-13)


def test_circumradius(robot):
    v = loop_vertices(robot)
    assert v.shape == (12, 3)
    r = circumradius(robot)
    # a regular 12-gon with the same perimeter
    perimeter = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1).sum()
    assert r == pytest.approx(perimeter / (24 * math.sin(math.pi / 12)), rel=0.05)
    # geometric circle fit in the loop plane (world x-z) as an independent estimate
    xz = v[:, [0, 2]]
    fit = least_squares(lambda c: np.linalg.norm(xz - c[:2], axis=1) - c[2],
                        x0=[*xz.mean(axis=0), 0.3])
    assert r == pytest.approx(fit.x[2], abs=0.01)


def test_zero_tilt_zero_force(robot):
    res = kick_force(robot, replace(PROFILE, tilt_magnitude=0.0))
    np.testing.assert_array_equal(res.force, 0.0)


def test_spinless_tilt_matches_constant_inertia_oracle(robot):
    prof = replace(PROFILE, spin_rate=0.0, growth_rate=5.0)
    res = kick_force(robot, prof)
    J0 = composite_inertia(robot)
    s = 1 / (1 + np.exp(-prof.growth_rate * (res.t - prof.inflection_time)))
    theta_ddot = prof.tilt_magnitude * prof.growth_rate ** 2 * s * (1 - s) * (1 - 2 * s)
    oracle = np.linalg.norm(J0 @ TILT_AXIS) * np.abs(theta_ddot) / res.lever_arm
    assert np.abs(res.force - oracle).max() <= 0.03 * oracle.max()
    assert res.peak > 0


def test_series_parts_sum(robot):
    J0 = composite_inertia(robot)
    t = time_grid(PROFILE)
    a, b = angular_momentum_series(J0, PROFILE, t, parts=True)
    np.testing.assert_allclose(a + b, angular_momentum_series(J0, PROFILE, t))
    # no tilt: spin momentum stays along the fixed spin axis
    flat = angular_momentum_series(J0, PROFILE, t, tilt=False)
    np.testing.assert_allclose(flat[:, [0, 2]], 0.0, atol=1e-12)


def test_peak_monotone_in_growth_rate(robot):
    _, curves = kick_curves(robot, PROFILE, [1, 2, 5, 10, 20])
    peaks = [curves[k].peak for k in (1.0, 2.0, 5.0, 10.0, 20.0)]
    assert all(b >= a for a, b in zip(peaks, peaks[1:]))
    assert curves[10.0].peak > curves[2.0].peak


def test_peak_monotone_in_spin(robot):
    peaks = [kick_force(robot, replace(PROFILE, spin_rate=w)).peak for w in (0, 5, 10, 20)]
    assert all(b >= a for a, b in zip(peaks, peaks[1:]))


@given(k=st.floats(1.0, 20.0))
def test_gyroscopic_part_linear_in_spin(robot, k):
    g10 = kick_force(robot, replace(PROFILE, spin_rate=10.0, growth_rate=k)).gyroscopic
    g20 = kick_force(robot, replace(PROFILE, spin_rate=20.0, growth_rate=k)).gyroscopic
    assert g20.max() / g10.max() == pytest.approx(2.0, rel=0.05)


def test_force_vanishes_at_both_ends(robot):
    for k in (5.0, 10.0, 20.0):
        res = kick_force(robot, replace(PROFILE, growth_rate=k))
        assert res.force[0] < 0.05 * res.peak
        assert res.force[-1] < 1e-3 * res.peak
        assert res.peak_time == pytest.approx(PROFILE.inflection_time, abs=0.5 / k)


def test_lever_arm_override(robot):
    base = kick_force(robot, PROFILE)
    other = kick_force(robot, replace(PROFILE, lever_arm=2 * base.lever_arm))
    np.testing.assert_allclose(other.force, base.force / 2)
    assert base.lever_arm == pytest.approx(circumradius(robot))


def test_coarse_grid_rejected(robot):
    with pytest.raises(ValueError, match="too coarse"):
        kick_force(robot, replace(PROFILE, growth_rate=20.0), time_step=0.01)
    with pytest.raises(ValueError, match="span"):
        check_grid(PROFILE, np.linspace(0, 2.0, 3001))
    with pytest.raises(ValueError, match="increasing"):
        check_grid(PROFILE, np.array([0.0, 2.0, 1.0, 3.0]))


def test_kick_curves_shared_grid(robot):
    t, curves = kick_curves(robot, PROFILE, [2, 5])
    assert len(t) == 3001
    assert all(np.array_equal(c.t, t) for c in curves.values())
    with pytest.raises(ValueError):
        kick_curves(robot, PROFILE, [])
