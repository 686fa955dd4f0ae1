import numpy as np
import pytest

from tumblesim import momentum
from tumblesim.kinematics import skew
from tumblesim.validation import PROPERTIES, PropertyResult, random_state, run_validation


def test_fresh_build_passes_every_property():
    results = run_validation(samples=30, seed=3)
    assert [r.name for r in results] == [p[0] for p in PROPERTIES]
    for r in results:
        assert r.passed, r.line()


def test_skew_sign_mutation_breaks_parallel_axis(monkeypatch):
    monkeypatch.setattr(momentum, "skew", lambda v: -skew(v))
    results = {r.name: r for r in run_validation(samples=5)}
    assert not results["parallel-axis identity"].passed
    assert results["rotation orthonormality"].passed


def test_result_line_format():
    ok = PropertyResult("CoM offset sums", 3.2e-15, 1e-10)
    bad = PropertyResult("CoM offset sums", 0.5, 1e-10)
    assert ok.line().startswith("PASS") and "CoM offset sums" in ok.line()
    assert "3.200e-15" in ok.line() and "1e-10" in ok.line()
    assert bad.line().startswith("FAIL") and not bad.passed


def test_random_states_stay_clear_of_the_singularity(robot):
    rng = np.random.default_rng(0)
    for _ in range(200):
        s = random_state(robot, rng)
        assert abs(s.q_H[1]) <= 1.2
        assert np.all(np.abs(s.q_b - robot.target) <= np.pi / 3)


def test_validation_is_seeded():
    a = run_validation(samples=5, seed=7)
    b = run_validation(samples=5, seed=7)
    assert [r.max_error for r in a] == pytest.approx([r.max_error for r in b], rel=0, abs=0)
