"""Adaptive Runge-Kutta integration of the tumbling dynamics.

The stepper is the Dormand-Prince 5(4) pair with FSAL, PI step-size control
and the usual quartic dense output. Samples are taken on a fixed grid by
interpolation, so traces at different tolerances line up sample for sample.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import _kernels as K
from . import contact as C
from . import dynamics as Dyn
from . import momentum as Mom
from .chain_model import (GroundModel, InitialCondition, IntegratorSettings, RobotModel,
                          Scenario, parse_config, scenario_to_dict)
from .kinematics import SingularityError, State, forward_kinematics, head_rotation

log = logging.getLogger(__name__)

PITCH_GUARD = math.pi / 2 - 0.01

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# fifth-order weights minus the embedded fourth-order weights
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# dense output: y(t + x h) = y + h * K^T P [x, x^2, x^3, x^4]
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
# PI controller exponents (Hairer & Wanner), order 4 error estimate
ALPHA = 0.7 / 5
BETA = 0.4 / 5


class IntegrationError(RuntimeError):
    """Step size underflow or a non-finite state."""


@dataclass
class StepStats:
    accepted: int = 0
    rejected: int = 0
    nfev: int = 0
    max_step_taken: float = 0.0
    min_step_taken: float = math.inf


def _error_norm(err, y, y_new, settings: IntegratorSettings) -> float:
    scale = settings.abs_tol + settings.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(fun, t0, y0, f0, settings: IntegratorSettings) -> float:
    """Starting step from the usual two-evaluation estimate."""
    scale = settings.abs_tol + settings.rel_tol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, settings.max_step)
    f1 = fun(t0 + h0, y0 + h0 * f0)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return max(min(100 * h0, h1, settings.max_step), settings.min_step)


def dopri5(fun: Callable, t0: float, y0: np.ndarray, t_end: float,
           settings: IntegratorSettings, sample_times: np.ndarray,
           check: Callable[[np.ndarray], None] | None = None,
           events: list | None = None):
    """Integrate ``y' = fun(t, y)`` and return ``y`` at ``sample_times``.

    ``check(y_new)`` may raise to veto a step. Rejected steps are appended
    to ``events`` as ``("step_rejected", t, h, err)``. On an exception the
    samples collected so far are attached to it as ``.partial``.
    """
    y = np.array(y0, dtype=float)
    t = float(t0)
    stats = StepStats()
    out = np.empty((len(sample_times), y.size))
    i_sample = 0
    while i_sample < len(sample_times) and sample_times[i_sample] <= t:
        out[i_sample] = y
        i_sample += 1
    f = fun(t, y)
    stats.nfev += 1
    h = _initial_step(fun, t, y, f, settings)
    stats.nfev += 1
    err_prev = 1e-4
    Kst = np.empty((7, y.size))
    try:
        while t < t_end and i_sample < len(sample_times):
            h = min(h, settings.max_step, t_end - t)
            if h < settings.min_step and t_end - t > settings.min_step:
                raise IntegrationError(f"step size {h:.3e} below min_step at t = {t:.6f}")
            Kst[0] = f
            for s in range(1, 6):
                dy = h * (_A[s] @ Kst[:s])
                Kst[s] = fun(t + _C[s] * h, y + dy)
            y_new = y + h * (_B[:6] @ Kst[:6])
            f_new = fun(t + h, y_new)
            Kst[6] = f_new
            stats.nfev += 6
            if not np.all(np.isfinite(y_new)):
                err = math.inf
            else:
                err = _error_norm(h * (_E @ Kst), y, y_new, settings)
            if err <= 1.0:
                if check is not None:
                    check(y_new)
                t_new = t + h
                Q = Kst.T @ _P
                while i_sample < len(sample_times) and sample_times[i_sample] <= t_new:
                    x = (sample_times[i_sample] - t) / h
                    out[i_sample] = y + h * (Q @ np.array([x, x * x, x ** 3, x ** 4]))
                    i_sample += 1
                stats.accepted += 1
                stats.max_step_taken = max(stats.max_step_taken, h)
                stats.min_step_taken = min(stats.min_step_taken, h)
                if err == 0.0:
                    factor = MAX_FACTOR
                else:
                    factor = SAFETY * err ** -ALPHA * err_prev ** BETA
                    factor = min(MAX_FACTOR, max(MIN_FACTOR, factor))
                err_prev = max(err, 1e-4)
                t, y, f = t_new, y_new, f_new
                h *= factor
            else:
                stats.rejected += 1
                if events is not None:
                    events.append(("step_rejected", t, h, err))
                if not math.isfinite(err):
                    h *= MIN_FACTOR
                else:
                    h *= max(MIN_FACTOR, SAFETY * err ** -0.2)
                if h < settings.min_step:
                    raise IntegrationError(
                        f"step size {h:.3e} below min_step at t = {t:.6f} (error norm {err:.3g})")
    except Exception as exc:
        exc.partial = (out[:i_sample].copy(), stats)
        raise
    return out, stats


# ---------------------------------------------------------------------------
# initial states


def euler_from_rotation(R) -> np.ndarray:
    """Z-Y-X Euler angles (q_x, q_y, q_z) of a rotation matrix."""
    R = np.asarray(R)
    qy = -math.asin(max(-1.0, min(1.0, R[2, 0])))
    qx = math.atan2(R[2, 1], R[2, 2])
    qz = math.atan2(R[1, 0], R[0, 0])
    return np.array([qx, qy, qz])


def settling_depth(heights, ground: GroundModel, weight: float) -> float:
    """Depth of the lowest candidate at which the normal springs carry ``weight``.

    ``heights`` are candidate heights above the lowest one; only the slope
    component of the weight is balanced.
    """
    heights = np.asarray(heights, dtype=float)
    load = weight * math.cos(ground.slope_angle)

    def excess(s):
        return ground.k1 * np.clip(s - heights, 0.0, None).sum() - load

    hi = 1.0
    while excess(hi) < 0:
        hi *= 2
    return float(brentq(excess, 0.0, hi, xtol=1e-14))


def initial_state(model: RobotModel, ground: GroundModel,
                  initial: InitialCondition = InitialCondition(),
                  gravity: float = Dyn.GRAVITY) -> State:
    """Place the robot on the plane according to ``initial``.

    The upright loop stands in the vertical plane through the downhill
    direction with its joint axis horizontal, and rolls without slipping
    about its lowest contact candidate at ``spin_rate`` (positive rolls
    downhill).
    """
    frame = C.GroundFrame.from_ground(ground)
    if initial.pose == "upright_loop":
        q_H = np.array([initial.roll_angle, 0.0, math.pi / 2])
    else:
        # module x downhill, module y across the slope, module z along the normal
        R_H = np.column_stack((frame.tangent_y, -frame.tangent_x, frame.normal))
        q_H = euler_from_rotation(R_H)
    probe = State.at_rest(model, q_H=q_H)
    pts = C.candidate_points(model, probe, ground)
    heights = pts @ frame.normal
    low = int(np.argmin(heights))
    depth = settling_depth(heights - heights[low], ground, model.total_mass * gravity
                           ) if initial.settle else 0.0
    p_H = (initial.clearance - depth - heights[low]) * frame.normal
    state = State.at_rest(model, p_H=p_H, q_H=q_H)
    if initial.pose != "upright_loop" or initial.spin_rate == 0.0:
        return state
    pivot = pts[low] + p_H
    omega = initial.spin_rate * frame.tangent_y
    E = K.euler_rate_matrix(*q_H)
    qd = np.zeros(model.n_dof)
    m = model.actuated_count
    qd[m + 3:] = np.linalg.solve(E, omega)
    qd[m:m + 3] = np.cross(omega, p_H - pivot)
    return state.with_rates(qd)


# ---------------------------------------------------------------------------
# traces


@dataclass(frozen=True)
class SimTrace:
    """Sampled trajectory and derived quantities.

    ``contact_forces`` is (samples, 2N, 3) in ground-frame components
    (downhill, lateral, normal) for every contact candidate, ordered module
    by module, proximal end first.
    """

    t: np.ndarray
    q: np.ndarray
    qd: np.ndarray
    u: np.ndarray
    contact_forces: np.ndarray
    sigma_cm: np.ndarray
    K: np.ndarray
    p_cm: np.ndarray
    potential: np.ndarray
    spring_energy: np.ndarray
    controller_energy: np.ndarray
    events: tuple
    stats: StepStats
    truncated: bool = False
    error: str | None = None

    @property
    def mechanical_energy(self) -> np.ndarray:
        """Kinetic + gravity + ground-spring + posture-controller spring energy."""
        return self.K + self.potential + self.spring_energy + self.controller_energy

    @property
    def normal_force_total(self) -> np.ndarray:
        return self.contact_forces[:, :, 2].sum(axis=1)

    def link_forces(self, module: int) -> tuple[np.ndarray, np.ndarray]:
        """Normal and friction-magnitude force on one module, summed over its ends."""
        f = self.contact_forces[:, 2 * module:2 * module + 2, :].sum(axis=1)
        return f[:, 2], np.hypot(f[:, 0], f[:, 1])

    def state(self, i: int) -> State:
        return State.from_vectors(self.q[i], self.qd[i])


def _trace_from_samples(system: Dyn.TumblerSystem, times, Y, events, stats,
                        truncated=False, error=None) -> SimTrace:
    model, ground, g = system.model, system.ground, system.g
    n = model.n_dof
    S = len(times)
    u = np.empty((S, model.actuated_count))
    forces = np.empty((S, 2 * model.n_modules, 3))
    sigma = np.empty((S, 3))
    Kin = np.empty(S)
    p_cm = np.empty((S, 3))
    V = np.empty(S)
    spring = np.zeros(S)
    ctrl = np.empty(S)
    for i, y in enumerate(Y):
        state = State.from_vectors(y[:n], y[n:])
        u[i], forces[i] = system.outputs(y)
        kin = forward_kinematics(model, state)
        p_cm[i] = kin.p_cm
        sigma[i] = Mom.angular_momentum_about(model, state, kin.p_cm)
        Kin[i] = 0.5 * state.qd @ Dyn.mass_matrix(model, state) @ state.qd
        V[i] = g * model.masses @ kin.p[:, 2]
        if ground is not None:
            spring[i] = C.contact_energy(model, state, ground)
        ctrl[i] = Dyn.controller_energy(model, state)
    contact_log = []
    if S:
        mask = forces[:, :, 2] > 0.0
        changes = np.argwhere(mask[1:] != mask[:-1])
        for i, c in changes:
            kind = "contact_make" if mask[i + 1, c] else "contact_break"
            contact_log.append((kind, float(times[i + 1]), int(c)))
    all_events = tuple(sorted(contact_log + list(events), key=lambda e: e[1]))
    return SimTrace(t=np.asarray(times), q=Y[:, :n], qd=Y[:, n:], u=u, contact_forces=forces,
                    sigma_cm=sigma, K=Kin, p_cm=p_cm, potential=V, spring_energy=spring,
                    controller_energy=ctrl, events=all_events, stats=stats,
                    truncated=truncated, error=error)


def sample_grid(duration: float, interval: float, t0: float = 0.0) -> np.ndarray:
    count = int(round(duration / interval))
    return t0 + interval * np.arange(count + 1)


def simulate(model: RobotModel, ground: GroundModel | None, initial: State,
             settings: IntegratorSettings = IntegratorSettings(), *,
             sample_interval: float = 1e-3, gravity: float = Dyn.GRAVITY,
             allow_partial: bool = False) -> SimTrace:
    """Integrate from ``initial`` for ``settings.max_sim_time`` seconds.

    ``ground=None`` simulates free flight. With ``allow_partial`` a failed run
    returns the samples gathered so far with ``truncated=True`` instead of
    raising.
    """
    system = Dyn.TumblerSystem(model, ground, gravity)
    times = sample_grid(settings.max_sim_time, sample_interval)
    events: list = []
    n = model.n_dof

    def check(y_new):
        if abs(y_new[n - 2]) > PITCH_GUARD:
            raise SingularityError(f"head pitch {y_new[n - 2]:.4f} rad crossed the Euler guard")

    try:
        Y, stats = dopri5(system, 0.0, initial.vector, settings.max_sim_time, settings, times,
                          check=check, events=events)
    except (IntegrationError, SingularityError, np.linalg.LinAlgError) as exc:
        if not allow_partial:
            raise
        Y, stats = exc.partial
        log.warning("simulation stopped early: %s", exc)
        stats.nfev = system.nfev
        return _trace_from_samples(system, times[:len(Y)], Y, events, stats,
                                   truncated=True, error=str(exc))
    stats.nfev = system.nfev
    return _trace_from_samples(system, times, Y, events, stats)


def simulate_scenario(sc: Scenario, **overrides) -> SimTrace:
    settings = replace(sc.sim.settings, **overrides)
    x0 = initial_state(sc.robot, sc.ground, sc.sim.initial, sc.sim.gravity)
    return simulate(sc.robot, sc.ground, x0, settings,
                    sample_interval=sc.sim.sample_interval, gravity=sc.sim.gravity)


# ---------------------------------------------------------------------------
# summaries and sweeps


def loop_normal(q_H) -> np.ndarray:
    """World direction of the head x axis, the loop's rolling axis."""
    return head_rotation(q_H)[:, 0]


def spin_rate(trace: SimTrace) -> np.ndarray:
    """Head angular velocity about the loop's rolling axis, rad/s."""
    m = trace.q.shape[1] - 6
    out = np.empty(len(trace.t))
    for i, (q_H, rates) in enumerate(zip(trace.q[:, m + 3:], trace.qd[:, m + 3:])):
        out[i] = loop_normal(q_H) @ (K.euler_rate_matrix(*q_H) @ rates)
    return out


def roll_angle(trace: SimTrace) -> np.ndarray:
    """Accumulated rotation about the rolling axis since the first sample."""
    w = spin_rate(trace)
    if len(w) < 2:
        return np.zeros(len(w))
    return np.concatenate(([0.0], np.cumsum(0.5 * (w[1:] + w[:-1]) * np.diff(trace.t))))


@dataclass(frozen=True)
class RunSummary:
    descent: float              # CoM travel along the downhill direction, m
    mean_speed: float           # descent / duration, m/s
    revolutions: float
    tipped_over: bool
    energy_dissipated: float    # J
    duration: float
    error: str | None = None
    params: dict = field(default_factory=dict)


def summarize(trace: SimTrace, ground: GroundModel) -> RunSummary:
    frame = C.GroundFrame.from_ground(ground)
    m = trace.q.shape[1] - 6
    duration = float(trace.t[-1] - trace.t[0])
    descent = float((trace.p_cm[-1] - trace.p_cm[0]) @ frame.tangent_x)
    n0 = loop_normal(trace.q[0, m + 3:])
    worst = 0.0
    for q_H in trace.q[:, m + 3:]:
        c = max(-1.0, min(1.0, loop_normal(q_H) @ n0))
        worst = max(worst, math.degrees(math.acos(c)))
    revs = float(roll_angle(trace)[-1] / (2 * math.pi))
    E = trace.mechanical_energy
    return RunSummary(
        descent=descent,
        mean_speed=descent / duration if duration > 0 else 0.0,
        revolutions=revs,
        tipped_over=worst > 60.0,
        energy_dissipated=float(E[0] - E[-1]) if len(E) else 0.0,
        duration=duration,
        error=trace.error,
    )


def _set_path(sc: Scenario, path: str, value) -> Scenario:
    """Return ``sc`` with one dotted parameter replaced (angles in degrees)."""
    doc = scenario_to_dict(sc)
    node = doc
    keys = path.split(".")
    for k in keys[:-1]:
        if k not in node or not isinstance(node[k], dict):
            raise KeyError(f"unknown parameter {path!r}")
        node = node[k]
    if keys[-1] not in node:
        raise KeyError(f"unknown parameter {path!r}")
    node[keys[-1]] = value
    return parse_config(doc)


def expand_grid(grid: dict[str, Sequence]) -> list[dict]:
    if not grid:
        raise ValueError("parameter grid is empty")
    names = list(grid)
    values = [list(grid[k]) for k in names]
    if any(not v for v in values):
        raise ValueError("parameter grid has an empty axis")
    return [dict(zip(names, combo)) for combo in itertools.product(*values)]


def _run_point(sc: Scenario, point: dict) -> RunSummary:
    try:
        run = sc
        for path, value in point.items():
            run = _set_path(run, path, value)
        x0 = initial_state(run.robot, run.ground, run.sim.initial, run.sim.gravity)
        trace = simulate(run.robot, run.ground, x0, run.sim.settings,
                         sample_interval=run.sim.sample_interval, gravity=run.sim.gravity,
                         allow_partial=True)
        return replace(summarize(trace, run.ground), params=dict(point))
    except Exception as exc:  # one failed grid point must not abort the sweep
        log.warning("sweep point %s failed: %s", point, exc)
        return RunSummary(math.nan, math.nan, math.nan, False, math.nan, 0.0,
                          error=f"{type(exc).__name__}: {exc}", params=dict(point))


def sweep(sc: Scenario, grid: dict[str, Sequence], workers: int = 1) -> list[RunSummary]:
    """Run ``sc`` at every point of the Cartesian ``grid`` of dotted parameters.

    Keys are scenario-file paths such as ``"ground.slope_deg"``.
    """
    points = expand_grid(grid)
    if workers <= 1:
        return [_run_point(sc, p) for p in points]
    from concurrent.futures import ProcessPoolExecutor
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_point, [sc] * len(points), points))
