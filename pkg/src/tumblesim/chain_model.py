"""Robot, ground and scenario descriptions.

Everything here is an immutable value object. Physical constants for the
13-module loop robot live in :func:`default_fixture`; scenario files are YAML
documents with four top-level sections (``robot``, ``ground``, ``sim``,
``kick``). Angles are written in degrees in files and held in radians in
memory.

Chain layout
------------
Modules are ordered head first, tail last. Each module's longitudinal axis is
its local x axis and module ``k + 1`` starts at the distal end of module
``k``. The head is rigidly mounted on the first body module; every body
module carries one actuated joint at its distal end, so ``N`` modules give
``N - 2`` joints.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, fields, replace
from functools import cached_property
from pathlib import Path
from typing import Any

import numpy as np
import yaml

ROLES = ("head", "body", "tail")


class ConfigError(ValueError):
    """Invalid scenario file or model parameter.

    ``field`` holds the dotted name of the offending entry when known.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _require(cond: bool, name: str, message: str) -> None:
    if not cond:
        raise ConfigError(message, name)


def _vec3(value, name: str) -> tuple[float, float, float]:
    try:
        arr = tuple(float(v) for v in value)
    except TypeError as exc:
        raise ConfigError("expected a 3-vector", name) from exc
    _require(len(arr) == 3, name, "expected a 3-vector")
    _require(all(math.isfinite(v) for v in arr), name, "non-finite entry")
    return arr


@dataclass(frozen=True)
class ModuleSpec:
    """One rigid module: a capsule of given length and diameter.

    ``inertia_diag`` is the principal inertia (I_xx, I_yy, I_zz) about the
    module CoM in the module frame. ``com_offset`` is the CoM in the module
    frame and defaults to the geometric centre.
    """

    role: str
    mass: float
    length: float
    diameter: float
    inertia_diag: tuple[float, float, float]
    com_offset: tuple[float, float, float] | None = None

    def __post_init__(self):
        _require(self.role in ROLES, "role", f"must be one of {ROLES}")
        _require(self.mass > 0, "mass", "must be > 0")
        _require(self.length > 0, "length", "must be > 0")
        _require(self.diameter > 0, "diameter", "must be > 0")
        inertia = _vec3(self.inertia_diag, "inertia_diag")
        _require(all(i > 0 for i in inertia), "inertia_diag", "components must be > 0")
        a, b, c = inertia
        # principal moments of a physical body obey the triangle inequality
        tol = 1e-12 * (a + b + c)
        _require(a <= b + c + tol and b <= a + c + tol and c <= a + b + tol,
                 "inertia_diag", "violates the triangle inequality")
        object.__setattr__(self, "inertia_diag", inertia)
        com = (self.length / 2.0, 0.0, 0.0) if self.com_offset is None else self.com_offset
        object.__setattr__(self, "com_offset", _vec3(com, "com_offset"))


@dataclass(frozen=True)
class ControllerGains:
    kp: float = 1000.0
    kd: float = 10.0
    torque_limit: float = 50.0

    def __post_init__(self):
        _require(self.kp >= 0, "kp", "must be >= 0")
        _require(self.kd >= 0, "kd", "must be >= 0")
        _require(self.torque_limit > 0, "torque_limit", "must be > 0")


@dataclass(frozen=True)
class RobotModel:
    """The articulated module chain plus its joint position controller."""

    modules: tuple[ModuleSpec, ...]
    joint_axes: tuple[tuple[float, float, float], ...]
    actuated_count: int
    posture_target: tuple[float, ...]
    controller_gains: ControllerGains = field(default_factory=ControllerGains)

    def __post_init__(self):
        modules = tuple(self.modules)
        object.__setattr__(self, "modules", modules)
        m = int(self.actuated_count)
        _require(m >= 1, "actuated_count", "must be >= 1")
        _require(len(modules) == m + 2, "modules",
                 f"expected actuated_count + 2 = {m + 2} modules, got {len(modules)}")
        _require(modules[0].role == "head", "modules", "first module must be the head")
        _require(modules[-1].role == "tail", "modules", "last module must be the tail")
        _require(all(mod.role == "body" for mod in modules[1:-1]), "modules",
                 "inner modules must have role 'body'")
        axes = tuple(_vec3(a, "joint_axes") for a in self.joint_axes)
        _require(len(axes) == m, "joint_axes", f"expected {m} axes, got {len(axes)}")
        for a in axes:
            _require(abs(math.sqrt(sum(c * c for c in a)) - 1.0) <= 1e-12,
                     "joint_axes", "axes must be unit vectors")
        object.__setattr__(self, "joint_axes", axes)
        target = tuple(float(v) for v in self.posture_target)
        _require(len(target) == m, "posture_target",
                 f"expected {m} joint angles, got {len(target)}")
        object.__setattr__(self, "posture_target", target)

    @property
    def n_modules(self) -> int:
        return len(self.modules)

    @property
    def n_dof(self) -> int:
        """Dimension of the generalized coordinates [q_b, p_H, q_H]."""
        return self.actuated_count + 6

    @property
    def total_mass(self) -> float:
        return float(sum(mod.mass for mod in self.modules))

    @property
    def chain_length(self) -> float:
        return float(sum(mod.length for mod in self.modules))

    # Packed arrays consumed by the compiled kernels.
    @cached_property
    def masses(self) -> np.ndarray:
        return _readonly(np.array([mod.mass for mod in self.modules]))

    @cached_property
    def lengths(self) -> np.ndarray:
        return _readonly(np.array([mod.length for mod in self.modules]))

    @cached_property
    def diameters(self) -> np.ndarray:
        return _readonly(np.array([mod.diameter for mod in self.modules]))

    @cached_property
    def com_offsets(self) -> np.ndarray:
        return _readonly(np.array([mod.com_offset for mod in self.modules]))

    @cached_property
    def inertias(self) -> np.ndarray:
        return _readonly(np.array([mod.inertia_diag for mod in self.modules]))

    @cached_property
    def axes(self) -> np.ndarray:
        return _readonly(np.array(self.joint_axes))

    @cached_property
    def junction_joint(self) -> np.ndarray:
        """Joint index at each junction between consecutive modules, -1 if rigid."""
        return _readonly(np.array([-1] + list(range(self.actuated_count)), dtype=np.int64))

    @cached_property
    def target(self) -> np.ndarray:
        return _readonly(np.array(self.posture_target))

    def with_posture(self, target) -> RobotModel:
        return replace(self, posture_target=tuple(float(v) for v in target))


@dataclass(frozen=True)
class GroundModel:
    """Compliant inclined plane with Stribeck friction.

    ``smoothing_width`` (m) is the penetration depth over which the normal
    damper fades in; ``slip_velocity`` (m/s) is the half-width of the linear
    ramp that replaces the friction sign function.
    """

    slope_angle: float = math.radians(10.0)
    k1: float = 100.0
    k2: float = 1e-3
    mu_c: float = 0.7
    mu_s: float = 0.9
    mu_v: float = 0.1
    v_s: float = 0.1
    smoothing_width: float = 1e-4
    slip_velocity: float = 1e-3

    def __post_init__(self):
        _require(abs(self.slope_angle) < math.pi / 2, "slope_angle", "must be within (-90, 90) deg")
        _require(self.k1 > 0, "k1", "must be > 0")
        _require(self.k2 >= 0, "k2", "must be >= 0")
        _require(self.v_s > 0, "v_s", "must be > 0")
        _require(self.mu_c >= 0, "mu_c", "must be >= 0")
        _require(self.mu_s >= self.mu_c, "mu_s", "must be >= mu_c")
        _require(self.mu_v >= 0, "mu_v", "must be >= 0")
        _require(self.smoothing_width > 0, "smoothing_width", "must be > 0")
        _require(self.slip_velocity > 0, "slip_velocity", "must be > 0")


@dataclass(frozen=True)
class IntegratorSettings:
    rel_tol: float = 1e-3
    abs_tol: float = 1e-6
    max_step: float = 0.2
    min_step: float = 1e-10
    max_sim_time: float = 10.0

    def __post_init__(self):
        _require(self.rel_tol > 0, "rel_tol", "must be > 0")
        _require(self.abs_tol > 0, "abs_tol", "must be > 0")
        _require(0 < self.min_step <= self.max_step, "min_step", "need 0 < min_step <= max_step")
        _require(self.max_sim_time > 0, "max_sim_time", "must be > 0")


@dataclass(frozen=True)
class InitialCondition:
    """How the robot is placed at t = 0.

    ``pose`` is ``"upright_loop"`` (loop standing in the downhill vertical
    plane, rolling forward at ``spin_rate``) or ``"flat"`` (chain lying on
    the plane, pointing downhill). ``clearance`` lifts the lowest point above
    the surface; a negative value starts it pressed in. With ``settle`` the
    clearance is measured from the depth at which the normal springs carry
    the robot's weight, so a soft ground does not launch it into a bounce.
    """

    pose: str = "upright_loop"
    spin_rate: float = 2.0
    clearance: float = 0.0
    roll_angle: float = 0.0
    settle: bool = True

    def __post_init__(self):
        _require(self.pose in ("upright_loop", "flat"), "pose", "must be 'upright_loop' or 'flat'")


@dataclass(frozen=True)
class SimParams:
    settings: IntegratorSettings = field(default_factory=IntegratorSettings)
    sample_interval: float = 1e-3
    gravity: float = 9.81
    initial: InitialCondition = field(default_factory=InitialCondition)

    def __post_init__(self):
        _require(self.sample_interval > 0, "sample_interval", "must be > 0")
        _require(self.gravity >= 0, "gravity", "must be >= 0")

    @property
    def duration(self) -> float:
        return self.settings.max_sim_time


@dataclass(frozen=True)
class KickProfile:
    """Sigmoid tilt of the spin axis used by the kick-force study.

    ``lever_arm`` of ``None`` means the loop circumradius.
    """

    spin_rate: float = 10.0
    tilt_magnitude: float = math.radians(1.0)
    growth_rate: float = 5.0
    inflection_time: float = 1.0
    lever_arm: float | None = None
    duration: float = 3.0

    def __post_init__(self):
        _require(self.spin_rate >= 0, "spin_rate", "must be >= 0")
        _require(self.tilt_magnitude >= 0, "tilt_magnitude", "must be >= 0")
        _require(self.growth_rate > 0, "growth_rate", "must be > 0")
        _require(self.lever_arm is None or self.lever_arm > 0, "lever_arm", "must be > 0")
        _require(self.duration > 2 * self.inflection_time, "duration",
                 "must exceed twice the inflection time")


@dataclass(frozen=True)
class KickStudy:
    profile: KickProfile = field(default_factory=KickProfile)
    k_values: tuple[float, ...] = (1.0, 2.0, 5.0, 10.0, 20.0)
    time_step: float = 1e-3

    def __post_init__(self):
        ks = tuple(float(k) for k in self.k_values)
        _require(len(ks) > 0, "k_values", "must not be empty")
        _require(all(k > 0 for k in ks), "k_values", "must be > 0")
        object.__setattr__(self, "k_values", ks)
        _require(self.time_step > 0, "time_step", "must be > 0")


@dataclass(frozen=True)
class Scenario:
    robot: RobotModel
    ground: GroundModel
    sim: SimParams = field(default_factory=SimParams)
    kick: KickStudy = field(default_factory=KickStudy)


# ---------------------------------------------------------------------------
# default parameter set

HEAD = ModuleSpec("head", 0.5, 0.175, 0.10, (9.2362e-4, 8.70128e-4, 5.79548e-4))
BODY = ModuleSpec("body", 0.5, 0.191, 0.10, (8.51775e-4, 8.18543e-4, 5.89313e-4))
TAIL = ModuleSpec("tail", 0.5, 0.264, 0.14, (22.3399e-4, 21.8196e-4, 13.1895e-4))
N_JOINTS = 11
PITCH_AXIS = (0.0, 1.0, 0.0)


def loop_posture(modules, latch_bend: float = math.radians(30.0), tol: float = 1e-14,
                 max_iter: int = 50) -> tuple[float, ...]:
    """Joint angles that close the chain into a loop, head tip on tail tip.

    All joints pitch about the module y axis so the chain stays in its x-z
    plane. Starting from equal bends, Newton iterations with minimum-norm
    corrections enforce closure of both tip coordinates and a total turn of
    ``2*pi - latch_bend``, leaving ``latch_bend`` for the head-tail junction.
    """
    lengths = np.array([mod.length for mod in modules])
    m = len(modules) - 2
    total = 2.0 * math.pi - latch_bend
    theta = np.full(m, total / m)

    def residual(th):
        heading = np.concatenate(([0.0, 0.0], np.cumsum(th)))
        return (np.array([lengths @ np.cos(heading), lengths @ np.sin(heading), th.sum() - total]),
                heading)

    for _ in range(max_iter):
        r, heading = residual(theta)
        if np.max(np.abs(r)) < tol:
            break
        # joint j turns every module from index j + 2 onwards
        jac = np.zeros((3, m))
        for j in range(m):
            tail = slice(j + 2, None)
            jac[0, j] = -lengths[tail] @ np.sin(heading[tail])
            jac[1, j] = lengths[tail] @ np.cos(heading[tail])
            jac[2, j] = 1.0
        theta = theta - np.linalg.lstsq(jac, r, rcond=None)[0]
    else:
        raise ConfigError("loop closure did not converge", "posture_target")
    return tuple(float(v) for v in theta)


def default_robot() -> RobotModel:
    modules = (HEAD,) + (BODY,) * N_JOINTS + (TAIL,)
    return RobotModel(
        modules=modules,
        joint_axes=(PITCH_AXIS,) * N_JOINTS,
        actuated_count=N_JOINTS,
        posture_target=loop_posture(modules),
        controller_gains=ControllerGains(),
    )


def default_fixture() -> tuple[RobotModel, GroundModel]:
    """Default robot and ground parameters (10 deg slope)."""
    return default_robot(), GroundModel()


def default_scenario() -> Scenario:
    robot, ground = default_fixture()
    return Scenario(robot, ground)


# ---------------------------------------------------------------------------
# scenario files

_MODULE_KEYS = {"role", "mass", "length", "diameter", "inertia_diag", "com_offset"}
_ROBOT_KEYS = {"modules", "joint_axes", "posture_target_deg", "posture", "controller"}
_GROUND_KEYS = {"slope_deg", "k1", "k2", "mu_c", "mu_s", "mu_v", "v_s",
                "smoothing_width", "slip_velocity"}
_SIM_KEYS = {"duration", "rel_tol", "abs_tol", "max_step", "min_step",
             "sample_interval", "gravity", "initial"}
_INITIAL_KEYS = {"pose", "spin_rate", "clearance", "roll_deg", "settle"}
_KICK_KEYS = {"spin_rate", "tilt_deg", "growth_rate", "inflection_time", "lever_arm",
              "duration", "k_values", "time_step"}


def _check_keys(section: Any, allowed: set[str], where: str) -> dict:
    if section is None:
        return {}
    if not isinstance(section, dict):
        raise ConfigError("expected a mapping", where)
    unknown = sorted(set(section) - allowed)
    if unknown:
        prefix = "" if where == "scenario" else f"{where}."
        raise ConfigError("unknown key", prefix + str(unknown[0]))
    return section


def _number(section: dict, key: str, where: str, default):
    if key not in section:
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("expected a number", f"{where}.{key}")
    return float(value)


def _flag(section: dict, key: str, where: str, default: bool) -> bool:
    value = section.get(key, default)
    if not isinstance(value, bool):
        raise ConfigError("expected true or false", f"{where}.{key}")
    return value


def _exact_degrees(rad: float) -> float:
    """Degree value that converts back to exactly ``rad``."""
    deg = math.degrees(rad)
    if math.radians(deg) == rad:
        return deg
    lo = hi = deg
    for _ in range(64):
        lo, hi = math.nextafter(lo, -math.inf), math.nextafter(hi, math.inf)
        for cand in (lo, hi):
            if math.radians(cand) == rad:
                return cand
    return deg


def _build(section: Any, where: str, factory):
    """Call ``factory`` and prefix any invariant error with ``where``."""
    try:
        return factory()
    except ConfigError as exc:
        if exc.field and exc.field.startswith(where + "."):
            raise
        name = f"{where}.{exc.field}" if exc.field else where
        raise ConfigError(str(exc).split(": ", 1)[-1], name) from None


def _parse_robot(raw: Any) -> RobotModel:
    sec = _check_keys(raw, _ROBOT_KEYS, "robot")
    base = default_robot()
    if "modules" in sec:
        mods = sec["modules"]
        if not isinstance(mods, list) or not mods:
            raise ConfigError("expected a non-empty list", "robot.modules")
        modules = []
        for i, item in enumerate(mods):
            where = f"robot.modules[{i}]"
            item = _check_keys(item, _MODULE_KEYS, where)
            if "role" not in item:
                raise ConfigError("missing key 'role'", where)
            proto = {"head": HEAD, "body": BODY, "tail": TAIL}.get(item["role"])
            if proto is None:
                raise ConfigError(f"must be one of {ROLES}", f"{where}.role")
            kwargs = dict(
                role=item["role"],
                mass=_number(item, "mass", where, proto.mass),
                length=_number(item, "length", where, proto.length),
                diameter=_number(item, "diameter", where, proto.diameter),
                inertia_diag=item.get("inertia_diag", proto.inertia_diag),
                com_offset=item.get("com_offset"),
            )
            modules.append(_build(item, where, lambda: ModuleSpec(**kwargs)))
        modules = tuple(modules)
    else:
        modules = base.modules
    m = len(modules) - 2
    if "joint_axes" in sec:
        axes = sec["joint_axes"]
        if isinstance(axes, list) and len(axes) == 3 and all(
                isinstance(a, (int, float)) for a in axes):
            axes = [axes] * m
        joint_axes = tuple(_vec3(a, "robot.joint_axes") for a in axes)
    else:
        joint_axes = (PITCH_AXIS,) * m
    if "posture_target_deg" in sec and "posture" in sec:
        raise ConfigError("give either 'posture' or 'posture_target_deg'", "robot")
    if "posture_target_deg" in sec:
        vals = sec["posture_target_deg"]
        if not isinstance(vals, list):
            raise ConfigError("expected a list", "robot.posture_target_deg")
        posture = tuple(math.radians(float(v)) for v in vals)
    elif sec.get("posture", "loop") == "loop":
        posture = loop_posture(modules)
    elif sec["posture"] == "straight":
        posture = (0.0,) * m
    else:
        raise ConfigError("must be 'loop' or 'straight'", "robot.posture")
    ctrl = _check_keys(sec.get("controller"), {"kp", "kd", "torque_limit"}, "robot.controller")
    d = ControllerGains()
    gains = _build(ctrl, "robot.controller", lambda: ControllerGains(
        kp=_number(ctrl, "kp", "robot.controller", d.kp),
        kd=_number(ctrl, "kd", "robot.controller", d.kd),
        torque_limit=_number(ctrl, "torque_limit", "robot.controller", d.torque_limit)))
    return _build(sec, "robot", lambda: RobotModel(
        modules=modules, joint_axes=joint_axes, actuated_count=m,
        posture_target=posture, controller_gains=gains))


def _parse_ground(raw: Any) -> GroundModel:
    sec = _check_keys(raw, _GROUND_KEYS, "ground")
    d = GroundModel()
    kwargs = {f.name: _number(sec, f.name, "ground", getattr(d, f.name))
              for f in fields(GroundModel) if f.name != "slope_angle"}
    slope = _number(sec, "slope_deg", "ground", None)
    kwargs["slope_angle"] = d.slope_angle if slope is None else math.radians(slope)
    return _build(sec, "ground", lambda: GroundModel(**kwargs))


def _parse_sim(raw: Any) -> SimParams:
    sec = _check_keys(raw, _SIM_KEYS, "sim")
    ds, d = IntegratorSettings(), SimParams()
    settings = _build(sec, "sim", lambda: IntegratorSettings(
        rel_tol=_number(sec, "rel_tol", "sim", ds.rel_tol),
        abs_tol=_number(sec, "abs_tol", "sim", ds.abs_tol),
        max_step=_number(sec, "max_step", "sim", ds.max_step),
        min_step=_number(sec, "min_step", "sim", ds.min_step),
        max_sim_time=_number(sec, "duration", "sim", ds.max_sim_time)))
    ini = _check_keys(sec.get("initial"), _INITIAL_KEYS, "sim.initial")
    di = InitialCondition()
    roll = _number(ini, "roll_deg", "sim.initial", None)
    initial = _build(ini, "sim.initial", lambda: InitialCondition(
        pose=ini.get("pose", di.pose),
        spin_rate=_number(ini, "spin_rate", "sim.initial", di.spin_rate),
        clearance=_number(ini, "clearance", "sim.initial", di.clearance),
        roll_angle=di.roll_angle if roll is None else math.radians(roll),
        settle=_flag(ini, "settle", "sim.initial", di.settle)))
    return _build(sec, "sim", lambda: SimParams(
        settings=settings,
        sample_interval=_number(sec, "sample_interval", "sim", d.sample_interval),
        gravity=_number(sec, "gravity", "sim", d.gravity),
        initial=initial))


def _parse_kick(raw: Any) -> KickStudy:
    sec = _check_keys(raw, _KICK_KEYS, "kick")
    dp, d = KickProfile(), KickStudy()
    tilt = _number(sec, "tilt_deg", "kick", None)
    lever = sec.get("lever_arm")
    profile = _build(sec, "kick", lambda: KickProfile(
        spin_rate=_number(sec, "spin_rate", "kick", dp.spin_rate),
        tilt_magnitude=dp.tilt_magnitude if tilt is None else math.radians(tilt),
        growth_rate=_number(sec, "growth_rate", "kick", dp.growth_rate),
        inflection_time=_number(sec, "inflection_time", "kick", dp.inflection_time),
        lever_arm=None if lever is None else _number(sec, "lever_arm", "kick", None),
        duration=_number(sec, "duration", "kick", dp.duration)))
    ks = sec.get("k_values", list(d.k_values))
    if not isinstance(ks, list):
        raise ConfigError("expected a list", "kick.k_values")
    return _build(sec, "kick", lambda: KickStudy(
        profile=profile, k_values=tuple(ks),
        time_step=_number(sec, "time_step", "kick", d.time_step)))


def parse_config(doc: Any) -> Scenario:
    """Build a validated :class:`Scenario` from an already-parsed document."""
    doc = _check_keys(doc, {"robot", "ground", "sim", "kick"}, "scenario")
    return Scenario(
        robot=_parse_robot(doc.get("robot")),
        ground=_parse_ground(doc.get("ground")),
        sim=_parse_sim(doc.get("sim")),
        kick=_parse_kick(doc.get("kick")),
    )


def load_config(path) -> Scenario:
    """Read a YAML scenario file; missing entries take the default fixture values."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"parse failure: {exc}") from exc
    return parse_config(doc)


def scenario_to_dict(sc: Scenario) -> dict:
    r, g, s, k = sc.robot, sc.ground, sc.sim, sc.kick
    return {
        "robot": {
            "modules": [
                {"role": mod.role, "mass": mod.mass, "length": mod.length,
                 "diameter": mod.diameter, "inertia_diag": list(mod.inertia_diag),
                 "com_offset": list(mod.com_offset)}
                for mod in r.modules
            ],
            "joint_axes": [list(a) for a in r.joint_axes],
            **({"posture": "loop"} if r.posture_target == loop_posture(r.modules)
               else {"posture_target_deg": [_exact_degrees(v) for v in r.posture_target]}),
            "controller": {"kp": r.controller_gains.kp, "kd": r.controller_gains.kd,
                           "torque_limit": r.controller_gains.torque_limit},
        },
        "ground": {"slope_deg": _exact_degrees(g.slope_angle),
                   **{f.name: getattr(g, f.name) for f in fields(g) if f.name != "slope_angle"}},
        "sim": {
            "duration": s.settings.max_sim_time, "rel_tol": s.settings.rel_tol,
            "abs_tol": s.settings.abs_tol, "max_step": s.settings.max_step,
            "min_step": s.settings.min_step, "sample_interval": s.sample_interval,
            "gravity": s.gravity,
            "initial": {"pose": s.initial.pose, "spin_rate": s.initial.spin_rate,
                        "clearance": s.initial.clearance,
                        "roll_deg": _exact_degrees(s.initial.roll_angle),
                        "settle": s.initial.settle},
        },
        "kick": {
            "spin_rate": k.profile.spin_rate,
            "tilt_deg": _exact_degrees(k.profile.tilt_magnitude),
            "growth_rate": k.profile.growth_rate,
            "inflection_time": k.profile.inflection_time,
            "lever_arm": k.profile.lever_arm,
            "duration": k.profile.duration,
            "k_values": list(k.k_values),
            "time_step": k.time_step,
        },
    }


def dump_config(sc: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(sc), sort_keys=False)


def write_config(sc: Scenario, path) -> None:
    Path(path).write_text(dump_config(sc))


def scenario_hash(sc: Scenario) -> str:
    """Short content hash used to tag output files."""
    return hashlib.sha256(dump_config(sc).encode()).hexdigest()[:16]
