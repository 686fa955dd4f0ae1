"""Command-line front end: ``tumblesim simulate|sweep|kick|validate``."""
from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .analysis import spike_report
from .chain_model import ConfigError, Scenario, default_scenario, load_config, scenario_hash
from .integrator import (IntegrationError, SimTrace, initial_state, simulate, summarize,
                         sweep)
from .kick_analysis import kick_curves
from .kinematics import SingularityError
from .validation import run_validation

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

FMT = "%.17g"
PLOT_JOINT = 10   # J10 in one-based joint numbering
PLOT_LINK = 10    # L10: module index counting the head as 0

log = logging.getLogger("tumblesim")


def _load(path: str) -> Scenario:
    return default_scenario() if path == "default" else load_config(path)


def _apply_overrides(sc: Scenario, args) -> Scenario:
    settings = sc.sim.settings
    if args.rel_tol is not None:
        settings = replace(settings, rel_tol=args.rel_tol)
    if args.max_step is not None:
        settings = replace(settings, max_step=args.max_step)
    if args.duration is not None:
        settings = replace(settings, max_sim_time=args.duration)
    sim = replace(sc.sim, settings=settings)
    if args.sample_interval is not None:
        sim = replace(sim, sample_interval=args.sample_interval)
    return replace(sc, sim=sim)


def _header(sc: Scenario, *lines: str) -> str:
    rows = [f"tumblesim {__version__}", f"scenario sha256:{scenario_hash(sc)}",
            "deterministic: identical scenario and flags give identical files", *lines]
    return "".join(f"# {r}\n" for r in rows)


def trace_columns(n_joints: int, n_candidates: int) -> list[str]:
    gen = [f"q_b{j + 1}" for j in range(n_joints)] + ["p_Hx", "p_Hy", "p_Hz", "q_Hx", "q_Hy", "q_Hz"]
    cols = ["t"] + gen + ["d" + c for c in gen] + [f"u{j + 1}" for j in range(n_joints)]
    for c in range(n_candidates):
        cols += [f"F{c // 2}{'pd'[c % 2]}_{a}" for a in "xyz"]
    return cols + ["sigma_cm_x", "sigma_cm_y", "sigma_cm_z", "K"]


def trace_table(tr: SimTrace) -> np.ndarray:
    S = len(tr.t)
    return np.column_stack((tr.t, tr.q, tr.qd, tr.u, tr.contact_forces.reshape(S, -1),
                            tr.sigma_cm, tr.K))


def write_trace(path: Path, sc: Scenario, tr: SimTrace) -> None:
    cols = trace_columns(tr.u.shape[1], tr.contact_forces.shape[1])
    head = _header(sc, "angles in rad, rates in rad/s, torques in N m, lengths in m",
                   "F<module><p|d>_<x|y|z>: ground force at the proximal/distal end of a module, "
                   "ground frame (x downhill, z normal), N")
    with open(path, "w", newline="") as fh:
        fh.write(head)
        fh.write(",".join(cols) + "\n")
        np.savetxt(fh, trace_table(tr), fmt=FMT, delimiter=",")
        if tr.truncated:
            end = tr.t[-1] if len(tr.t) else 0.0
            fh.write(f"# TRUNCATED after t = {end:.6f} s: {tr.error}\n")


PLOT_SCRIPT = '''"""Joint torque and ground reaction force of one joint/link, from trace.csv.

Run with any Python that has matplotlib: python plot_trace.py [trace.csv]
"""
import sys

import matplotlib.pyplot as plt
import numpy as np

path = sys.argv[1] if len(sys.argv) > 1 else "trace.csv"
data = np.genfromtxt(path, delimiter=",", names=True, comments="#")
t = data["t"]
tau = data["u{joint}"]
fx = data["F{link}p_x"] + data["F{link}d_x"]
fy = data["F{link}p_y"] + data["F{link}d_y"]
fn = data["F{link}p_z"] + data["F{link}d_z"]

fig, axes = plt.subplots(2, 1, sharex=True, figsize=(9, 6))
axes[0].plot(t, tau)
axes[0].set_ylabel("joint {joint} torque [N m]")
axes[1].plot(t, fn, label="normal")
axes[1].plot(t, np.hypot(fx, fy), label="friction magnitude")
axes[1].set_ylabel("link {link} GRF [N]")
axes[1].set_xlabel("time [s]")
axes[1].legend()
fig.tight_layout()
fig.savefig("trace.png", dpi=150)
plt.show()
'''


def write_summary(path: Path, sc: Scenario, tr: SimTrace) -> None:
    lines = [_header(sc).rstrip("\n")]
    if tr.truncated:
        lines.append(f"status: TRUNCATED ({tr.error})")
    else:
        lines.append("status: complete")
    lines.append(f"samples: {len(tr.t)}")
    st = tr.stats
    lines.append(f"steps: accepted {st.accepted}, rejected {st.rejected}, rhs evaluations {st.nfev}")
    if st.accepted:
        lines.append(f"step size: min {st.min_step_taken:.3e} s, max {st.max_step_taken:.3e} s")
    if len(tr.t) > 1:
        s = summarize(tr, sc.ground)
        for key in ("descent", "mean_speed", "revolutions", "tipped_over", "energy_dissipated"):
            lines.append(f"{key}: {getattr(s, key)}")
        try:
            rep = spike_report(tr, sc.robot)
        except ValueError as exc:
            lines.append(f"spike analysis: skipped ({exc})")
        else:
            lines.append(f"GRF spike period / (rotation period / {rep.vertex_count}): "
                         f"{rep.grf_spike_period_ratio:.4f}")
            lines.append(f"torque spike period / (rotation period / {rep.vertex_count}): "
                         f"{rep.torque_spike_period_ratio:.4f}")
    path.write_text("\n".join(lines) + "\n")


def cmd_simulate(args) -> int:
    sc = _apply_overrides(_load(args.scenario), args)
    out = Path(args.out)
    x0 = initial_state(sc.robot, sc.ground, sc.sim.initial, sc.sim.gravity)
    tr = simulate(sc.robot, sc.ground, x0, sc.sim.settings, sample_interval=sc.sim.sample_interval,
                  gravity=sc.sim.gravity, allow_partial=True)
    out.mkdir(parents=True, exist_ok=True)
    write_trace(out / "trace.csv", sc, tr)
    write_summary(out / "summary.txt", sc, tr)
    (out / "plot_trace.py").write_text(PLOT_SCRIPT.replace("{joint}", str(PLOT_JOINT))
                                       .replace("{link}", str(PLOT_LINK)))
    if tr.truncated:
        print(f"error: simulation stopped early: {tr.error}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {len(tr.t)} samples to {out / 'trace.csv'}")
    return EXIT_OK


def load_grid(path) -> dict:
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict) or not doc:
        raise ConfigError("grid file must map parameter paths to lists of values", "grid")
    grid = {}
    for key, values in doc.items():
        values = values if isinstance(values, list) else [values]
        if not values:
            raise ConfigError("empty value list", f"grid.{key}")
        grid[str(key)] = values
    return grid


def cmd_sweep(args) -> int:
    sc = _apply_overrides(_load(args.scenario), args)
    grid = load_grid(args.grid)
    try:
        results = sweep(sc, grid, workers=args.workers)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0]), "grid") from exc
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = list(grid)
    fields = ["descent", "mean_speed", "revolutions", "tipped_over", "energy_dissipated",
              "duration", "error"]
    with open(out / "sweep.csv", "w", newline="") as fh:
        fh.write(_header(sc, "one row per grid point; angles in the grid file are degrees"))
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names + fields)
        for r in results:
            row = asdict(r)
            w.writerow([r.params[n] for n in names]
                       + [repr(row[f]) if isinstance(row[f], float) else row[f] or "" for f in fields])
    failed = sum(r.error is not None for r in results)
    print(f"{len(results)} runs, {failed} failed; wrote {out / 'sweep.csv'}")
    return EXIT_RUNTIME if failed else EXIT_OK


def profile_label(profile) -> str:
    return (f"{profile.spin_rate:g} rad/s, {math.degrees(profile.tilt_magnitude):g} deg, "
            f"inflection {profile.inflection_time:g} s")


def cmd_kick(args) -> int:
    sc = _load(args.scenario)
    study = sc.kick
    t, curves = kick_curves(sc.robot, study.profile, study.k_values, study.time_step)
    lever = next(iter(curves.values())).lever_arm
    head = _header(sc, f"profile: {profile_label(study.profile)}", f"lever arm {lever:.6g} m",
                   "force in N")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "kick_curves.csv", "w", newline="") as fh:
        fh.write(head)
        fh.write(",".join(["t"] + [f"F_k{k:g}" for k in curves]) + "\n")
        np.savetxt(fh, np.column_stack([t] + [r.force for r in curves.values()]), fmt=FMT,
                   delimiter=",")
    with open(out / "kick_peaks.csv", "w", newline="") as fh:
        fh.write(head)
        fh.write("k,peak_force,peak_time\n")
        for k, r in curves.items():
            fh.write(f"{k!r},{r.peak!r},{r.peak_time!r}\n")
    print(f"wrote {len(curves)} kick curves to {out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    results = run_validation(samples=args.samples, seed=args.seed)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tumblesim", description=__doc__)
    p.add_argument("--version", action="version", version=f"tumblesim {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def runs(sp):
        sp.add_argument("scenario", help="scenario YAML file, or 'default'")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--rel-tol", type=float)
        sp.add_argument("--max-step", type=float)
        sp.add_argument("--duration", type=float)
        sp.add_argument("--sample-interval", type=float)

    runs(sub.add_parser("simulate", help="integrate one scenario and write trace.csv"))
    sp = sub.add_parser("sweep", help="run a scenario over a parameter grid")
    runs(sp)
    sp.add_argument("--grid", required=True, help="YAML mapping parameter paths to value lists")
    sp.add_argument("--workers", type=int, default=1)
    sp = sub.add_parser("kick", help="kick force curves for the scenario's tilt profile")
    sp.add_argument("scenario", help="scenario YAML file, or 'default'")
    sp.add_argument("--out", default="out")
    sp = sub.add_parser("validate", help="check model invariants on random states")
    sp.add_argument("--samples", type=int, default=50)
    sp.add_argument("--seed", type=int, default=0)
    return p


COMMANDS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "kick": cmd_kick,
            "validate": cmd_validate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, yaml.YAMLError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, SingularityError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
