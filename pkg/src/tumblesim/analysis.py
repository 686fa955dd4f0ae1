"""Post-processing of tumbling traces: contact spikes and their periodicity.

While the loop tumbles, each polygon side meets the ground once per
revolution, so every per-link force channel (and every joint torque) repeats
once per revolution and the pooled spike train of all sides repeats once per
vertex. Signals are resampled against the accumulated roll angle before the
period is measured, which removes the effect of the loop speeding up.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain_model import RobotModel
from .integrator import SimTrace, roll_angle


def polygon_sides(model: RobotModel) -> list[list[int]]:
    """Module indices grouped into rigid polygon sides."""
    sides = [[0]]
    for k, joint in enumerate(model.junction_joint):
        if joint < 0:
            sides[-1].append(k + 1)
        else:
            sides.append([k + 1])
    return sides


def side_normal_forces(trace: SimTrace, model: RobotModel) -> np.ndarray:
    """Normal ground force on each polygon side, (samples, sides)."""
    per_module = trace.contact_forces[:, :, 2].reshape(len(trace.t), model.n_modules, 2).sum(axis=2)
    return np.column_stack([per_module[:, s].sum(axis=1) for s in polygon_sides(model)])


def contact_episodes(signal, phase, min_impulse: float = 0.0, dt: float = 1.0):
    """Contiguous runs of ``signal > 0`` as (start, stop, force-weighted phase).

    Runs whose impulse ``sum(signal) * dt`` is below ``min_impulse`` are dropped.
    """
    signal = np.asarray(signal, dtype=float)
    phase = np.asarray(phase, dtype=float)
    edges = np.flatnonzero(np.diff(np.r_[0, (signal > 0).astype(np.int8), 0]))
    out = []
    for a, b in zip(edges[::2], edges[1::2]):
        w = signal[a:b]
        if w.sum() * dt < min_impulse:
            continue
        out.append((int(a), int(b), float(w @ phase[a:b] / w.sum())))
    return out


def roll_period(signals, roll, search=(0.5, 1.5), resolution: int = 64) -> tuple[float, float]:
    """Dominant repeat of ``signals`` in revolutions, from their mean autocorrelation.

    Each row of ``signals`` is resampled on a uniform grid in ``roll`` (rad)
    with ``resolution`` points per revolution. Returns the lag of the largest
    autocorrelation inside ``search`` (revolutions) and its value.
    """
    roll = np.asarray(roll, dtype=float)
    span = roll[-1] - roll[0] if len(roll) > 1 else 0.0
    if span <= 2 * math.pi * search[1]:
        raise ValueError("trace covers too few revolutions for the search window")
    if np.any(np.diff(roll) < 0):
        # keep the monotone part so the resampling stays single-valued
        keep = np.r_[True, np.diff(np.maximum.accumulate(roll)) > 0]
        roll = roll[keep]
        signals = [np.asarray(s)[keep] for s in signals]
    grid = np.linspace(roll[0], roll[-1], int(span / (2 * math.pi) * resolution) + 1)
    acc = np.zeros(len(grid))
    for s in signals:
        x = np.interp(grid, roll, s)
        x = x - x.mean()
        energy = x @ x
        if energy == 0.0:
            continue
        acc += np.correlate(x, x, "full")[len(x) - 1:] / energy
    acc /= len(signals)
    lags = np.arange(len(grid)) / resolution
    window = (lags >= search[0]) & (lags <= search[1])
    best = np.argmax(acc[window])
    return float(lags[window][best]), float(acc[window][best])


@dataclass(frozen=True)
class SpikeReport:
    vertex_count: int
    revolutions: float
    grf_period_rev: float       # per-side GRF repeat, revolutions
    grf_correlation: float
    torque_period_rev: float    # per-joint torque repeat, revolutions
    torque_correlation: float
    link_spacing_rev: float     # median roll between successive contacts of one side
    episodes: int               # pooled contact episodes over all sides

    @property
    def grf_spike_period_ratio(self) -> float:
        """Pooled GRF spike period over (rotation period / vertex count)."""
        return self.grf_period_rev

    @property
    def torque_spike_period_ratio(self) -> float:
        return self.torque_period_rev

    @property
    def episodes_per_vertex(self) -> float:
        """Pooled contact episodes per vertex passage (1 if each side lands once per turn)."""
        return self.episodes / (self.vertex_count * self.revolutions)


def spike_report(trace: SimTrace, model: RobotModel, skip: float = 1.0,
                 min_impulse: float = 0.5) -> SpikeReport:
    """Spike periodicity of the per-side GRF and per-joint torque channels.

    The first ``skip`` seconds (spin-up from the initial push) are ignored.
    A side contacting once per revolution means the pooled spike train has
    period rotation/vertex count, so a per-channel repeat of one revolution
    is reported as a ratio of 1.
    """
    keep = trace.t >= trace.t[0] + skip
    roll = roll_angle(trace)[keep]
    forces = side_normal_forces(trace, model)[keep]
    torques = np.abs(trace.u[keep])
    grf = roll_period(forces.T, roll)
    tau = roll_period(torques.T, roll)
    dt = float(trace.t[1] - trace.t[0])
    spacing = []
    count = 0
    for col in forces.T:
        eps = contact_episodes(col, roll, min_impulse, dt)
        count += len(eps)
        spacing.extend(np.diff([e[2] for e in eps]) / (2 * math.pi))
    return SpikeReport(
        vertex_count=len(polygon_sides(model)),
        revolutions=float((roll[-1] - roll[0]) / (2 * math.pi)),
        grf_period_rev=grf[0], grf_correlation=grf[1],
        torque_period_rev=tau[0], torque_correlation=tau[1],
        link_spacing_rev=float(np.median(spacing)) if spacing else math.nan,
        episodes=count,
    )


def energy_increase(trace: SimTrace) -> float:
    """Largest rise of the stored mechanical energy between any two samples."""
    E = trace.mechanical_energy
    return float(np.max(E - np.minimum.accumulate(E)))
