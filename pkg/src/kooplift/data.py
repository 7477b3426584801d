"""Trajectory containers and snapshot-pair assembly.

Trajectories are stored row-major in time (one row per sample) at the API
surface and transposed into column-per-snapshot matrices internally, which
keeps the operator regressions literal matrix algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DataError

__all__ = [
    "TrajectoryDataset",
    "SnapshotPairs",
    "Finding",
    "build_snapshot_pairs",
    "validate_dataset",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Finding:
    """One diagnostic record from a validation pass."""

    kind: str
    trajectory: Optional[int] = None
    row: Optional[int] = None
    column: Optional[int] = None
    message: str = ""


@dataclass(frozen=True)
class TrajectoryDataset:
    """One or more time-ordered state trajectories sharing a sample interval.

    Each trajectory is a (T_i, n) array; optional inputs are (T_i, q) arrays
    aligned row-for-row with their trajectory. Arrays are copied and made
    read-only, so datasets are safe to share across threads.
    """

    trajectories: tuple
    dt: float
    inputs: Optional[tuple] = None

    def __init__(self, trajectories: Sequence, dt: float, inputs: Optional[Sequence] = None):
        if dt <= 0:
            raise DataError(f"dt must be positive, got {dt}")
        trajs = []
        for i, traj in enumerate(trajectories):
            a = np.atleast_2d(np.asarray(traj, dtype=float))
            if a.ndim != 2:
                raise DataError(f"trajectory {i} is not a 2-d array")
            if a.shape[0] < 2:
                raise DataError(
                    f"trajectory {i} too short: {a.shape[0]} sample(s), need at least 2"
                )
            trajs.append(_freeze(a))
        n_set = {a.shape[1] for a in trajs}
        if len(n_set) > 1:
            raise DataError(f"trajectories disagree on state dimension: {sorted(n_set)}")
        ins = None
        if inputs is not None:
            if len(inputs) != len(trajs):
                raise DataError(
                    f"got {len(inputs)} input arrays for {len(trajs)} trajectories"
                )
            ins = []
            for i, (u, a) in enumerate(zip(inputs, trajs)):
                ua = np.asarray(u, dtype=float)
                if ua.ndim == 1:
                    ua = ua[:, None]
                if ua.shape[0] != a.shape[0]:
                    raise DataError(
                        f"inputs for trajectory {i} have {ua.shape[0]} rows, "
                        f"expected {a.shape[0]}"
                    )
                ins.append(_freeze(ua))
            q_set = {u.shape[1] for u in ins}
            if len(q_set) > 1:
                raise DataError(f"input arrays disagree on channel count: {sorted(q_set)}")
            ins = tuple(ins)
        object.__setattr__(self, "trajectories", tuple(trajs))
        object.__setattr__(self, "dt", float(dt))
        object.__setattr__(self, "inputs", ins)

    @property
    def n_states(self) -> int:
        if not self.trajectories:
            raise DataError("no trajectories")
        return self.trajectories[0].shape[1]

    @property
    def n_inputs(self) -> int:
        if self.inputs is None:
            return 0
        return self.inputs[0].shape[1]

    @property
    def n_samples(self) -> int:
        return sum(t.shape[0] for t in self.trajectories)


@dataclass(frozen=True)
class SnapshotPairs:
    """Column-aligned snapshot matrices X, Xprime (n x m), optional U (q x m)."""

    X: np.ndarray
    Xprime: np.ndarray
    dt: float
    U: Optional[np.ndarray] = None
    counts: tuple = field(default=())  # pairs contributed per source trajectory

    @property
    def m(self) -> int:
        return self.X.shape[1]


def build_snapshot_pairs(data: TrajectoryDataset) -> SnapshotPairs:
    """Assemble one-step snapshot pairs from every trajectory.

    A trajectory of T samples contributes T - 1 pairs; pairs never straddle
    trajectory boundaries. Column order preserves trajectory order, then time
    order. U columns, when inputs are present, are taken at the X timestamps.
    """
    if not data.trajectories:
        raise DataError("no trajectories")
    xs, xps, us = [], [], []
    counts = []
    for i, traj in enumerate(data.trajectories):
        xs.append(traj[:-1])
        xps.append(traj[1:])
        counts.append(traj.shape[0] - 1)
        if data.inputs is not None:
            us.append(data.inputs[i][:-1])
    X = np.vstack(xs).T
    Xp = np.vstack(xps).T
    U = np.vstack(us).T if us else None
    return SnapshotPairs(X=X, Xprime=Xp, dt=data.dt, U=U, counts=tuple(counts))


def split_pairs_by_trajectory(pairs: SnapshotPairs):
    """Recover the original trajectories from snapshot pairs (inverse of build)."""
    trajs = []
    start = 0
    for c in pairs.counts:
        X = pairs.X[:, start : start + c]
        Xp = pairs.Xprime[:, start : start + c]
        trajs.append(np.vstack([X.T, Xp.T[-1:]]))
        start += c
    return trajs


def validate_dataset(data: TrajectoryDataset) -> list:
    """Diagnostic consistency checks; returns an empty list for clean data.

    Reports non-finite entries, zero-variance state coordinates, and input
    matrices whose row counts do not match their trajectory.
    """
    findings = []
    for i, traj in enumerate(data.trajectories):
        bad = ~np.isfinite(traj)
        if bad.any():
            for row in np.unique(np.nonzero(bad)[0]):
                findings.append(
                    Finding(
                        kind="non-finite",
                        trajectory=i,
                        row=int(row),
                        message=f"trajectory {i} has non-finite values at row {row}",
                    )
                )
    if data.trajectories:
        stacked = np.vstack(data.trajectories)
        with np.errstate(invalid="ignore"):
            var = np.nanvar(stacked, axis=0)
        for col in np.nonzero(var == 0.0)[0]:
            findings.append(
                Finding(
                    kind="zero-variance",
                    column=int(col),
                    message=f"state coordinate {col} is constant across all samples",
                )
            )
    if data.inputs is not None:
        for i, (u, traj) in enumerate(zip(data.inputs, data.trajectories)):
            if u.shape[0] != traj.shape[0]:
                findings.append(
                    Finding(
                        kind="input-misalignment",
                        trajectory=i,
                        message=f"inputs for trajectory {i} have {u.shape[0]} rows, "
                        f"expected {traj.shape[0]}",
                    )
                )
    return findings
