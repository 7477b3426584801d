"""Trajectory CSV format.

Layout: optional header line; column 0 is time (strictly increasing, uniform
spacing), columns 1..n are state coordinates, optional trailing columns are
input channels. Multiple trajectories are separated by blank lines. Floats
are written with repr, so files round-trip exactly.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .data import TrajectoryDataset
from .errors import DataError

__all__ = ["read_trajectory_csv", "write_trajectory_csv", "read_numeric_csv"]

_REL_DT_TOL = 1e-8


def _parse_blocks(path: str):
    """Split a CSV file into numeric blocks; returns (header, blocks)."""
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    header = None
    blocks = []
    current = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            if current:
                blocks.append(current)
                current = []
            continue
        cells = [c.strip() for c in line.split(",")]
        try:
            row = [float(c) for c in cells]
        except ValueError:
            if header is None and not blocks and not current:
                header = cells
                continue
            raise DataError(f"{path}:{lineno}: non-numeric value in data row") from None
        current.append((lineno, row))
    if current:
        blocks.append(current)
    return header, blocks


def read_numeric_csv(path: str) -> np.ndarray:
    """Read a single numeric block (header allowed) as a 2-d array."""
    _, blocks = _parse_blocks(path)
    if not blocks:
        raise DataError(f"{path}: no data rows")
    if len(blocks) > 1:
        raise DataError(f"{path}: expected a single block, found {len(blocks)}")
    rows = [r for _, r in blocks[0]]
    widths = {len(r) for r in rows}
    if len(widths) > 1:
        raise DataError(f"{path}: inconsistent column counts {sorted(widths)}")
    return np.array(rows, dtype=float)


def read_trajectory_csv(path: str, n_inputs: int = 0) -> TrajectoryDataset:
    """Read a trajectory CSV into a dataset; last n_inputs columns are inputs."""
    _, blocks = _parse_blocks(path)
    if not blocks:
        raise DataError(f"{path}: no data rows")
    trajectories = []
    inputs = [] if n_inputs > 0 else None
    dt = None
    for b, block in enumerate(blocks):
        rows = [r for _, r in block]
        first_line = block[0][0]
        widths = {len(r) for r in rows}
        if len(widths) > 1:
            raise DataError(f"{path}: trajectory {b} has inconsistent column counts")
        width = widths.pop()
        if width < 2 + n_inputs:
            raise DataError(
                f"{path}: trajectory {b} has {width} columns; need time + at "
                f"least 1 state + {n_inputs} input column(s)"
            )
        arr = np.array(rows, dtype=float)
        if arr.shape[0] < 2:
            raise DataError(
                f"{path}:{first_line}: trajectory {b} too short "
                f"({arr.shape[0]} sample(s), need at least 2)"
            )
        t = arr[:, 0]
        steps = np.diff(t)
        if np.any(steps <= 0):
            raise DataError(f"{path}: trajectory {b} time column is not increasing")
        block_dt = float(np.mean(steps))
        if np.max(np.abs(steps - block_dt)) > _REL_DT_TOL * block_dt:
            raise DataError(f"{path}: trajectory {b} is not uniformly sampled")
        if dt is None:
            dt = block_dt
        elif abs(block_dt - dt) > _REL_DT_TOL * dt:
            raise DataError(
                f"{path}: trajectory {b} sample interval {block_dt} differs from {dt}"
            )
        if n_inputs > 0:
            trajectories.append(arr[:, 1 : width - n_inputs])
            inputs.append(arr[:, width - n_inputs :])
        else:
            trajectories.append(arr[:, 1:])
    return TrajectoryDataset(trajectories, dt=dt, inputs=inputs)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_trajectory_csv(
    path_or_buffer,
    trajectories: Sequence[np.ndarray],
    dt: float,
    inputs: Optional[Sequence[np.ndarray]] = None,
    t0: float = 0.0,
    header: bool = True,
) -> str:
    """Render trajectories in the CSV layout; returns the text.

    When `path_or_buffer` is a string the text is written atomically.
    """
    lines = []
    first = np.atleast_2d(np.asarray(trajectories[0]))
    n = first.shape[1]
    q = 0
    if inputs is not None:
        q = np.atleast_2d(np.asarray(inputs[0])).shape[1]
    if header:
        cols = ["t"] + [f"x{i + 1}" for i in range(n)] + [f"u{i + 1}" for i in range(q)]
        lines.append(",".join(cols))
    for k, traj in enumerate(trajectories):
        traj = np.atleast_2d(np.asarray(traj, dtype=float))
        if k > 0:
            lines.append("")
        u = None
        if inputs is not None:
            u = np.atleast_2d(np.asarray(inputs[k], dtype=float))
        for i in range(traj.shape[0]):
            cells = [_fmt(t0 + i * dt)] + [_fmt(v) for v in traj[i]]
            if u is not None:
                cells += [_fmt(v) for v in u[i]]
            lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if isinstance(path_or_buffer, str):
        from .serialize import atomic_write_text

        atomic_write_text(path_or_buffer, text)
    else:
        path_or_buffer.write(text)
    return text
