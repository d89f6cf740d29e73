"""Plain CSV writers for kernels, states, trajectories and experiment tables."""
from __future__ import annotations

import csv
import hashlib
from pathlib import Path

import numpy as np


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "nan" if np.isnan(x) else format(float(x), ".12g")
    return str(x)


def write_csv(path, columns, rows, header_lines=()):
    """Write ``rows`` under ``columns``; ``header_lines`` become ``#`` comments."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def read_csv(path):
    """Return ``(columns, rows)`` skipping ``#`` comment lines; values stay strings."""
    with Path(path).open() as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    columns = next(reader)
    return columns, list(reader)


def sha256_file(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


KERNEL_COLUMNS = ["t", "gamma_cap_1", "gamma_cap_2", "gamma12", "gamma3", "singular"]


def write_kernels_csv(path, kernels, rates, header_lines=(), extra=None):
    """Kernel dump; ``extra`` is an optional ``(name, values)`` column appended at the end."""
    columns = list(KERNEL_COLUMNS)
    cols = [kernels.t_grid, kernels.gamma_cap_1, kernels.gamma_cap_2, rates.gamma12, rates.gamma3, rates.singular_flags]
    if extra is not None:
        columns.append(extra[0])
        cols.append(extra[1])
    return write_csv(path, columns, zip(*cols), header_lines)


def state_columns():
    return [f"{part}_{i}{j}" for i in range(1, 5) for j in range(1, 5) for part in ("re", "im")]


def write_states_csv(path, states, header_lines=()):
    """Each row holds one 4x4 state row-major as ``re_ij, im_ij`` pairs."""
    rows = []
    for rho in states:
        flat = np.asarray(rho, dtype=complex).ravel()
        rows.append([v for z in flat for v in (z.real, z.imag)])
    return write_csv(path, state_columns(), rows, header_lines)


def write_trajectory_csv(path, traj, states, header_lines=()):
    states = np.asarray(states)
    rows = (
        (k, traj.phases[k], states[k, 0, 0].real, states[k, 0, 1].real, states[k, 0, 1].imag)
        for k in range(len(traj.phases))
    )
    return write_csv(path, ["step", "phi", "re_rho11", "re_rho10", "im_rho10"], rows, header_lines)
