"""Monte Carlo ground truth for a qubit driven by a phase-diffusing laser.

Each trajectory samples a Wiener phase on a uniform grid, holds it constant
over every step and applies the exact SU(2) propagator of
``H = lam (cos(phi) s_x + sin(phi) s_y)``.  Averaging over trajectories
gives an empirical estimate of the single-qubit channel.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import validate_qubit_state
from .errors import ParameterError

CHUNK_SIZE = 1000
MIN_TRAJECTORIES = 100
GRID_TOL = 1e-9


@dataclass(frozen=True)
class PhaseTrajectory:
    dt: float
    phases: np.ndarray
    seed: int

    @property
    def n_steps(self):
        return len(self.phases) - 1

    @property
    def times(self):
        return self.dt * np.arange(len(self.phases))


@dataclass(frozen=True)
class EnsembleEstimate:
    """Channel coefficients estimated from ``n_traj`` trajectories.

    ``lambda1`` and ``lambda2`` are the raw Bloch-axis factors along ``x`` and
    ``y``; ``gamma2`` is their mean, the phase-covariant coherence factor, and
    ``mixing`` half their difference.  ``im_plus`` is ``Im rho10(t)`` for the
    ``(|0>+|1>)/sqrt2`` probe.
    """

    t_grid: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray
    lambda3: np.ndarray
    stderr1: np.ndarray
    stderr2: np.ndarray
    stderr3: np.ndarray
    gamma2: np.ndarray
    stderr_gamma2: np.ndarray
    mixing: np.ndarray
    stderr_mixing: np.ndarray
    im_plus: np.ndarray
    stderr_im_plus: np.ndarray
    n_traj: int
    initial_phase: str


def trajectory_rng(master_seed, index):
    """Independent generator for trajectory ``index`` of a run seeded by ``master_seed``."""
    return np.random.default_rng(np.random.SeedSequence(int(master_seed), spawn_key=(int(index),)))


def _draw_phases(rng, d, dt, n_steps, initial_phase):
    if initial_phase == "uniform":
        phi0 = rng.uniform(0.0, 2 * np.pi)
    else:
        phi0 = float(initial_phase)
    phases = np.empty(n_steps + 1)
    phases[0] = phi0
    if d == 0:
        phases[1:] = phi0
    else:
        phases[1:] = phi0 + np.cumsum(rng.normal(0.0, np.sqrt(2 * d * dt), n_steps))
    return phases


def sample_phase_trajectory(d, dt, n_steps, seed, initial_phase=0.0) -> PhaseTrajectory:
    """Wiener phase path with increments of variance ``2 d dt``.

    ``initial_phase`` is a number or ``"uniform"`` to draw ``phi(0)`` from
    ``[0, 2 pi)`` with the same generator.
    """
    if not dt > 0:
        raise ParameterError(f"dt must be positive, got {dt}")
    if not d >= 0:
        raise ParameterError(f"diffusion rate must be non-negative, got {d}")
    if int(n_steps) < 1:
        raise ParameterError(f"n_steps must be at least 1, got {n_steps}")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    return PhaseTrajectory(float(dt), _draw_phases(rng, d, dt, int(n_steps), initial_phase), int(seed))


def step_unitary(lam, dt, phi):
    """``exp(-i H dt)`` for a constant phase: rotation by ``2 lam dt`` about ``(cos phi, sin phi, 0)``."""
    c, s = np.cos(lam * dt), np.sin(lam * dt)
    return np.array(
        [[c, -1j * s * np.exp(-1j * phi)], [-1j * s * np.exp(1j * phi), c]], dtype=complex
    )


def propagate_trajectory(state0, lam, traj: PhaseTrajectory) -> np.ndarray:
    """States at every grid point of ``traj``; shape ``(n_steps + 1, 2, 2)``."""
    rho = validate_qubit_state(state0)
    if len(traj.phases) < 1:
        raise ParameterError("empty trajectory")
    out = np.empty((len(traj.phases), 2, 2), dtype=complex)
    out[0] = rho
    for k, phi in enumerate(traj.phases[:-1]):
        u = step_unitary(lam, traj.dt, phi)
        rho = u @ rho @ u.conj().T
        out[k + 1] = rho
    return out


def _cumulative_unitaries(phases, lam, dt, record):
    """Propagators at the step indices ``record`` for a batch of phase paths.

    SU(2) elements are carried as ``(a, b)`` with ``U = [[a, -conj(b)], [b, conj(a)]]``.
    Returns an array of shape ``(n_paths, len(record), 2, 2)``.
    """
    n_paths = phases.shape[0]
    c, s = np.cos(lam * dt), np.sin(lam * dt)
    a = np.ones(n_paths, dtype=complex)
    b = np.zeros(n_paths, dtype=complex)
    out = np.empty((n_paths, len(record), 2, 2), dtype=complex)
    slot = {int(k): j for j, k in enumerate(record)}
    last = int(max(record))
    for k in range(last + 1):
        if k in slot:
            j = slot[k]
            out[:, j, 0, 0] = a
            out[:, j, 0, 1] = -np.conj(b)
            out[:, j, 1, 0] = b
            out[:, j, 1, 1] = np.conj(a)
        if k == last:
            break
        bk = -1j * s * np.exp(1j * phases[:, k])
        a, b = c * a - np.conj(bk) * b, bk * a + c * b
    return out


def _grid_steps(t_grid, dt):
    t = np.asarray(t_grid, dtype=float)
    steps = np.rint(t / dt).astype(int)
    if np.any(np.abs(steps * dt - t) > GRID_TOL * np.maximum(1.0, t)) or np.any(steps < 0):
        raise ParameterError("every grid time must be a non-negative multiple of dt")
    return steps


def _merge(acc, mean, m2, n):
    """Chan's pairwise update of running (count, mean, M2)."""
    if acc is None:
        return n, mean, m2
    na, ma, m2a = acc
    tot = na + n
    delta = mean - ma
    return tot, ma + delta * n / tot, m2a + m2 + delta * delta * na * n / tot


def ensemble_statistics(features, lam, d, t_grid, n_traj, seed, dt=0.005, initial_phase=0.0, workers=1):
    """Mean and standard error of per-trajectory features.

    ``features`` maps a propagator batch of shape ``(n, n_t, 2, 2)`` to a dict of
    real arrays of shape ``(n, n_t)``.  Trajectories are processed in fixed-size
    chunks whose statistics are merged in index order, so the result does not
    depend on ``workers``.
    """
    if not dt > 0:
        raise ParameterError(f"dt must be positive, got {dt}")
    if not d >= 0:
        raise ParameterError(f"diffusion rate must be non-negative, got {d}")
    steps = _grid_steps(t_grid, dt)
    n_steps = max(int(steps.max()), 1)

    def run_chunk(start):
        stop = min(start + CHUNK_SIZE, n_traj)
        phases = np.stack(
            [_draw_phases(trajectory_rng(seed, i), d, dt, n_steps, initial_phase) for i in range(start, stop)]
        )
        unitaries = _cumulative_unitaries(phases, lam, dt, steps)
        return {k: (v.mean(axis=0), ((v - v.mean(axis=0)) ** 2).sum(axis=0), v.shape[0]) for k, v in features(unitaries).items()}

    starts = range(0, n_traj, CHUNK_SIZE)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(run_chunk, starts))
    else:
        chunks = [run_chunk(s) for s in starts]

    acc = {}
    for chunk in chunks:
        for key, (mean, m2, n) in chunk.items():
            acc[key] = _merge(acc.get(key), mean, m2, n)
    stats = {}
    for key, (n, mean, m2) in acc.items():
        var = m2 / (n - 1) if n > 1 else np.zeros_like(m2)
        stats[key] = (mean, np.sqrt(var / n))
    return stats


def _probe_features(unitaries):
    u00, u01 = unitaries[..., 0, 0], unitaries[..., 0, 1]
    u10, u11 = unitaries[..., 1, 0], unitaries[..., 1, 1]
    rho11 = np.abs(u00) ** 2
    # twice rho10 for the (|1>+|0>)/sqrt2 and (i|1>+|0>)/sqrt2 probes
    plus = (u00 + u01) * np.conj(u10 + u11)
    plus_i = (1j * u00 + u01) * np.conj(1j * u10 + u11)
    x1 = plus.real
    x2 = plus_i.imag
    return {
        "lambda1": x1,
        "lambda2": x2,
        "lambda3": 2 * rho11 - 1,
        "gamma2": (x1 + x2) / 2,
        "mixing": (x1 - x2) / 2,
        "im_plus": plus.imag / 2,
    }


def estimate_channel(lam, d, t_grid, n_traj, seed, dt=0.005, initial_phase=0.0, workers=1) -> EnsembleEstimate:
    """Empirical channel coefficients from three probe states.

    ``|1><1|`` gives ``lambda3`` through ``rho11 = (1 + lambda3)/2``; the
    ``(|0>+|1>)/sqrt2`` and ``(|0>+i|1>)/sqrt2`` probes give ``lambda1`` and
    ``lambda2`` through the real and imaginary parts of ``rho10``.

    Parameters
    ----------
    lam, d : float
        Coupling and phase diffusion rate.
    t_grid : array_like
        Output times, each a multiple of ``dt``.
    n_traj : int
        Ensemble size, at least 100.
    seed : int
        Master seed; trajectory ``i`` uses ``trajectory_rng(seed, i)``.
    initial_phase : float or "uniform"
        Deterministic ``phi(0)`` or a uniform draw per trajectory.
    """
    if int(n_traj) < MIN_TRAJECTORIES:
        raise ParameterError(f"n_traj must be at least {MIN_TRAJECTORIES}, got {n_traj}")
    stats = ensemble_statistics(_probe_features, lam, d, t_grid, int(n_traj), seed, dt, initial_phase, workers)
    mode = "uniform" if initial_phase == "uniform" else f"{float(initial_phase):g}"
    return EnsembleEstimate(
        t_grid=np.asarray(t_grid, dtype=float),
        lambda1=stats["lambda1"][0],
        lambda2=stats["lambda2"][0],
        lambda3=stats["lambda3"][0],
        stderr1=stats["lambda1"][1],
        stderr2=stats["lambda2"][1],
        stderr3=stats["lambda3"][1],
        gamma2=stats["gamma2"][0],
        stderr_gamma2=stats["gamma2"][1],
        mixing=stats["mixing"][0],
        stderr_mixing=stats["mixing"][1],
        im_plus=stats["im_plus"][0],
        stderr_im_plus=stats["im_plus"][1],
        n_traj=int(n_traj),
        initial_phase=mode,
    )


def average_state(state0, lam, d, t_grid, n_traj, seed, dt=0.005, initial_phase=0.0, workers=1):
    """Ensemble-averaged density matrices for an arbitrary input; shape ``(n_t, 2, 2)``."""
    rho0 = validate_qubit_state(state0)

    def features(unitaries):
        rho = unitaries @ rho0 @ np.conj(np.swapaxes(unitaries, -1, -2))
        return {f"{i}{j}{part}": getattr(rho[..., i, j], part) for i in range(2) for j in range(2) for part in ("real", "imag")}

    stats = ensemble_statistics(features, lam, d, t_grid, int(n_traj), seed, dt, initial_phase, workers)
    out = np.empty((len(np.atleast_1d(t_grid)), 2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            out[:, i, j] = stats[f"{i}{j}real"][0] + 1j * stats[f"{i}{j}imag"][0]
    return out
