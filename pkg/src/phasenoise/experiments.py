"""Experiment runners behind the command line interface.

Times are dimensionless (``lambda * t``) throughout; the physical coupling
only rescales the grid handed to the solvers.
"""
from __future__ import annotations

import datetime as _dt
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .channel import UnitalChannelParams
from .config import RunConfig
from .correlations import (
    CorrelationRecord,
    bell_diagonal_coeffs,
    concurrence_x,
    correlations_bell_diagonal,
    correlations_numerical,
    von_neumann_entropy,
)
from .errors import PhaseNoiseError
from .io import fmt, sha256_file, write_csv, write_kernels_csv
from .kernels import classify_regime, rates, solve_kernels
from .phase_noise import estimate_channel
from .two_qubit import EWLParams, evolve_elements, validate_two_qubit_state

log = logging.getLogger(__name__)

SIGMA_LEVEL = 3.0
NUMERICAL_FLOOR = 1e-9
REVIVAL_THRESHOLD = 0.05
ZERO_TOL = 1e-12


class NumericalFailure(PhaseNoiseError, RuntimeError):
    """A computed state or kernel violated a physical gate."""


def _tag(ratio):
    return f"{ratio:g}".replace(".", "p")


def _header(cfg, **extra):
    lines = [f"phasenoise {__version__}", f"config_sha256={cfg.digest()}"]
    lines += [f"{k}={fmt(v)}" for k, v in extra.items()]
    return lines


def kernels_for(cfg: RunConfig, ratio, t_grid=None):
    lam = cfg.model.lam
    lt = cfg.t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    k = solve_kernels(lam, ratio * lam, lt / lam)
    return k, lt


def run_kernels(cfg: RunConfig, out_dir=None):
    """One CSV per ratio with ``t,gamma_cap_1,gamma_cap_2,gamma12,gamma3,singular,regime``."""
    out_dir = Path(out_dir or cfg.out_dir)
    paths = []
    for ratio in cfg.model.d_over_lambda:
        k, lt = kernels_for(cfg, ratio)
        rt = rates(k)
        scaled = type(rt)(lt, rt.gamma12 / cfg.model.lam, rt.gamma3 / cfg.model.lam, rt.singular_flags)
        kt = type(k)(**{**k.__dict__, "t_grid": lt})
        regime = classify_regime(cfg.model.lam, ratio * cfg.model.lam).value
        path = out_dir / f"kernels_d{_tag(ratio)}.csv"
        write_kernels_csv(path, kt, scaled, _header(cfg, d_over_lambda=ratio), extra=("regime", [regime] * len(lt)))
        paths.append(path)
    return paths


def state_params(cfg: RunConfig):
    s = cfg.state
    return EWLParams(r=float(s.r), alpha=float(s.alpha), delta=float(s.delta), family=s.family)


def correlation_series(cfg: RunConfig, ratio, params=None, t_grid=None, numerical_discord=None):
    """Correlation records for the configured initial state in identical local environments."""
    params = params or state_params(cfg)
    if numerical_discord is None:
        numerical_discord = cfg.correlations.numerical_discord
    k, lt = kernels_for(cfg, ratio, t_grid)
    bell = params.is_bell_diagonal()
    records = []
    for t, g1, g2 in zip(lt, k.gamma_cap_1, k.gamma_cap_2):
        channel = UnitalChannelParams.phase_noisy(g1, g2)
        rho = evolve_elements(params, channel, channel)
        try:
            validate_two_qubit_state(rho, tol=1e-10)
        except PhaseNoiseError as exc:
            raise NumericalFailure(f"invalid state at lambda*t={t:g}, d/lambda={ratio:g}: {exc}") from exc
        if bell:
            total, classical, discord = correlations_bell_diagonal(bell_diagonal_coeffs(params, channel, channel))
        elif numerical_discord:
            total, classical, discord = correlations_numerical(rho)
        else:
            total = classical = discord = float("nan")
        records.append(CorrelationRecord(float(t), concurrence_x(rho), von_neumann_entropy(rho), total, classical, discord))
    return records


def run_correlations(cfg: RunConfig, out_dir=None):
    out_dir = Path(out_dir or cfg.out_dir)
    params = state_params(cfg)
    paths = []
    for ratio in cfg.model.d_over_lambda:
        recs = correlation_series(cfg, ratio, params)
        path = out_dir / f"correlations_d{_tag(ratio)}_{params.family.value}.csv"
        rows = ((r.t, r.concurrence, r.entropy, r.total, r.classical, r.discord) for r in recs)
        header = _header(cfg, d_over_lambda=ratio, r=params.r, alpha=params.alpha, delta=params.delta)
        write_csv(path, ["t", "C", "S", "total", "classical", "discord"], rows, header)
        paths.append(path)
    return paths


@dataclass(frozen=True)
class ValidationRow:
    d_over_lambda: float
    coefficient: str
    max_abs_diff: float
    max_stderr: float
    max_z: float
    status: str


def mc_times(cfg: RunConfig):
    """``n_times`` evenly spaced positive times on the MC step lattice, in ``lambda * t``."""
    dt = cfg.mc.dt
    n_steps = int(round(cfg.grid.t_max / dt))
    idx = np.rint(np.linspace(0, n_steps, cfg.mc.n_times + 1)[1:]).astype(int)
    return idx * dt


def compare_to_analytic(est, kernels, uniform):
    """Rows ``(name, estimate, stderr, reference)`` for the three coefficients."""
    g1 = kernels.gamma_cap_1
    g2 = kernels.gamma_cap_2
    mix = np.zeros_like(g2) if uniform else kernels.coherence_mixing
    return [
        ("lambda1", est.lambda1, est.stderr1, g2 + mix),
        ("lambda2", est.lambda2, est.stderr2, g2 - mix),
        ("lambda3", est.lambda3, est.stderr3, g1),
    ]


def classify_agreement(diff, stderr, resolution, sigma=SIGMA_LEVEL, floor=NUMERICAL_FLOOR):
    """``inconclusive`` when the band is wider than ``resolution``, else ``pass``/``fail``."""
    if sigma * np.max(stderr) > resolution:
        return "inconclusive"
    return "pass" if np.all(np.abs(diff) <= sigma * stderr + floor) else "fail"


def validate_mc(cfg: RunConfig, out_dir=None, write=True):
    """Monte Carlo channel estimates against the moment-hierarchy kernels."""
    lam = cfg.model.lam
    uniform = cfg.mc.initial_phase == "uniform"
    lt = mc_times(cfg)
    rows = []
    for ratio in cfg.model.d_over_lambda:
        est = estimate_channel(
            lam,
            ratio * lam,
            lt / lam,
            cfg.mc.n_traj,
            cfg.mc.seed,
            dt=cfg.mc.dt / lam,
            initial_phase="uniform" if uniform else 0.0,
            workers=cfg.mc.workers,
        )
        k, _ = kernels_for(cfg, ratio, np.concatenate([[0.0], lt]))
        ref = type(k)(**{**k.__dict__, "gamma_cap_1": k.gamma_cap_1[1:], "gamma_cap_2": k.gamma_cap_2[1:], "coherence_mixing": k.coherence_mixing[1:]})
        for name, value, se, target in compare_to_analytic(est, ref, uniform):
            diff = value - target
            z = np.abs(diff) / np.maximum(se, np.finfo(float).tiny)
            status = classify_agreement(diff, se, cfg.mc.resolution)
            rows.append(ValidationRow(ratio, name, float(np.abs(diff).max()), float(se.max()), float(z.max()), status))
    if write:
        out_dir = Path(out_dir or cfg.out_dir)
        write_csv(
            out_dir / "validate_mc.csv",
            ["d_over_lambda", "coefficient", "max_abs_diff", "max_stderr", "max_z", "status"],
            ((r.d_over_lambda, r.coefficient, r.max_abs_diff, r.max_stderr, r.max_z, r.status) for r in rows),
            _header(cfg, n_traj=cfg.mc.n_traj, initial_phase=cfg.mc.initial_phase),
        )
    return rows


def overall_status(rows):
    statuses = {r.status for r in rows}
    if "fail" in statuses:
        return "fail"
    if "inconclusive" in statuses:
        return "inconclusive"
    return "pass"


def revival_count(values, threshold=REVIVAL_THRESHOLD, zero_tol=ZERO_TOL):
    """Number of episodes where a quantity sits at zero and then exceeds ``threshold``."""
    count = 0
    was_zero = False
    for v in values:
        if v <= zero_tol:
            was_zero = True
        elif was_zero and v > threshold:
            count += 1
            was_zero = False
    return count


def first_time(times, mask):
    mask = np.asarray(mask)
    return float(np.asarray(times)[np.argmax(mask)]) if mask.any() else float("nan")


def sweep(cfg: RunConfig, out_dir=None):
    """Summary row per ratio: regime, first concurrence zero, revival count, discord half-life."""
    out_dir = Path(out_dir or cfg.out_dir)
    rows = []
    for ratio in cfg.model.d_over_lambda:
        recs = correlation_series(cfg, ratio)
        t = np.array([r.t for r in recs])
        c = np.array([r.concurrence for r in recs])
        disc = np.array([r.discord for r in recs])
        regime = classify_regime(cfg.model.lam, ratio * cfg.model.lam).value
        half = first_time(t, disc <= disc[0] / 2) if np.isfinite(disc[0]) else float("nan")
        rows.append((ratio, regime, first_time(t, c <= ZERO_TOL), revival_count(c), half))
    path = write_csv(
        out_dir / "sweep.csv",
        ["d_over_lambda", "regime", "first_concurrence_zero", "revival_count", "discord_half_life"],
        rows,
        _header(cfg),
    )
    return path, rows


def write_manifest(cfg: RunConfig, command, outputs, out_dir=None, started=None):
    out_dir = Path(out_dir or cfg.out_dir)
    now = _dt.datetime.now(_dt.timezone.utc).isoformat()
    manifest = {
        "tool": "phasenoise",
        "version": __version__,
        "command": command,
        "config": cfg.to_dict(),
        "config_sha256": cfg.digest(),
        "started": started or now,
        "finished": now,
        "outputs": {Path(p).name: sha256_file(p) for p in outputs},
    }
    path = out_dir / "manifest.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
