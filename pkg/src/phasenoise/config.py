"""Run configuration loaded from a YAML file with flat per-module sections.

Example::

    model:
      lambda: 1.0
      d_over_lambda: [0.1, 5.0]
    grid:
      t_max: 10.0        # in units of 1/lambda
      n_points: 1001
    state:
      r: 1.0
      alpha: 0.7071067811865476
      delta: 0.0
      family: phi        # phi | psi
    mc:
      n_traj: 10000
      dt: 0.005          # in units of 1/lambda
      seed: 0
      initial_phase: fixed   # fixed | uniform
      n_times: 20
      resolution: 0.05
      workers: 1
    correlations:
      numerical_discord: false
    output:
      dir: results
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import PhaseNoiseError


class ConfigError(PhaseNoiseError, ValueError):
    pass


@dataclass
class ModelConfig:
    lam: float = 1.0
    d_over_lambda: list = field(default_factory=lambda: [0.1, 5.0])


@dataclass
class GridConfig:
    t_max: float = 10.0
    n_points: int = 1001


@dataclass
class StateConfig:
    r: float = 1.0
    alpha: float = float(1 / np.sqrt(2))
    delta: float = 0.0
    family: str = "phi"


@dataclass
class MCConfig:
    n_traj: int = 10000
    dt: float = 0.005
    seed: int = 0
    initial_phase: str = "fixed"
    n_times: int = 20
    resolution: float = 0.05
    workers: int = 1


@dataclass
class CorrelationsConfig:
    numerical_discord: bool = False


@dataclass
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    state: StateConfig = field(default_factory=StateConfig)
    mc: MCConfig = field(default_factory=MCConfig)
    correlations: CorrelationsConfig = field(default_factory=CorrelationsConfig)
    out_dir: str = "results"

    def validate(self):
        m, g, s, mc = self.model, self.grid, self.state, self.mc
        if not m.lam > 0:
            raise ConfigError("model.lambda must be positive")
        if not m.d_over_lambda:
            raise ConfigError("model.d_over_lambda must list at least one ratio")
        if any(not float(x) >= 0 for x in m.d_over_lambda):
            raise ConfigError("model.d_over_lambda entries must be non-negative")
        if not g.t_max > 0:
            raise ConfigError("grid.t_max must be positive")
        if int(g.n_points) < 2:
            raise ConfigError("grid.n_points must be at least 2")
        if not 0 <= s.r <= 1 or not 0 <= s.alpha <= 1:
            raise ConfigError("state.r and state.alpha must lie in [0, 1]")
        if s.family not in ("phi", "psi"):
            raise ConfigError("state.family must be 'phi' or 'psi'")
        if int(mc.n_traj) < 1 or not mc.dt > 0 or int(mc.n_times) < 1:
            raise ConfigError("mc.n_traj, mc.dt and mc.n_times must be positive")
        if mc.initial_phase not in ("fixed", "uniform"):
            raise ConfigError("mc.initial_phase must be 'fixed' or 'uniform'")
        return self

    def t_grid(self):
        """Dimensionless grid of ``lambda * t`` values."""
        return np.linspace(0.0, self.grid.t_max, int(self.grid.n_points))

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["model"]["lambda"] = d["model"].pop("lam")
        d["output"] = {"dir": d.pop("out_dir")}
        return d

    def digest(self):
        """Hash of every setting that affects computed values; the output directory is excluded."""
        d = self.to_dict()
        d.pop("output")
        blob = json.dumps(d, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


_SECTIONS = {
    "model": ModelConfig,
    "grid": GridConfig,
    "state": StateConfig,
    "mc": MCConfig,
    "correlations": CorrelationsConfig,
}


def config_from_dict(raw) -> RunConfig:
    raw = dict(raw or {})
    cfg = RunConfig()
    for name, raw_section in raw.items():
        if name == "output":
            unknown = set(raw_section or {}) - {"dir"}
            if unknown:
                raise ConfigError(f"unknown keys in [output]: {sorted(unknown)}")
            cfg.out_dir = str((raw_section or {}).get("dir", cfg.out_dir))
            continue
        if name not in _SECTIONS:
            raise ConfigError(f"unknown config section {name!r}")
        section = getattr(cfg, name)
        names = {f.name for f in dataclasses.fields(section)}
        for key, value in (raw_section or {}).items():
            attr = "lam" if (name == "model" and key == "lambda") else key
            if attr not in names:
                raise ConfigError(f"unknown key {key!r} in [{name}]")
            setattr(section, attr, value)
    cfg.model.d_over_lambda = [float(x) for x in cfg.model.d_over_lambda]
    return cfg.validate()


def load_config(path) -> RunConfig:
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if raw is not None and not isinstance(raw, dict):
        raise ConfigError("config file must hold a mapping")
    return config_from_dict(raw)
