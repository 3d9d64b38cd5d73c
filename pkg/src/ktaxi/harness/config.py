"""Experiment configuration.

A config is one JSON object::

    {
      "metric": {"kind": "binary_hst", "height": 2, "alpha": 81},   # or a file path
      "algorithm": {"name": "flow", "params": {}},
      "source": {"kind": "adversary"},          # random | file | adversary | stress
      "initial": [0, 1],                        # optional; drawn per trial otherwise
      "k": 2,
      "trials": 200, "horizon": 10000, "seed": 7,
      "mode": "hard", "out": "runs/flow_k2.csv", "workers": 4
    }

``KTAXI_SEED`` and ``KTAXI_OUT`` override the file; command-line flags
override both.
"""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..algorithms import REGISTRY
from ..metric.io import load_metric, metric_from_dict
from ..metric.spaces import MetricError

SOURCE_KINDS = ("random", "file", "adversary", "stress")
ENV_SEED = "KTAXI_SEED"
ENV_OUT = "KTAXI_OUT"


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    metric: dict | str = field(default_factory=lambda: {"kind": "line"})
    algorithm: dict = field(default_factory=lambda: {"name": "biased_dc", "params": {}})
    source: dict = field(default_factory=lambda: {"kind": "random", "length": 30})
    initial: list | None = None
    k: int | None = None
    trials: int = 1
    horizon: int = 1000
    seed: int = 0
    mode: str = "hard"
    out: str | None = None
    workers: int = 1
    state_cap: int | None = None
    slack: float = 0.0
    base_dir: str = "."

    def validate(self) -> "ExperimentConfig":
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials!r}")
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ConfigError(f"horizon must be a positive integer, got {self.horizon!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.mode not in ("easy", "hard"):
            raise ConfigError(f"mode must be 'easy' or 'hard', got {self.mode!r}")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("workers must be a positive integer")
        name = self.algorithm.get("name") if isinstance(self.algorithm, dict) else None
        if name not in REGISTRY:
            raise ConfigError(f"unknown algorithm {name!r}; choose from {sorted(REGISTRY)}")
        kind = self.source.get("kind") if isinstance(self.source, dict) else None
        if kind not in SOURCE_KINDS:
            raise ConfigError(f"source kind must be one of {SOURCE_KINDS}, got {kind!r}")
        if kind == "file" and not self.resolve(self.source.get("path", "")).is_file():
            raise ConfigError(f"request file {self.source.get('path')!r} does not exist")
        if isinstance(self.metric, str) and not self.resolve(self.metric).is_file():
            raise ConfigError(f"metric file {self.metric!r} does not exist")
        if self.initial is None and self.k is None and kind in ("random", "file"):
            raise ConfigError("give either 'initial' or 'k'")
        try:
            self.build_metric()
        except MetricError as e:
            raise ConfigError(str(e)) from None
        return self

    def resolve(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def build_metric(self):
        if isinstance(self.metric, str):
            return load_metric(self.resolve(self.metric))
        return metric_from_dict(self.metric)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        return d


def load_config(path=None, *, seed=None, out=None, trials=None, mode=None,
                env=None, defaults: dict | None = None) -> ExperimentConfig:
    """Read ``path`` (or ``defaults``), then apply env and command-line overrides."""
    env = os.environ if env is None else env
    data: dict = dict(defaults or {})
    base = "."
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {path!r} does not exist")
        try:
            loaded = json.loads(p.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: not valid JSON ({e})") from None
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path}: top level must be an object")
        data.update(loaded)
        base = str(p.parent)
    known = set(ExperimentConfig.__dataclass_fields__) - {"base_dir"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    if ENV_SEED in env:
        try:
            data["seed"] = int(env[ENV_SEED])
        except ValueError:
            raise ConfigError(f"{ENV_SEED} must be an integer, got {env[ENV_SEED]!r}") from None
    if ENV_OUT in env:
        data["out"] = env[ENV_OUT]
    for key, val in (("seed", seed), ("out", out), ("trials", trials), ("mode", mode)):
        if val is not None:
            data[key] = val
    cfg = ExperimentConfig(**data, base_dir=base)
    return cfg.validate()
