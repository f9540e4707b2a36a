"""Run configuration: one flat JSON object with dotted keys.

Values are resolved in three layers, later ones winning: the preset
(``reference`` or ``toy``), the ``--config`` file, then command-line flags.
Keys are grouped as ``train.*``, ``schedule.*``, ``weights.*``,
``canny.*`` and ``paths.*``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .edgemap import CannyParams
from .lossbank import LossWeights
from .toynet.train import TrainConfig, toy_config

PRESETS = ("reference", "toy")

_TRAIN_KEYS = ("seed", "iters_per_step", "batch_size", "lr_initial", "lr_fine", "fine_tune_at",
               "d_lr_ratio", "loss_variant", "image_size", "gen_widths", "n_res", "disc_widths",
               "eval_every")
_SCHEDULE_KEYS = {"total_steps": "total_steps", "start_fraction": "start_fraction",
                  "end_fraction": "end_fraction"}
_TUPLE_KEYS = ("image_size", "gen_widths", "disc_widths")


@dataclass
class Paths:
    dataset_dir: str | None = None
    out_dir: str | None = None
    checkpoint: str | None = None
    brisque_model: str | None = None


@dataclass
class RunConfig:
    preset: str = "toy"
    train: TrainConfig = field(default_factory=toy_config)
    paths: Paths = field(default_factory=Paths)

    @classmethod
    def from_preset(cls, preset: str = "toy") -> "RunConfig":
        if preset not in PRESETS:
            raise ValueError(f"unknown preset {preset!r}; choose from {PRESETS}")
        train = toy_config() if preset == "toy" else TrainConfig()
        return cls(preset, train, Paths())

    def to_flat(self) -> dict:
        t = self.train
        d: dict = {"preset": self.preset}
        for k in _TRAIN_KEYS:
            v = getattr(t, k)
            d[f"train.{k}"] = list(v) if k in _TUPLE_KEYS else v
        for k, attr in _SCHEDULE_KEYS.items():
            d[f"schedule.{k}"] = getattr(t, attr)
        for f in fields(LossWeights):
            d[f"weights.{f.name}"] = getattr(t.weights, f.name)
        for f in fields(CannyParams):
            d[f"canny.{f.name}"] = getattr(t.canny, f.name)
        for f in fields(Paths):
            d[f"paths.{f.name}"] = getattr(self.paths, f.name)
        return d

    @classmethod
    def from_flat(cls, d: dict) -> "RunConfig":
        cfg = cls.from_preset(d.get("preset", "toy"))
        rest = {k: v for k, v in d.items() if k != "preset"}
        return cfg.updated(rest)

    def updated(self, overrides: dict) -> "RunConfig":
        """Copy with dotted-key *overrides* applied; unknown keys raise."""
        train_kw, weight_kw, canny_kw, path_kw = {}, {}, {}, {}
        for key, value in overrides.items():
            group, _, name = key.partition(".")
            if group == "train" and name in _TRAIN_KEYS:
                train_kw[name] = tuple(value) if name in _TUPLE_KEYS else value
            elif group == "schedule" and name in _SCHEDULE_KEYS:
                train_kw[_SCHEDULE_KEYS[name]] = value
            elif group == "weights" and name in {f.name for f in fields(LossWeights)}:
                weight_kw[name] = float(value)
            elif group == "canny" and name in {f.name for f in fields(CannyParams)}:
                canny_kw[name] = float(value)
            elif group == "paths" and name in {f.name for f in fields(Paths)}:
                path_kw[name] = None if value is None else str(value)
            else:
                raise ValueError(f"unknown config key {key!r}")
        t = self.train
        if weight_kw:
            train_kw["weights"] = replace(t.weights, **weight_kw)
        if canny_kw:
            train_kw["canny"] = replace(t.canny, **canny_kw)
        return RunConfig(self.preset, replace(t, **train_kw), replace(self.paths, **path_kw))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_flat(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "RunConfig":
        d = json.loads(Path(path).read_text())
        if not isinstance(d, dict):
            raise ValueError(f"{path}: config must be a JSON object")
        return cls.from_flat(d)

    def check_paths(self, *names: str) -> None:
        """Raise ``FileNotFoundError`` if any named input path is missing."""
        for name in names:
            p = getattr(self.paths, name)
            if p is not None and not Path(p).exists():
                raise FileNotFoundError(f"paths.{name}: {p} does not exist")
