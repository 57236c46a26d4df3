"""Training/experiment configuration: dataclass, file parsing, env overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields

ENV_PREFIX = "OCTEMBED_"


@dataclass
class TrainConfig:
    dim: int = 16
    p: float = 1.0
    margin: float = 6.0
    negatives: int = 8
    learning_rate: float = 1e-2
    batch_size: int = 128
    epochs: int = 200
    validation_period: int = 10
    seed: int = 0
    variant: str = "uvxy"
    attention: bool = False
    adversarial_temperature: float = 1.0
    loss: str = "nssa"

    def __post_init__(self):
        for name in ("dim", "negatives", "batch_size", "epochs",
                     "validation_period"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("p", "margin", "learning_rate",
                     "adversarial_temperature"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class ExperimentConfig:
    train: TrainConfig = field(default_factory=TrainConfig)
    train_path: str = ""
    valid_path: str = ""
    test_path: str = ""
    output_dir: str = "."


def _coerce(kind, raw: str):
    if kind is bool:
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    return kind(raw)


def parse_config_text(lines, env=None) -> ExperimentConfig:
    """Parse ``key = value`` lines ('#' starts a comment).

    Environment variables named OCTEMBED_<KEY> override file values.
    Unknown keys are rejected.
    """
    env = os.environ if env is None else env
    values = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()

    train_fields = {f.name: f.type for f in fields(TrainConfig)}
    path_keys = ("train_path", "valid_path", "test_path", "output_dir")
    for key in path_keys + tuple(train_fields):
        override = env.get(ENV_PREFIX + key.upper())
        if override is not None:
            values[key] = override

    type_of = {"dim": int, "negatives": int, "batch_size": int, "epochs": int,
               "validation_period": int, "seed": int,
               "p": float, "margin": float, "learning_rate": float,
               "adversarial_temperature": float,
               "variant": str, "loss": str, "attention": bool}
    train_kwargs, paths = {}, {}
    for key, value in values.items():
        if key in type_of:
            train_kwargs[key] = _coerce(type_of[key], value)
        elif key in path_keys:
            paths[key] = value
        else:
            raise ValueError(f"unknown configuration key: {key!r}")
    return ExperimentConfig(train=TrainConfig(**train_kwargs), **paths)


def load_config(path, env=None) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh, env=env)
