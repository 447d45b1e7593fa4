"""Experiment configuration: one declarative text file per run.

Grammar: one ``key = value`` pair per line; ``#`` starts a comment; blank
lines are ignored. Keys are dotted lowercase names (see KEYS). Unknown or
duplicate keys are configuration errors, as are cross-field inconsistencies
such as more classes than the codebook can hold.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .loss import LossWeights
from .netkit.models import DiscriminatorConfig, GeneratorConfig
from .netkit.train import TrainSettings


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    classes: int = 8
    codebook_k: int = 3
    data_dir: str = ""
    gen_depth: int = 3
    gen_base_channels: int = 16
    disc_layers: int = 3
    disc_base_channels: int = 16
    lambda1: float = 1000.0
    lambda2: float = 100.0
    lambda3: float = 250.0
    steps: int = 800
    batch_size: int = 4
    lr: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    log_every: int = 1
    metrics_every: int = 50

    def generator_config(self, head: str) -> GeneratorConfig:
        return GeneratorConfig(
            input_channels=3,
            depth=self.gen_depth,
            base_channels=self.gen_base_channels,
            code_bits=self.codebook_k,
            head=head,
        )

    def discriminator_config(self) -> DiscriminatorConfig:
        return DiscriminatorConfig(
            layers=self.disc_layers, base_channels=self.disc_base_channels
        )

    def weights(self) -> LossWeights:
        return LossWeights(self.lambda1, self.lambda2, self.lambda3)

    def settings(self) -> TrainSettings:
        return TrainSettings(
            batch_size=self.batch_size,
            lr=self.lr,
            beta1=self.beta1,
            beta2=self.beta2,
            log_every=self.log_every,
            metrics_every=self.metrics_every,
        )


# key -> (field name, parser)
KEYS = {
    "seed": ("seed", int),
    "classes": ("classes", int),
    "codebook.k": ("codebook_k", int),
    "data.dir": ("data_dir", str),
    "generator.depth": ("gen_depth", int),
    "generator.base_channels": ("gen_base_channels", int),
    "discriminator.layers": ("disc_layers", int),
    "discriminator.base_channels": ("disc_base_channels", int),
    "loss.lambda1": ("lambda1", float),
    "loss.lambda2": ("lambda2", float),
    "loss.lambda3": ("lambda3", float),
    "train.steps": ("steps", int),
    "train.batch_size": ("batch_size", int),
    "train.lr": ("lr", float),
    "train.beta1": ("beta1", float),
    "train.beta2": ("beta2", float),
    "train.log_every": ("log_every", int),
    "train.metrics_every": ("metrics_every", int),
}


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    values: dict[str, object] = {}
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        seen.add(key)
        field_name, parser = KEYS[key]
        try:
            values[field_name] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from exc
    cfg = ExperimentConfig(**values)
    validate_config(cfg, source=source)
    return cfg


def validate_config(cfg: ExperimentConfig, source: str = "<config>") -> None:
    """Cross-field consistency, checked before any run starts."""
    problems = []
    if not 0 <= cfg.codebook_k <= 16:
        problems.append(f"codebook.k={cfg.codebook_k} outside [0, 16]")
    elif cfg.classes > 2**cfg.codebook_k:
        problems.append(
            f"classes={cfg.classes} exceeds codebook capacity 2^k = {2 ** cfg.codebook_k}"
        )
    if cfg.classes < 2:
        problems.append(f"classes={cfg.classes} must be >= 2")
    if cfg.gen_depth < 1 or cfg.disc_layers < 1:
        problems.append("generator.depth and discriminator.layers must be >= 1")
    if cfg.gen_base_channels < 1 or cfg.disc_base_channels < 1:
        problems.append("base channel counts must be >= 1")
    if cfg.steps < 0:
        problems.append(f"train.steps={cfg.steps} must be >= 0")
    if cfg.batch_size < 1 or cfg.log_every < 1 or cfg.metrics_every < 1:
        problems.append("train.batch_size/log_every/metrics_every must be >= 1")
    if not (np.isfinite(cfg.lr) and cfg.lr > 0):
        problems.append(f"train.lr={cfg.lr} must be positive and finite")
    for name, value in (("beta1", cfg.beta1), ("beta2", cfg.beta2)):
        if not 0 <= value < 1:
            problems.append(f"train.{name}={value} outside [0, 1)")
    for name in ("lambda1", "lambda2", "lambda3"):
        value = getattr(cfg, name)
        if not np.isfinite(value) or value < 0:
            problems.append(f"loss.{name}={value} must be finite and >= 0")
    if problems:
        raise ConfigError(f"{source}: " + "; ".join(problems))


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, source=str(path))
