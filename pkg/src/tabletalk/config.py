"""Training and application configuration."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path


@dataclass
class TrainConfig:
    # margins and loss weights from the source training setup
    m1: float = 0.1
    m2: float = 1.0
    lambda1: float = 1.0
    lambda2: float = 1.0
    lambda3: float = 0.1
    lambda_attr: float = 1.0
    learning_rate: float = 0.0004
    batch_size: int = 64
    epochs: int = 40
    seed: int = 0
    joint: bool = False  # add generation losses (L2 + L3) to the objective
    joint_warmup_epochs: int = 10  # comprehension-only epochs before L2/L3 kick in
    jitter: int = 1  # candidate bbox jitter in cells during train/eval
    num_threads: int = 2

    def validate(self):
        if self.m1 <= 0 or self.m2 <= 0:
            raise ValueError("margins must be positive")
        for lam in (self.lambda1, self.lambda2, self.lambda3, self.lambda_attr):
            if lam < 0:
                raise ValueError("loss weights must be non-negative")


@dataclass
class PlacementTrainConfig:
    learning_rate: float = 0.003
    batch_size: int = 8
    epochs: int = 20
    n_scenes: int = 2000
    n_val_scenes: int = 200
    samples_per_channel: int = 24  # K
    epsilon: float = 0.1  # uniform exploration mixed into self-sampling
    classifier_mode: str = "oracle"  # oracle | learned
    seed: int = 0
    num_threads: int = 2
    base_channels: int = 12


@dataclass
class AppConfig:
    grid: int = 64
    n_pick: int = 5
    n_place: int = 2
    grasp_success_prob: float = 1.0
    place_success_prob: float = 1.0
    train: TrainConfig = field(default_factory=TrainConfig)
    placement: PlacementTrainConfig = field(default_factory=PlacementTrainConfig)
    grounder_checkpoint: str = ""
    placement_checkpoint: str = ""
    host: str = "127.0.0.1"
    port: int = 8008
    data_dir: str = "data"
    session_ttl_seconds: int = 3600

    @classmethod
    def from_file(cls, path) -> "AppConfig":
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "AppConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(raw)
        if "train" in kwargs:
            kwargs["train"] = TrainConfig(**kwargs["train"])
        if "placement" in kwargs:
            kwargs["placement"] = PlacementTrainConfig(**kwargs["placement"])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return asdict(self)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))
