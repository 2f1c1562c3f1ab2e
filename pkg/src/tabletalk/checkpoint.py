"""Checkpoint archives: weights + JSON-able metadata in one file."""

from __future__ import annotations

from dataclasses import asdict

import torch

from .config import PlacementTrainConfig, TrainConfig
from .grounding import GroundingConfig, JointModel
from .language import Vocabulary
from .placement import PlacementNet

SCHEMA = 1


class CheckpointError(Exception):
    pass


def save_grounder(path, model: JointModel, vocab: Vocabulary, train_cfg: TrainConfig | None = None,
                  curves=None) -> None:
    torch.save(
        {
            "schema": SCHEMA,
            "kind": "grounder",
            "state": model.state_dict(),
            "meta": {
                "vocab_hash": vocab.hash(),
                "vocab_size": len(vocab),
                "grounding": asdict(model.grounder.cfg),
                "train": asdict(train_cfg) if train_cfg else None,
                "curves": curves,
            },
        },
        path,
    )


def load_grounder(path, vocab: Vocabulary | None = None):
    blob = torch.load(path, map_location="cpu", weights_only=False)
    if blob.get("schema") != SCHEMA or blob.get("kind") != "grounder":
        raise CheckpointError(f"{path} is not a schema-{SCHEMA} grounder checkpoint")
    meta = blob["meta"]
    if vocab is not None and vocab.hash() != meta["vocab_hash"]:
        raise CheckpointError("vocabulary hash mismatch: checkpoint trained on a different vocab")
    model = JointModel(meta["vocab_size"], GroundingConfig(**meta["grounding"]))
    model.load_state_dict(blob["state"])
    model.eval()
    return model, meta


def save_placement(path, net: PlacementNet, cfg: PlacementTrainConfig | None = None, curves=None) -> None:
    torch.save(
        {
            "schema": SCHEMA,
            "kind": "placement",
            "state": net.state_dict(),
            "meta": {
                "base_channels": net.head.in_channels,
                "train": asdict(cfg) if cfg else None,
                "curves": curves,
            },
        },
        path,
    )


def load_placement(path):
    blob = torch.load(path, map_location="cpu", weights_only=False)
    if blob.get("schema") != SCHEMA or blob.get("kind") != "placement":
        raise CheckpointError(f"{path} is not a schema-{SCHEMA} placement checkpoint")
    net = PlacementNet(blob["meta"]["base_channels"])
    net.load_state_dict(blob["state"])
    net.eval()
    return net, blob["meta"]


def save_aux(path, net, agreement: float) -> None:
    torch.save(
        {
            "schema": SCHEMA,
            "kind": "aux-classifier",
            "state": net.state_dict(),
            "meta": {"oracle_agreement": agreement},
        },
        path,
    )


def load_aux(path):
    from .placement import AuxClassifierNet
    from .worldsim.render import N_CHANNELS

    blob = torch.load(path, map_location="cpu", weights_only=False)
    if blob.get("kind") != "aux-classifier":
        raise CheckpointError(f"{path} is not an aux-classifier checkpoint")
    net = AuxClassifierNet(N_CHANNELS + 4)
    net.load_state_dict(blob["state"])
    net.eval()
    return net, blob["meta"]
