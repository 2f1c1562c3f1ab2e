"""Labeled grounding datasets: synthesis, splits, JSON-lines persistence."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..seeding import derive_seed
from ..worldsim import Scene, SceneConfig, generate_scene
from .grammar import NoDiscriminativeExpression, generate_expression
from .vocab import Vocabulary

CLAUSE_KINDS = ("attribute", "location", "relational")


class DatasetBuildError(Exception):
    pass


@dataclass
class DatasetConfig:
    n_samples: int = 5000
    mixture: tuple = (0.5, 0.3, 0.2)  # attribute, location, relational
    ambiguity_rate: float = 0.0
    n_pick_range: tuple = (4, 7)
    exprs_per_scene: int = 3
    grid: int = 64
    cluster: bool = True
    splits: tuple = (0.8, 0.1, 0.1)  # train, val, test
    scene_attempts: int = 50

    def validate(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if abs(sum(self.mixture) - 1.0) > 1e-9:
            raise ValueError("mixture must sum to 1")
        if self.exprs_per_scene < 2:
            raise ValueError("need >= 2 expressions per scene for in-scene negatives")


@dataclass
class Record:
    scene: Scene
    tokens: list
    text: str
    target_id: str
    clause_kind: str
    is_ambiguous: bool
    split: str
    record_seed: int

    def to_dict(self) -> dict:
        return {
            "scene": self.scene.to_dict(),
            "tokens": self.tokens,
            "text": self.text,
            "target_id": self.target_id,
            "clause_kind": self.clause_kind,
            "is_ambiguous": self.is_ambiguous,
            "split": self.split,
            "record_seed": self.record_seed,
        }

    @classmethod
    def from_dict(cls, d: dict, scene: Optional[Scene] = None) -> "Record":
        return cls(
            scene=scene if scene is not None else Scene.from_dict(d["scene"]),
            tokens=list(d["tokens"]),
            text=d["text"],
            target_id=d["target_id"],
            clause_kind=d["clause_kind"],
            is_ambiguous=d["is_ambiguous"],
            split=d["split"],
            record_seed=d["record_seed"],
        )


@dataclass
class GroundingDataset:
    vocab: Vocabulary
    records: list = field(default_factory=list)

    def split(self, name: str) -> list:
        return [r for r in self.records if r.split == name]

    def save(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        self.vocab.save(out / "vocab.json")
        with open(out / "records.jsonl", "w", encoding="utf-8") as f:
            for r in self.records:
                f.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")

    @classmethod
    def load(cls, in_dir) -> "GroundingDataset":
        path = Path(in_dir)
        vocab = Vocabulary.load(path / "vocab.json")
        records = []
        scene_cache = {}
        with open(path / "records.jsonl", encoding="utf-8") as f:
            for line in f:
                d = json.loads(line)
                sid = d["scene"].get("scene_id")
                if sid and sid in scene_cache:
                    records.append(Record.from_dict(d, scene=scene_cache[sid]))
                else:
                    rec = Record.from_dict(d)
                    if sid:
                        scene_cache[sid] = rec.scene
                    records.append(rec)
        return cls(vocab=vocab, records=records)


def _pick_split(u: float, fractions) -> str:
    if u < fractions[0]:
        return "train"
    if u < fractions[0] + fractions[1]:
        return "val"
    return "test"


def _build_scene_records(cfg, vocab, slots, scene_counter, split, seed):
    """Try scenes until one supports every (kind, ambiguous) slot."""
    for attempt in range(cfg.scene_attempts):
        scene_seed = derive_seed(seed, "scene", scene_counter, attempt)
        rng = np.random.default_rng(np.random.PCG64(scene_seed))
        n_pick = int(rng.integers(cfg.n_pick_range[0], cfg.n_pick_range[1] + 1))
        scene_cfg = SceneConfig(
            grid_h=cfg.grid,
            grid_w=cfg.grid,
            n_pick=max(n_pick, len(slots)),
            n_place=0,
            ambiguity=any(amb for _, amb in slots),
            cluster=cfg.cluster,
        )
        scene = generate_scene(scene_cfg, scene_seed)
        scene.scene_id = f"{split}-{scene_counter}"
        objects = scene.objects_on("pick")
        target_order = [objects[i].id for i in rng.permutation(len(objects))]
        records = []
        used = set()
        ok = True
        for slot_idx, (kind, amb) in enumerate(slots):
            sample = None
            for tid in target_order:
                if tid in used:
                    continue
                try:
                    sample = generate_expression(
                        scene, tid, kind, amb,
                        seed=derive_seed(scene_seed, "slot", slot_idx),
                        vocab=vocab,
                    )
                    break
                except NoDiscriminativeExpression:
                    continue
            if sample is None:
                ok = False
                break
            used.add(sample.target_id)
            records.append((kind, amb, sample))
        if ok:
            return scene, records
    raise DatasetBuildError(
        f"no scene supported slots {slots} after {cfg.scene_attempts} attempts"
    )


def build_dataset(config: DatasetConfig, seed: int) -> GroundingDataset:
    """Synthesize N (scene, expression, target) records, split by scene."""
    config.validate()
    vocab = Vocabulary()
    master = np.random.default_rng(np.random.PCG64(derive_seed(seed, "dataset")))
    records = []
    scene_counter = 0
    while len(records) < config.n_samples:
        remaining = config.n_samples - len(records)
        k = min(config.exprs_per_scene, remaining)
        if remaining - k == 1:
            # never leave a trailing 1-record scene: in-scene negative
            # sampling needs >= 2 distinct targets per scene
            k += 1
        slots = []
        for _ in range(k):
            kind = CLAUSE_KINDS[int(master.choice(3, p=list(config.mixture)))]
            amb = bool(master.random() < config.ambiguity_rate)
            if amb and kind == "location":
                # a location clause denotes at most one object; redraw the
                # kind between the two that can be ambiguous
                kind = "attribute" if master.random() < 0.5 else "relational"
            slots.append((kind, amb))
        split = _pick_split(float(master.random()), config.splits)
        scene, built = _build_scene_records(
            config, vocab, slots, scene_counter, split, seed
        )
        for kind, amb, sample in built:
            records.append(
                Record(
                    scene=scene,
                    tokens=sample.tokens,
                    text=sample.text,
                    target_id=sample.target_id,
                    clause_kind=kind,
                    is_ambiguous=sample.is_ambiguous,
                    split=split,
                    record_seed=derive_seed(seed, "record", len(records)),
                )
            )
        scene_counter += 1
    return GroundingDataset(vocab=vocab, records=records)
