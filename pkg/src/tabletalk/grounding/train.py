"""Triplet training for the grounding network (optionally joint).

Each record contributes one triplet per epoch: the positive pair plus a
wrong-expression negative (another target's expression from the same
scene) and a wrong-object negative (another candidate from the same
scene). Joint mode decodes the same triplets through the generator and
adds the NLL and max-margin generation terms.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F

import numpy as np

from ..config import TrainConfig
from ..perception import JitterConfig, encode_candidates
from ..seeding import derive_seed
from ..worldsim import CATEGORIES, COLORS, SIZES
from .features import CandidateFeatures, featurize
from .joint import JointModel
from .losses import hinge_loss
from .model import GroundingConfig, comprehend

_COLOR_INDEX = {c: i for i, c in enumerate(COLORS)}
_CATEGORY_INDEX = {c: i for i, c in enumerate(CATEGORIES)}
_SIZE_INDEX = {s: i for i, s in enumerate(SIZES)}


class NonFiniteLoss(Exception):
    pass


class _Example:
    __slots__ = ("tokens", "scene_id", "target_idx", "feats", "labels", "kind", "record")

    def __init__(self, tokens, scene_id, target_idx, feats, labels, kind, record):
        self.tokens = tokens
        self.scene_id = scene_id
        self.target_idx = target_idx
        self.feats = feats
        self.labels = labels
        self.kind = kind
        self.record = record


def prepare_examples(records, seed: int, jitter: int):
    """Featurize each record's scene once; returns (examples, scene groups)."""
    feat_cache = {}
    label_cache = {}
    examples = []
    for rec in records:
        sid = rec.scene.scene_id
        if sid not in feat_cache:
            cands = encode_candidates(
                rec.scene, "pick", JitterConfig(max_shift=jitter),
                seed=derive_seed(seed, "jitter", sid),
            )
            feat_cache[sid] = featurize(cands)
            label_cache[sid] = {
                o.id: (
                    _COLOR_INDEX[o.color],
                    _CATEGORY_INDEX[o.category],
                    _SIZE_INDEX[o.size],
                )
                for o in rec.scene.objects_on("pick")
            }
        feats = feat_cache[sid]
        examples.append(
            _Example(
                tokens=list(rec.tokens),
                scene_id=sid,
                target_idx=feats.ids.index(rec.target_id),
                feats=feats,
                labels=label_cache[sid],
                kind=rec.clause_kind,
                record=rec,
            )
        )
    groups = {}
    for i, ex in enumerate(examples):
        groups.setdefault(ex.scene_id, []).append(i)
    return examples, groups


def _pad(seqs):
    lengths = torch.tensor([len(s) for s in seqs], dtype=torch.long)
    out = torch.zeros(len(seqs), int(lengths.max()), dtype=torch.long)
    for i, s in enumerate(seqs):
        out[i, : len(s)] = torch.tensor(s, dtype=torch.long)
    return out, lengths


def _gather(examples, idxs, which):
    rows_app, rows_loc, rows_rel, rows_mask = [], [], [], []
    for i, cand_idx in zip(idxs, which):
        f = examples[i].feats
        rows_app.append(f.appearance[cand_idx])
        rows_loc.append(f.loc[cand_idx])
        rows_rel.append(f.rel[cand_idx])
        rows_mask.append(f.rel_mask[cand_idx])
    return CandidateFeatures(
        ids=[],
        appearance=torch.stack(rows_app),
        loc=torch.stack(rows_loc),
        rel=torch.stack(rows_rel),
        rel_mask=torch.stack(rows_mask),
        true_boxes=[],
        boxes=[],
    )


def _pairwise_scores(net, feats: CandidateFeatures, q, weights):
    """Elementwise S(o_b | r_b) for aligned batches; (B,) tensor."""
    subj, loc, rel = net.module_embeddings(feats)
    s_subj = F.cosine_similarity(subj, q["subj"], dim=1)
    s_loc = F.cosine_similarity(loc, q["loc"], dim=1)
    cos_rel = F.cosine_similarity(rel, q["rel"].unsqueeze(1), dim=2)
    cos_rel = cos_rel.masked_fill(~feats.rel_mask, -2.0)
    s_rel = cos_rel.max(dim=1).values
    s_rel = torch.where(feats.rel_mask.any(dim=1), s_rel, torch.zeros_like(s_rel))
    mods = torch.stack([s_subj, s_loc, s_rel], dim=1)
    return (mods * weights).sum(dim=1)


def validation_accuracy(model: JointModel, examples) -> float:
    if not examples:
        return 0.0
    hits = 0
    with torch.no_grad():
        for ex in examples:
            result = comprehend(ex.feats, ex.tokens, model.grounder)
            hits += result.ranking[0] == ex.feats.ids[ex.target_idx]
    return hits / len(examples)


def train_grounding(dataset, cfg: TrainConfig):
    """Train on the dataset's train split; returns (JointModel, curves)."""
    cfg.validate()
    torch.set_num_threads(cfg.num_threads)
    torch.manual_seed(derive_seed(cfg.seed, "init"))
    vocab = dataset.vocab
    model = JointModel(len(vocab), GroundingConfig(margin=cfg.m1))
    bos = vocab.bos

    train_examples, groups = prepare_examples(
        dataset.split("train"), cfg.seed, cfg.jitter
    )
    val_examples, _ = prepare_examples(dataset.split("val"), cfg.seed, cfg.jitter)
    if not train_examples:
        raise ValueError("dataset has no train records")

    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    curves = []
    for epoch in range(cfg.epochs):
        # warm-up: let the comprehension geometry settle before the
        # generation losses start reshaping the shared features
        joint_active = cfg.joint and epoch >= cfg.joint_warmup_epochs
        rng = np.random.default_rng(np.random.PCG64(derive_seed(cfg.seed, "epoch", epoch)))
        order = rng.permutation(len(train_examples))
        sums = {"L1": 0.0, "L_attr": 0.0, "L2": 0.0, "L3": 0.0}
        n_batches = 0
        for start in range(0, len(order), cfg.batch_size):
            idxs = [int(i) for i in order[start : start + cfg.batch_size]]
            batch = [train_examples[i] for i in idxs]

            neg_expr_tokens = []
            neg_obj_idx = []
            for ex in batch:
                peers = [
                    j
                    for j in groups[ex.scene_id]
                    if train_examples[j].target_idx != ex.target_idx
                ]
                pick_j = train_examples[peers[int(rng.integers(len(peers)))]]
                neg_expr_tokens.append(pick_j.tokens)
                others = [k for k in range(len(ex.feats)) if k != ex.target_idx]
                neg_obj_idx.append(others[int(rng.integers(len(others)))])

            tokens_i, len_i = _pad([ex.tokens for ex in batch])
            tokens_j, len_j = _pad(neg_expr_tokens)
            all_tokens = torch.cat(
                [
                    torch.nn.functional.pad(tokens_i, (0, max(0, tokens_j.shape[1] - tokens_i.shape[1]))),
                    torch.nn.functional.pad(tokens_j, (0, max(0, tokens_i.shape[1] - tokens_j.shape[1]))),
                ]
            )
            all_lengths = torch.cat([len_i, len_j])
            q, weights, _, _, _ = model.grounder.encode_batch(all_tokens, all_lengths)
            b = len(batch)
            q_i = {m: q[m][:b] for m in q}
            q_j = {m: q[m][b:] for m in q}
            w_i, w_j = weights[:b], weights[b:]

            feats_pos = _gather(train_examples, idxs, [ex.target_idx for ex in batch])
            feats_neg = _gather(train_examples, idxs, neg_obj_idx)

            s_pos = _pairwise_scores(model.grounder, feats_pos, q_i, w_i)
            s_wrong_expr = _pairwise_scores(model.grounder, feats_pos, q_j, w_j)
            s_wrong_obj = _pairwise_scores(model.grounder, feats_neg, q_i, w_i)
            l1 = hinge_loss(s_pos, s_wrong_expr, s_wrong_obj, cfg).mean()

            labels = torch.tensor(
                [ex.labels[ex.feats.ids[ex.target_idx]] for ex in batch], dtype=torch.long
            )
            lc, lcat, ls = model.grounder.attribute_logits(feats_pos.appearance)
            l_attr = (
                F.cross_entropy(lc, labels[:, 0])
                + F.cross_entropy(lcat, labels[:, 1])
                + F.cross_entropy(ls, labels[:, 2])
            ) / 3.0

            loss = l1 + cfg.lambda_attr * l_attr
            l2 = torch.tensor(0.0, dtype=torch.float64)
            l3 = torch.tensor(0.0, dtype=torch.float64)
            if joint_active:
                v_pos = model.batch_visual_reps(feats_pos)
                v_neg = model.batch_visual_reps(feats_neg)
                lp_pos = model.decoder.sequence_log_probs(v_pos, tokens_i, len_i, bos)
                lp_neg = model.decoder.sequence_log_probs(v_neg, tokens_i, len_i, bos)
                l2 = (-lp_pos).mean()
                l3 = (cfg.lambda3 * torch.clamp(cfg.m2 + lp_neg - lp_pos, min=0)).mean()
                loss = loss + l2 + l3

            if not torch.isfinite(loss):
                raise NonFiniteLoss(
                    f"non-finite loss at epoch {epoch}: L1={float(l1)} "
                    f"L_attr={float(l_attr)} L2={float(l2)} L3={float(l3)}"
                )
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()

            sums["L1"] += float(l1.detach())
            sums["L_attr"] += float(l_attr.detach())
            sums["L2"] += float(l2.detach())
            sums["L3"] += float(l3.detach())
            n_batches += 1

        row = {k: v / max(n_batches, 1) for k, v in sums.items()}
        row["epoch"] = epoch
        row["val_accuracy"] = validation_accuracy(model, val_examples)
        curves.append(row)
    return model, curves
