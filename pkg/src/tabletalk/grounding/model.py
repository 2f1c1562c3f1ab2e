"""Modular referring-expression comprehension.

An expression is encoded by a shared word embedding + BiLSTM. Two kinds
of attention are learned on top: per-module word attention (yielding one
phrase embedding per module) and module weights (how much the subject,
location, and relationship modules contribute). Each visual module
scores a candidate by cosine similarity against its phrase embedding;
the overall match is the module-weight average, so every score lies in
[-1, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from ..perception import ANY_CTX_DIM, APPEARANCE_DIM
from .features import CandidateFeatures, featurize

MODULES = ("subj", "loc", "rel")
LOC_FEAT_DIM = 5 + 5 * 5  # loc5 + flattened same-category context


@dataclass
class GroundingConfig:
    embed_dim: int = 32
    hidden_dim: int = 32  # per direction; module space is 2*hidden
    margin: float = 0.1  # ambiguity threshold m1
    n_colors: int = 6
    n_categories: int = 8
    n_sizes: int = 3


@dataclass
class EncodedExpression:
    q: dict  # module -> (D,) phrase embedding
    module_weights: np.ndarray  # (3,) simplex
    word_attention: dict  # module -> (T,) weights
    hidden_states: torch.Tensor  # (T, D)

    def weight(self, module: str) -> float:
        return float(self.module_weights[MODULES.index(module)])


@dataclass
class MatchResult:
    scores: dict  # candidate id -> float in [-1, 1]
    ranking: list  # ids by descending score, ties by id
    ambiguous_set: list  # ids within margin of the top, descending score
    encoded: EncodedExpression
    module_scores: dict = field(default_factory=dict)  # id -> (s_subj, s_loc, s_rel)


class UnknownToken(Exception):
    pass


class GroundingNet(nn.Module):
    def __init__(self, vocab_size: int, cfg: GroundingConfig | None = None):
        super().__init__()
        self.cfg = cfg or GroundingConfig()
        c = self.cfg
        d = 2 * c.hidden_dim
        self.vocab_size = vocab_size
        self.embedding = nn.Embedding(vocab_size, c.embed_dim)
        self.encoder = nn.LSTM(
            c.embed_dim, c.hidden_dim, batch_first=True, bidirectional=True
        )
        self.word_attn = nn.ModuleDict({m: nn.Linear(d, 1) for m in MODULES})
        self.module_weight_head = nn.Linear(2 * d, len(MODULES))
        # subject: one shared FC reused by the generator's visual path.
        # Candidate-side projections are bias-free so the whole visual
        # path is homogeneous: scaling raw features by a positive scalar
        # scales embeddings and leaves every cosine score unchanged.
        self.shared_subject = nn.Linear(APPEARANCE_DIM, d, bias=False)
        self.subject_proj = nn.Linear(d, d, bias=False)
        self.location_proj = nn.Sequential(
            nn.Linear(LOC_FEAT_DIM, d, bias=False),
            nn.ReLU(),
            nn.Linear(d, d, bias=False),
            nn.ReLU(),
            nn.Linear(d, d, bias=False),
        )
        self.relation_proj = nn.Sequential(
            nn.Linear(ANY_CTX_DIM, d, bias=False), nn.ReLU(), nn.Linear(d, d, bias=False)
        )
        self.attr_color = nn.Linear(d, c.n_colors)
        self.attr_category = nn.Linear(d, c.n_categories)
        self.attr_size = nn.Linear(d, c.n_sizes)
        self.double()

    # -- language side ------------------------------------------------

    def encode_batch(self, tokens: torch.Tensor, lengths: torch.Tensor):
        """Encode padded (B, T) token ids; returns (q, weights, attn, hidden)."""
        emb = self.embedding(tokens)
        packed = nn.utils.rnn.pack_padded_sequence(
            emb, lengths.cpu(), batch_first=True, enforce_sorted=False
        )
        out, _ = self.encoder(packed)
        hidden, _ = nn.utils.rnn.pad_packed_sequence(out, batch_first=True)
        b, t, d = hidden.shape
        mask = torch.arange(t).unsqueeze(0) < lengths.unsqueeze(1)

        q = {}
        attn = {}
        for m in MODULES:
            logits = self.word_attn[m](hidden).squeeze(-1)
            logits = logits.masked_fill(~mask, float("-inf"))
            a = torch.softmax(logits, dim=1)
            attn[m] = a
            q[m] = torch.bmm(a.unsqueeze(1), hidden).squeeze(1)

        first = hidden[:, 0, :]
        last = hidden[torch.arange(b), lengths - 1, :]
        weights = torch.softmax(self.module_weight_head(torch.cat([first, last], dim=1)), dim=1)
        return q, weights, attn, hidden, mask

    # -- visual side ----------------------------------------------------

    def subject_shared(self, appearance: torch.Tensor) -> torch.Tensor:
        return torch.relu(self.shared_subject(appearance))

    def module_embeddings(self, feats: CandidateFeatures):
        subj = self.subject_proj(self.subject_shared(feats.appearance))
        loc = self.location_proj(feats.loc)
        rel = self.relation_proj(feats.rel)
        return subj, loc, rel

    def module_scores(self, feats: CandidateFeatures, q: dict) -> torch.Tensor:
        """Cosine scores per candidate per module; returns (N, 3)."""
        subj, loc, rel = self.module_embeddings(feats)
        n = subj.shape[0]
        s_subj = F.cosine_similarity(subj, q["subj"].expand(n, -1), dim=1)
        s_loc = F.cosine_similarity(loc, q["loc"].expand(n, -1), dim=1)
        cos_rel = F.cosine_similarity(rel, q["rel"].view(1, 1, -1), dim=2)
        cos_rel = cos_rel.masked_fill(~feats.rel_mask, -2.0)
        s_rel = cos_rel.max(dim=1).values
        # a candidate with no neighbors scores neutral on the relation module
        s_rel = torch.where(feats.rel_mask.any(dim=1), s_rel, torch.zeros_like(s_rel))
        return torch.stack([s_subj, s_loc, s_rel], dim=1)

    def attribute_logits(self, appearance: torch.Tensor):
        h = self.subject_shared(appearance)
        return self.attr_color(h), self.attr_category(h), self.attr_size(h)


def weighted_score(module_scores, module_weights) -> float:
    """Overall match: module-weight average of per-module scores."""
    return float(sum(w * s for w, s in zip(module_weights, module_scores)))


def _encode_single(net: GroundingNet, token_ids) -> tuple:
    ids = torch.as_tensor(list(token_ids), dtype=torch.long).unsqueeze(0)
    if (ids >= net.vocab_size).any() or (ids < 0).any():
        raise UnknownToken(f"token id outside vocabulary of size {net.vocab_size}")
    lengths = torch.tensor([ids.shape[1]])
    q, weights, attn, hidden, _ = net.encode_batch(ids, lengths)
    return q, weights, attn, hidden


def encode_expression(token_ids, net: GroundingNet) -> EncodedExpression:
    """Encode one EOS-terminated id sequence."""
    with torch.no_grad():
        q, weights, attn, hidden = _encode_single(net, token_ids)
    return EncodedExpression(
        q={m: q[m][0] for m in MODULES},
        module_weights=weights[0].numpy().copy(),
        word_attention={m: attn[m][0].numpy().copy() for m in MODULES},
        hidden_states=hidden[0],
    )


def match_score(candidate, encoded: EncodedExpression, net: GroundingNet) -> float:
    """S(o|r): module-weight average of per-module cosine scores."""
    feats = featurize([candidate])
    with torch.no_grad():
        ms = net.module_scores(feats, encoded.q)
    return weighted_score(ms[0].tolist(), encoded.module_weights.tolist())


def comprehend(candidates, token_ids, net: GroundingNet, margin: float | None = None):
    """Score every candidate and collect the within-margin ambiguous set."""
    if not candidates:
        raise ValueError("need at least one candidate")
    if isinstance(candidates, CandidateFeatures):
        feats = candidates
    else:
        feats = featurize(candidates)
    m1 = net.cfg.margin if margin is None else margin
    with torch.no_grad():
        q, weights, attn, hidden = _encode_single(net, token_ids)
        qs = {m: q[m][0] for m in MODULES}
        ms = net.module_scores(feats, qs)
        w = weights[0]
        scores = (ms * w.unsqueeze(0)).sum(dim=1)
    encoded = EncodedExpression(
        q=qs,
        module_weights=w.numpy().copy(),
        word_attention={m: attn[m][0].numpy().copy() for m in MODULES},
        hidden_states=hidden[0],
    )
    by_id = {cid: float(s) for cid, s in zip(feats.ids, scores)}
    ranking = sorted(by_id, key=lambda cid: (-by_id[cid], cid))
    top = by_id[ranking[0]]
    ambiguous = [cid for cid in ranking if top - by_id[cid] < m1]
    return MatchResult(
        scores=by_id,
        ranking=ranking,
        ambiguous_set=ambiguous,
        encoded=encoded,
        module_scores={cid: tuple(ms[i].tolist()) for i, cid in enumerate(feats.ids)},
    )
