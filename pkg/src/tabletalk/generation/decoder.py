"""Recurrent expression decoder conditioned on a target visual representation."""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F


@dataclass
class TargetVisualRep:
    v_vis: torch.Tensor  # appearance through shared FC then exclusive FC
    v_loc: torch.Tensor  # location-module representation
    v_rel: torch.Tensor  # pooled relationship-module representation

    @property
    def v(self) -> torch.Tensor:
        return torch.cat([self.v_vis, self.v_loc, self.v_rel], dim=-1)


class ExpressionDecoder(nn.Module):
    """LSTM language model over the grammar vocabulary, conditioned on v.

    The word embedding table is shared with the comprehension encoder
    (passed in, not owned). The conditioning vector is injected both as
    the initial state and as a per-step context input.
    """

    def __init__(self, embedding: nn.Embedding, v_dim: int, hidden_dim: int = 64, ctx_dim: int = 32):
        super().__init__()
        self.embedding = embedding
        vocab_size, embed_dim = embedding.weight.shape
        self.vocab_size = vocab_size
        self.hidden_dim = hidden_dim
        self.init_h = nn.Linear(v_dim, hidden_dim)
        self.init_c = nn.Linear(v_dim, hidden_dim)
        self.v_ctx = nn.Linear(v_dim, ctx_dim)
        self.lstm = nn.LSTM(embed_dim + ctx_dim, hidden_dim, batch_first=True)
        self.out = nn.Linear(hidden_dim, vocab_size)
        for mod in (self.init_h, self.init_c, self.v_ctx, self.lstm, self.out):
            mod.double()

    def initial_state(self, v: torch.Tensor):
        h = torch.tanh(self.init_h(v)).unsqueeze(0)
        c = torch.tanh(self.init_c(v)).unsqueeze(0)
        return h, c

    def sequence_log_probs(
        self, v: torch.Tensor, tokens: torch.Tensor, lengths: torch.Tensor, bos: int
    ) -> torch.Tensor:
        """Sum log P(token_t | v, tokens_<t) per sequence; (B,) tensor.

        `tokens` holds the EOS-terminated targets, padded; `lengths`
        counts real tokens including EOS.
        """
        b, t = tokens.shape
        bos_col = torch.full((b, 1), bos, dtype=torch.long)
        inputs = torch.cat([bos_col, tokens[:, :-1]], dim=1)
        ctx = self.v_ctx(v).unsqueeze(1).expand(b, t, -1)
        emb = torch.cat([self.embedding(inputs), ctx], dim=2)
        out, _ = self.lstm(emb, self.initial_state(v))
        logp = F.log_softmax(self.out(out), dim=2)
        gathered = logp.gather(2, tokens.unsqueeze(2)).squeeze(2)
        mask = torch.arange(t).unsqueeze(0) < lengths.unsqueeze(1)
        return (gathered * mask).sum(dim=1)

    def step(self, v: torch.Tensor, token: int, state):
        """One decoding step; returns (log-prob row (V,), new state)."""
        tok = torch.tensor([[token]], dtype=torch.long)
        ctx = self.v_ctx(v).unsqueeze(1)
        emb = torch.cat([self.embedding(tok), ctx], dim=2)
        out, new_state = self.lstm(emb, state)
        return F.log_softmax(self.out(out[:, 0]), dim=1)[0], new_state


def decode_nll(v: torch.Tensor, token_ids, decoder: ExpressionDecoder, bos: int) -> torch.Tensor:
    """Negative log-likelihood of one EOS-terminated sequence; >= 0."""
    ids = torch.as_tensor(list(token_ids), dtype=torch.long).unsqueeze(0)
    lengths = torch.tensor([ids.shape[1]])
    if v.dim() == 1:
        v = v.unsqueeze(0)
    return -decoder.sequence_log_probs(v, ids, lengths, bos)[0]


def mmi_margin(log_p_target, log_p_other, cfg):
    """lambda3 * max(0, m2 + log P(r|v_other) - log P(r|v_target))."""
    gap = cfg.m2 + log_p_other - log_p_target
    if torch.is_tensor(gap):
        return cfg.lambda3 * torch.clamp(gap, min=0)
    return cfg.lambda3 * max(0.0, gap)


def mmi_loss(v_target, v_other, token_ids, decoder: ExpressionDecoder, cfg, bos: int):
    """Max-margin mutual-information term: the expression must fit its own
    object better than a same-scene competitor by margin m2."""
    lp_target = -decode_nll(v_target, token_ids, decoder, bos)
    lp_other = -decode_nll(v_other, token_ids, decoder, bos)
    return mmi_margin(lp_target, lp_other, cfg)
