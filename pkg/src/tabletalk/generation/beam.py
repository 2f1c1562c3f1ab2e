"""Beam search over the expression decoder."""

from __future__ import annotations

from dataclasses import dataclass

import torch


@dataclass
class BeamHypothesis:
    tokens: list  # emitted ids, EOS included when emitted
    log_prob: float  # sum of token log-likelihoods
    finished: bool

    def normalized(self, length_normalize: bool) -> float:
        n = max(len(self.tokens), 1)
        return self.log_prob / n if length_normalize else self.log_prob


def beam_search(
    v: torch.Tensor,
    decoder,
    eos: int,
    bos: int,
    beam_width: int = 5,
    max_len: int = 12,
    length_normalize: bool = True,
) -> list:
    """Decode up to beam_width finished hypotheses, best first.

    Hypotheses are ranked by length-normalized log-probability (raw sum
    when length_normalize is off); all ties break on token ids so the
    search is fully deterministic.
    """
    if beam_width < 1:
        raise ValueError("beam_width must be >= 1")
    if v.dim() == 1:
        v = v.unsqueeze(0)
    with torch.no_grad():
        state = decoder.initial_state(v)
        live = [(0.0, [], state)]
        finished = []
        for _ in range(max_len + 1):
            if not live:
                break
            expansions = []
            for logp, toks, st in live:
                prev = toks[-1] if toks else bos
                dist, new_state = decoder.step(v, prev, st)
                for tok_id in range(decoder.vocab_size):
                    expansions.append((logp + float(dist[tok_id]), toks + [tok_id], new_state))
            expansions.sort(key=lambda e: (-e[0], e[1]))
            live = []
            for logp, toks, st in expansions[:beam_width]:
                if toks[-1] == eos:
                    finished.append(BeamHypothesis(tokens=toks, log_prob=logp, finished=True))
                elif len(toks) >= max_len:
                    finished.append(BeamHypothesis(tokens=toks, log_prob=logp, finished=True))
                else:
                    live.append((logp, toks, st))
    finished.sort(key=lambda h: (-h.normalized(length_normalize), h.tokens))
    return finished[:beam_width]
