"""Comprehension-based reranking of generated expressions."""

from __future__ import annotations

from ..grounding.features import CandidateFeatures, featurize
from ..grounding.model import comprehend

EMPTY_COMPETITOR_SCORE = -1.0  # cosine floor stands in for max over no competitors


def discriminative_margin(tokens, feats: CandidateFeatures, target_id: str, net) -> float:
    """Delta(h) = S(target|h) - max over other candidates of S(o_k|h)."""
    result = comprehend(feats, tokens, net)
    target = result.scores[target_id]
    others = [s for cid, s in result.scores.items() if cid != target_id]
    return target - (max(others) if others else EMPTY_COMPETITOR_SCORE)


def rerank(hypotheses, candidates, target_id: str, net) -> list:
    """Pick the least ambiguous hypothesis: maximal comprehension margin.

    Ties fall back to generation log-probability, then token order.
    Returns the winning token sequence.
    """
    if not hypotheses:
        raise ValueError("need at least one hypothesis")
    feats = candidates if isinstance(candidates, CandidateFeatures) else featurize(candidates)
    scored = [
        (discriminative_margin(h.tokens, feats, target_id, net), h.log_prob, h.tokens)
        for h in hypotheses
    ]
    scored.sort(key=lambda t: (-t[0], -t[1], t[2]))
    return scored[0][2]
