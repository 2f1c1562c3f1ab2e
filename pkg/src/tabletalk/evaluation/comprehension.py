"""Comprehension accuracy benchmarks."""

from __future__ import annotations

from ..grounding import comprehend, prepare_examples
from ..worldsim import iou


def eval_comprehension(dataset, model, criterion: str = "exact_id", split: str = "test",
                       jitter: int = 1, seed: int = 0, scorer=None) -> dict:
    """Fraction of records whose top-ranked candidate is the target.

    exact_id: top candidate id equals the target id. iou_0_5: the top
    candidate's (jittered) box overlaps the true target box with
    IoU > 0.5. Returns overall accuracy plus a per-clause-kind
    breakdown; the weighted average of the breakdown reproduces the
    overall number exactly.
    """
    if criterion not in ("exact_id", "iou_0_5"):
        raise ValueError(f"unknown criterion {criterion!r}")
    records = dataset.split(split) if split else dataset.records
    examples, _ = prepare_examples(records, seed, jitter)
    hits = {}
    totals = {}
    correct_total = 0
    for ex in examples:
        if scorer is None:
            result = comprehend(ex.feats, ex.tokens, model.grounder)
            top = result.ranking[0]
        else:
            top = scorer(ex)
        if criterion == "exact_id":
            ok = top == ex.feats.ids[ex.target_idx]
        else:
            top_box = ex.feats.boxes[ex.feats.ids.index(top)]
            true_box = ex.feats.true_boxes[ex.target_idx]
            ok = iou(top_box, true_box) > 0.5
        hits[ex.kind] = hits.get(ex.kind, 0) + ok
        totals[ex.kind] = totals.get(ex.kind, 0) + 1
        correct_total += ok
    n = sum(totals.values())
    return {
        "criterion": criterion,
        "overall": correct_total / n if n else 0.0,
        "by_kind": {k: hits[k] / totals[k] for k in totals},
        "counts": dict(totals),
        "n": n,
    }
