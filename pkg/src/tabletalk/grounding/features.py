"""Tensor views of candidate feature bundles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch


@dataclass
class CandidateFeatures:
    ids: list
    appearance: torch.Tensor  # (N, 18)
    loc: torch.Tensor  # (N, 30) = loc5 + flattened same-category context
    rel: torch.Tensor  # (N, 5, 23)
    rel_mask: torch.Tensor  # (N, 5) bool, True where a real neighbor sits
    true_boxes: list
    boxes: list

    def __len__(self):
        return len(self.ids)

    def select(self, idx: int) -> "CandidateFeatures":
        return CandidateFeatures(
            ids=[self.ids[idx]],
            appearance=self.appearance[idx : idx + 1],
            loc=self.loc[idx : idx + 1],
            rel=self.rel[idx : idx + 1],
            rel_mask=self.rel_mask[idx : idx + 1],
            true_boxes=[self.true_boxes[idx]],
            boxes=[self.boxes[idx]],
        )


def featurize(candidates) -> CandidateFeatures:
    app = np.stack([c.appearance for c in candidates])
    loc = np.stack(
        [np.concatenate([c.loc5, c.same_cat_context.reshape(-1)]) for c in candidates]
    )
    rel = np.stack([c.any_cat_context for c in candidates])
    mask = np.zeros((len(candidates), rel.shape[1]), dtype=bool)
    for i, c in enumerate(candidates):
        mask[i, : c.n_any] = True
    return CandidateFeatures(
        ids=[c.id for c in candidates],
        appearance=torch.from_numpy(app).double(),
        loc=torch.from_numpy(loc).double(),
        rel=torch.from_numpy(rel).double(),
        rel_mask=torch.from_numpy(mask),
        true_boxes=[c.true_bbox for c in candidates],
        boxes=[c.bbox for c in candidates],
    )
