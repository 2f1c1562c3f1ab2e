"""Joint comprehension + generation model with shared parameters.

The word embedding table and the subject module's shared FC layer are
single objects used by both directions; the generator additionally reads
the location- and relationship-module representations, so joint training
shapes one feature space for both tasks.
"""

from __future__ import annotations

import torch
import torch.nn as nn

from ..generation.decoder import ExpressionDecoder, TargetVisualRep
from .features import CandidateFeatures
from .model import GroundingConfig, GroundingNet


class JointModel(nn.Module):
    def __init__(self, vocab_size: int, cfg: GroundingConfig | None = None):
        super().__init__()
        self.grounder = GroundingNet(vocab_size, cfg)
        d = 2 * self.grounder.cfg.hidden_dim
        self.vis_excl = nn.Linear(d, d).double()
        self.decoder = ExpressionDecoder(self.grounder.embedding, v_dim=3 * d)

    def target_visual_rep(self, feats: CandidateFeatures, idx: int) -> TargetVisualRep:
        """Build v = [v_vis, v_loc, v_rel] for one candidate.

        The location/relationship representations are read out detached:
        the generator leverages what those modules learned but its losses
        must not reshape their scoring geometry. The subject path stays
        live through the explicitly shared FC.
        """
        one = feats.select(idx)
        shared = self.grounder.subject_shared(one.appearance)
        v_vis = self.vis_excl(shared)
        v_loc = self.grounder.location_proj(one.loc).detach()
        rel = self.grounder.relation_proj(one.rel).detach()
        mask = one.rel_mask.unsqueeze(-1).double()
        denom = torch.clamp(mask.sum(dim=1), min=1.0)
        v_rel = (rel * mask).sum(dim=1) / denom
        return TargetVisualRep(v_vis=v_vis[0], v_loc=v_loc[0], v_rel=v_rel[0])

    def batch_visual_reps(self, feats: CandidateFeatures) -> torch.Tensor:
        shared = self.grounder.subject_shared(feats.appearance)
        v_vis = self.vis_excl(shared)
        v_loc = self.grounder.location_proj(feats.loc).detach()
        rel = self.grounder.relation_proj(feats.rel).detach()
        mask = feats.rel_mask.unsqueeze(-1).double()
        denom = torch.clamp(mask.sum(dim=1), min=1.0)
        v_rel = (rel * mask).sum(dim=1) / denom
        return torch.cat([v_vis, v_loc, v_rel], dim=1)
