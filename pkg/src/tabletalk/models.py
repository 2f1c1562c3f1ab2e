"""Model bundles: the uniform interface the dialogue executor drives.

TrainedBundle wires the learned networks together; OracleBundle answers
from ground truth (grammar denotation + geometric oracle) and exists for
executor tests, fast Monte-Carlo harnesses, and the demo service when no
checkpoints are configured.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .generation import beam_search, rerank
from .grounding import GroundingNet, JointModel, MatchResult, comprehend, featurize
from .language import (
    NoDiscriminativeExpression,
    Vocabulary,
    denote,
    detokenize,
    generate_expression,
)
from .language.grammar import parse_expression
from .perception import JitterConfig, encode_candidates
from .placement import ideal_maps, maps_for_scene
from .seeding import derive_seed


@dataclass
class TrainedBundle:
    model: JointModel
    placement_net: object
    vocab: Vocabulary
    jitter: JitterConfig = field(default_factory=JitterConfig)
    beam_width: int = 5
    max_len: int = 12

    @property
    def grounder(self) -> GroundingNet:
        return self.model.grounder

    def candidates(self, scene, table, seed=0):
        return encode_candidates(scene, table, self.jitter, seed=seed)

    def comprehend_tokens(self, scene, table, tokens, seed=0) -> MatchResult:
        cands = self.candidates(scene, table, seed=seed)
        ids = self.vocab.encode(tokens) + [self.vocab.eos]
        return comprehend(cands, ids, self.grounder)

    def describe(self, scene, table, target_id, seed=0) -> str:
        feats = featurize(self.candidates(scene, table, seed=seed))
        idx = feats.ids.index(target_id)
        v = self.model.target_visual_rep(feats, idx).v
        hyps = beam_search(
            v,
            self.model.decoder,
            eos=self.vocab.eos,
            bos=self.vocab.bos,
            beam_width=self.beam_width,
            max_len=self.max_len,
        )
        best = rerank(hyps, feats, target_id, self.grounder)
        return detokenize(self.vocab.decode(best))

    def placement_maps(self, scene, table, ref_id):
        return maps_for_scene(scene, table, ref_id, self.placement_net)


@dataclass
class OracleBundle:
    vocab: Vocabulary = field(default_factory=Vocabulary)

    def comprehend_tokens(self, scene, table, tokens, seed=0) -> MatchResult:
        objects = scene.objects_on(table)
        desc = parse_expression(list(tokens))
        members = denote(desc, scene, table) if desc is not None else set()
        scores = {o.id: (1.0 if o.id in members else 0.0) for o in objects}
        ranking = sorted(scores, key=lambda cid: (-scores[cid], cid))
        top = scores[ranking[0]] if ranking else 0.0
        ambiguous = [cid for cid in ranking if top - scores[cid] < 0.1]
        return MatchResult(scores=scores, ranking=ranking, ambiguous_set=ambiguous, encoded=None)

    def describe(self, scene, table, target_id, seed=0) -> str:
        for kind in ("attribute", "location", "relational"):
            try:
                e = generate_expression(
                    scene, target_id, kind, False,
                    seed=derive_seed(seed, "describe", target_id),
                    table=table, vocab=self.vocab,
                )
                return e.text
            except NoDiscriminativeExpression:
                continue
        return f"the {scene.find(target_id).category}"

    def placement_maps(self, scene, table, ref_id):
        return ideal_maps(scene, table, ref_id)
