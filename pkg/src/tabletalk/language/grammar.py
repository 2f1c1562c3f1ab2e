"""Template grammar: realization and exact denotation over a scene.

Three clause kinds mirror how people referred to objects in the source
setting: attribute ("the small red cup"), location ("the second cup from
the left"), relational ("the cup left of the red box"). Denotation is
computed exhaustively against the scene, so ambiguity labels are ground
truth rather than model estimates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..seeding import derive_seed
from ..worldsim import Scene, SceneObject, relation_oracle
from .lexicon import PHRASES_FOR, PLACE_PHRASES_FOR
from .vocab import HYPERNYMS, ORDINALS, Vocabulary, detokenize

MAX_EXPR_TOKENS = 12

PICK_VERBS = (("fetch",), ("grab",), ("get",), ("pick", "up"))
PLACE_VERBS = (("place",), ("put",), ("move",))


class NoDiscriminativeExpression(Exception):
    """No template realizes the requested (target, ambiguity) pair."""


@dataclass(frozen=True)
class AttributeDesc:
    noun: str  # category or hypernym
    color: Optional[str] = None
    size: Optional[str] = None

    def tokens(self):
        out = ["the"]
        if self.size:
            out.append(self.size)
        if self.color:
            out.append(self.color)
        out.append(self.noun)
        return out


@dataclass(frozen=True)
class LocationDesc:
    selector: object  # "leftmost" | "rightmost" | "middle" | 1..4
    category: str

    def tokens(self):
        if isinstance(self.selector, int):
            return ["the", ORDINALS[self.selector - 1], self.category, "from", "the", "left"]
        return ["the", str(self.selector), self.category]


@dataclass(frozen=True)
class RelationalDesc:
    category: str
    label: str
    ref: AttributeDesc

    def tokens(self, phrase=None):
        phrase = phrase or PHRASES_FOR[self.label][0]
        return ["the", self.category] + list(phrase) + self.ref.tokens()


def denote_attribute(desc: AttributeDesc, objects) -> set:
    out = set()
    for o in objects:
        if desc.noun not in HYPERNYMS and o.category != desc.noun:
            continue
        if desc.color and o.color != desc.color:
            continue
        if desc.size and o.size != desc.size:
            continue
        out.add(o.id)
    return out


def _x_order(objects):
    return sorted(objects, key=lambda o: (o.center[0], o.center[1], o.id))


def denote_location(desc: LocationDesc, objects) -> set:
    members = _x_order([o for o in objects if o.category == desc.category])
    if not members:
        return set()
    if desc.selector == "leftmost":
        return {members[0].id}
    if desc.selector == "rightmost":
        return {members[-1].id}
    if desc.selector == "middle":
        # needs an odd count of at least 3: an even row has no middle
        # element and a singleton has no meaningful one
        if len(members) < 3 or len(members) % 2 == 0:
            return set()
        return {members[len(members) // 2].id}
    n = int(desc.selector)
    if n > len(members):
        return set()
    return {members[n - 1].id}


def denote_relational(desc: RelationalDesc, scene: Scene, objects) -> set:
    refs = [o for o in objects if o.id in denote_attribute(desc.ref, objects)]
    out = set()
    for o in objects:
        if o.category != desc.category:
            continue
        for r in refs:
            if r.id != o.id and desc.label in relation_oracle(scene, o.bbox, r):
                out.add(o.id)
                break
    return out


def denote(desc, scene: Scene, table: str) -> set:
    objects = scene.objects_on(table)
    if isinstance(desc, AttributeDesc):
        return denote_attribute(desc, objects)
    if isinstance(desc, LocationDesc):
        return denote_location(desc, objects)
    if isinstance(desc, RelationalDesc):
        return denote_relational(desc, scene, objects)
    raise TypeError(f"unknown description {desc!r}")


@dataclass
class ExpressionSample:
    scene_ref: str
    tokens: list  # vocabulary indices, EOS-terminated
    text: str
    target_id: str
    clause_kind: str
    is_ambiguous: bool


def _candidate_descs(scene, target, clause_kind, table):
    objects = scene.objects_on(table)
    if clause_kind == "attribute":
        return [
            AttributeDesc(noun=noun, color=color, size=size)
            for noun in (target.category,) + HYPERNYMS
            for color in (None, target.color)
            for size in (None, target.size)
        ]
    if clause_kind == "location":
        return [
            LocationDesc(selector=sel, category=target.category)
            for sel in ("leftmost", "rightmost", "middle", 1, 2, 3, 4)
        ]
    if clause_kind == "relational":
        descs = []
        for r in objects:
            if r.id == target.id:
                continue
            for label in sorted(relation_oracle(scene, target.bbox, r)):
                for ref in (
                    AttributeDesc(noun=r.category),
                    AttributeDesc(noun=r.category, color=r.color),
                ):
                    d = RelationalDesc(category=target.category, label=label, ref=ref)
                    if d not in descs:
                        descs.append(d)
        return descs
    raise ValueError(f"unknown clause kind {clause_kind!r}")


def generate_expression(
    scene: Scene,
    target_id: str,
    clause_kind: str,
    ambiguity: bool,
    seed: int,
    table: str = "pick",
    vocab: Optional[Vocabulary] = None,
) -> ExpressionSample:
    """Realize one template for `target_id`, verified by exhaustive denotation."""
    vocab = vocab or Vocabulary()
    target = scene.find(target_id)
    rng = np.random.default_rng(np.random.PCG64(derive_seed(seed, "expr", target_id)))
    descs = _candidate_descs(scene, target, clause_kind, table)
    order = list(rng.permutation(len(descs))) if descs else []
    for i in order:
        desc = descs[i]
        den = denote(desc, scene, table)
        if ambiguity:
            ok = target_id in den and len(den) >= 2
        else:
            ok = den == {target_id}
        if not ok:
            continue
        if isinstance(desc, RelationalDesc):
            phrases = PHRASES_FOR[desc.label]
            toks = desc.tokens(phrase=phrases[int(rng.integers(len(phrases)))])
        else:
            toks = desc.tokens()
        if len(toks) > MAX_EXPR_TOKENS:
            continue
        return ExpressionSample(
            scene_ref=scene.scene_id,
            tokens=vocab.encode(toks) + [vocab.eos],
            text=detokenize(toks),
            target_id=target_id,
            clause_kind=clause_kind,
            is_ambiguous=len(den) >= 2,
        )
    raise NoDiscriminativeExpression(
        f"no {clause_kind} template picks out {target_id} (ambiguity={ambiguity})"
    )


def parse_expression(tokens):
    """Parse grammar-shaped tokens back into a description, or None.

    Inverse of the realization templates; used by the oracle
    comprehension stand-in and by tests. Free-form text outside the
    grammar parses to None.
    """
    from .lexicon import NoRelationFound, spot_relation_span
    from .vocab import SELECTOR_WORDS

    toks = list(tokens)
    if toks and toks[0] == "the":
        toks = toks[1:]
    if not toks:
        return None
    # location: "leftmost cup" / "second cup from the left"
    if toks[0] in SELECTOR_WORDS and len(toks) == 2:
        return LocationDesc(selector=toks[0], category=toks[1])
    if toks[0] in ORDINALS and len(toks) == 5 and toks[2:] == ["from", "the", "left"]:
        return LocationDesc(selector=ORDINALS.index(toks[0]) + 1, category=toks[1])
    # relational: "cup left of the red box"
    try:
        label, start, end = spot_relation_span(toks)
    except NoRelationFound:
        label = None
    if label is not None and start == 1:
        ref = parse_expression(toks[end:])
        if isinstance(ref, AttributeDesc):
            return RelationalDesc(category=toks[0], label=label, ref=ref)
        return None
    # attribute: "[size] [color] noun"
    from ..worldsim import CATEGORIES, COLORS, SIZES

    size = color = None
    rest = toks
    if rest and rest[0] in SIZES:
        size, rest = rest[0], rest[1:]
    if rest and rest[0] in COLORS:
        color, rest = rest[0], rest[1:]
    if len(rest) == 1 and (rest[0] in CATEGORIES or rest[0] in HYPERNYMS):
        return AttributeDesc(noun=rest[0], color=color, size=size)
    return None


def make_pick_instruction(expr_text: str, seed: int) -> str:
    rng = np.random.default_rng(np.random.PCG64(seed))
    verb = PICK_VERBS[int(rng.integers(len(PICK_VERBS)))]
    return detokenize(list(verb) + expr_text.split())


def make_place_instruction(label: str, ref_text: str, seed: int) -> str:
    rng = np.random.default_rng(np.random.PCG64(seed))
    verb = PLACE_VERBS[int(rng.integers(len(PLACE_VERBS)))]
    phrases = PLACE_PHRASES_FOR[label]
    phrase = phrases[int(rng.integers(len(phrases)))]
    return detokenize(list(verb) + ["it"] + list(phrase) + ref_text.split())


def strip_pick_verbs(tokens: list) -> list:
    """Drop a leading pick-verb phrase, if any."""
    toks = list(tokens)
    for verb in sorted(PICK_VERBS, key=len, reverse=True):
        if tuple(toks[: len(verb)]) == verb:
            return toks[len(verb) :]
    return toks
