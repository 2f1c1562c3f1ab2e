"""Relation keyword spotting over token sequences."""

from __future__ import annotations

# Ordered phrase table; matching scans tokens left to right and takes the
# longest phrase starting at each position (so "in front of" beats "in").
LEXICON = (
    (("to", "the", "left", "of"), "left"),
    (("to", "the", "right", "of"), "right"),
    (("in", "front", "of"), "in_front"),
    (("on", "top", "of"), "on_top"),
    (("left", "of"), "left"),
    (("right", "of"), "right"),
    (("behind",), "behind"),
    (("inside",), "inside"),
    (("into",), "inside"),
    (("on",), "on_top"),
    (("in",), "inside"),
)

# Phrases the generator realizes for each relation (subsets of LEXICON).
PHRASES_FOR = {
    "left": (("left", "of"), ("to", "the", "left", "of")),
    "right": (("right", "of"), ("to", "the", "right", "of")),
    "in_front": (("in", "front", "of"),),
    "behind": (("behind",),),
    "on_top": (("on", "top", "of"), ("on",)),
    "inside": (("inside",), ("in",)),
}
PLACE_PHRASES_FOR = dict(PHRASES_FOR, inside=(("into",), ("inside",), ("in",)))


class NoRelationFound(Exception):
    pass


def spot_relation_span(tokens):
    """Return (label, start, end) of the leftmost, longest lexicon match."""
    toks = list(tokens)
    for i in range(len(toks)):
        for phrase, label in LEXICON:
            if tuple(toks[i : i + len(phrase)]) == phrase:
                return label, i, i + len(phrase)
    raise NoRelationFound(f"no relation phrase in {' '.join(toks)!r}")


def spot_relation(tokens) -> str:
    """Return the relation named in `tokens` (longest match, left to right)."""
    return spot_relation_span(tokens)[0]
