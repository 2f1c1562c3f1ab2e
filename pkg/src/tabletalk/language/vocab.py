"""Closed vocabulary and tokenizer for the instruction grammar."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from ..worldsim import CATEGORIES, COLORS, SIZES

BOS = "<bos>"
EOS = "<eos>"
UNK = "<unk>"

HYPERNYMS = ("thing", "object")
ORDINALS = ("first", "second", "third", "fourth")
SELECTOR_WORDS = ("leftmost", "rightmost", "middle")
FUNCTION_WORDS = (
    "the", "a", "it", "of", "to", "on", "in", "into", "inside",
    "front", "behind", "left", "right", "top", "from",
)
VERBS = ("fetch", "grab", "get", "pick", "up", "place", "put", "move")
DIALOGUE_WORDS = ("yes", "yeah", "no", "nope")

WORDS = (
    (BOS, EOS, UNK)
    + CATEGORIES
    + HYPERNYMS
    + COLORS
    + SIZES
    + ORDINALS
    + SELECTOR_WORDS
    + FUNCTION_WORDS
    + VERBS
    + DIALOGUE_WORDS
)

_PUNCT = str.maketrans("", "", ".,!?;:\"'")


@dataclass
class Vocabulary:
    words: tuple = WORDS
    index: dict = field(init=False)

    def __post_init__(self):
        self.index = {w: i for i, w in enumerate(self.words)}

    def __len__(self):
        return len(self.words)

    @property
    def bos(self) -> int:
        return self.index[BOS]

    @property
    def eos(self) -> int:
        return self.index[EOS]

    @property
    def unk(self) -> int:
        return self.index[UNK]

    def encode(self, tokens) -> list:
        return [self.index.get(t, self.unk) for t in tokens]

    def decode(self, ids) -> list:
        return [self.words[i] for i in ids if i not in (self.bos, self.eos)]

    def hash(self) -> str:
        return hashlib.sha256(json.dumps(list(self.words)).encode()).hexdigest()

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(list(self.words), f)

    @classmethod
    def load(cls, path) -> "Vocabulary":
        with open(path, encoding="utf-8") as f:
            return cls(words=tuple(json.load(f)))


def tokenize(text: str) -> list:
    """Lowercase, strip punctuation, split on whitespace."""
    return text.lower().translate(_PUNCT).split()


def detokenize(tokens) -> str:
    return " ".join(tokens)
