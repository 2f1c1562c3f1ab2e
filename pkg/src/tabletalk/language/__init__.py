"""Grammar-driven expression synthesis, tokenizer, lexicon, datasets."""

from .dataset import (
    CLAUSE_KINDS,
    DatasetBuildError,
    DatasetConfig,
    GroundingDataset,
    Record,
    build_dataset,
)
from .grammar import (
    AttributeDesc,
    ExpressionSample,
    LocationDesc,
    NoDiscriminativeExpression,
    RelationalDesc,
    denote,
    generate_expression,
    make_pick_instruction,
    make_place_instruction,
    strip_pick_verbs,
)
from .lexicon import LEXICON, NoRelationFound, spot_relation, spot_relation_span
from .vocab import BOS, EOS, UNK, Vocabulary, detokenize, tokenize

__all__ = [
    "Vocabulary",
    "tokenize",
    "detokenize",
    "BOS",
    "EOS",
    "UNK",
    "LEXICON",
    "spot_relation",
    "spot_relation_span",
    "NoRelationFound",
    "AttributeDesc",
    "LocationDesc",
    "RelationalDesc",
    "ExpressionSample",
    "denote",
    "generate_expression",
    "NoDiscriminativeExpression",
    "make_pick_instruction",
    "make_place_instruction",
    "strip_pick_verbs",
    "CLAUSE_KINDS",
    "DatasetConfig",
    "DatasetBuildError",
    "GroundingDataset",
    "Record",
    "build_dataset",
]
