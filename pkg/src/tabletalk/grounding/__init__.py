"""Modular referring-expression comprehension and triplet training."""

from .features import CandidateFeatures, featurize
from .joint import JointModel
from .losses import hinge_loss
from .model import (
    EncodedExpression,
    GroundingConfig,
    GroundingNet,
    MatchResult,
    UnknownToken,
    comprehend,
    encode_expression,
    match_score,
    weighted_score,
)
from .train import NonFiniteLoss, prepare_examples, train_grounding, validation_accuracy

__all__ = [
    "CandidateFeatures",
    "featurize",
    "JointModel",
    "hinge_loss",
    "GroundingConfig",
    "GroundingNet",
    "EncodedExpression",
    "MatchResult",
    "UnknownToken",
    "encode_expression",
    "match_score",
    "weighted_score",
    "comprehend",
    "train_grounding",
    "validation_accuracy",
    "prepare_examples",
    "NonFiniteLoss",
]
