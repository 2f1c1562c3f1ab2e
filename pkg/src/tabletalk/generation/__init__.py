"""Self-referential expression generation: decoder, beam search, reranking."""

from .beam import BeamHypothesis, beam_search
from .decoder import ExpressionDecoder, TargetVisualRep, decode_nll, mmi_loss, mmi_margin
from .rerank import discriminative_margin, rerank

__all__ = [
    "ExpressionDecoder",
    "TargetVisualRep",
    "decode_nll",
    "mmi_loss",
    "mmi_margin",
    "BeamHypothesis",
    "beam_search",
    "rerank",
    "discriminative_margin",
]
