"""Pixelwise placement-probability prediction and sampling."""

from .classifier import (
    AuxClassifierNet,
    LearnedAuxClassifier,
    OracleAuxClassifier,
    aux_posterior,
    pretrain_aux_classifier,
)
from .maps import (
    NoMassAvailable,
    ProbMaps,
    argmax_location,
    attach_scene_masks,
    export_heatmap_json,
    export_heatmap_png,
    ideal_maps,
    maps_for_scene,
    predict_maps,
    sample_location,
)
from .network import PlacementNet, stack_input
from .train import (
    NonFiniteLoss,
    PlacementExample,
    build_placement_scenes,
    relnet_step,
    satisfaction_rates,
    train_placement,
)

__all__ = [
    "ProbMaps",
    "NoMassAvailable",
    "predict_maps",
    "maps_for_scene",
    "attach_scene_masks",
    "ideal_maps",
    "sample_location",
    "argmax_location",
    "export_heatmap_png",
    "export_heatmap_json",
    "PlacementNet",
    "stack_input",
    "OracleAuxClassifier",
    "LearnedAuxClassifier",
    "AuxClassifierNet",
    "aux_posterior",
    "pretrain_aux_classifier",
    "relnet_step",
    "train_placement",
    "build_placement_scenes",
    "satisfaction_rates",
    "PlacementExample",
    "NonFiniteLoss",
]
