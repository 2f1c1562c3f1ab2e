"""Deterministic 2D tabletop world."""

from .generate import SceneConfig, generate_scene
from .mechanics import PickOutcome, PlaceOutcome, pick, place
from .objects import (
    CATEGORIES,
    COLORS,
    RELATION_INDEX,
    RELATIONS,
    SIZES,
    TABLES,
    GripperOccupied,
    NothingHeld,
    ObjectBuried,
    ObjectNotFound,
    OutOfBounds,
    PlacementInfeasible,
    Scene,
    SceneObject,
    WorldError,
    bbox_for,
    box_contains,
    boxes_overlap,
    iou,
)
from .relations import (
    DEFAULT_GAP,
    cell_posterior_maps,
    free_cell_mask,
    relation_oracle,
    relations_between,
)
from .render import CH_INTERIOR, CH_OCCUPANCY, CH_Z, N_CHANNELS, object_mask, render

__all__ = [
    "CATEGORIES",
    "COLORS",
    "SIZES",
    "TABLES",
    "RELATIONS",
    "RELATION_INDEX",
    "DEFAULT_GAP",
    "N_CHANNELS",
    "CH_OCCUPANCY",
    "CH_Z",
    "CH_INTERIOR",
    "Scene",
    "SceneObject",
    "SceneConfig",
    "WorldError",
    "PlacementInfeasible",
    "GripperOccupied",
    "ObjectNotFound",
    "ObjectBuried",
    "NothingHeld",
    "OutOfBounds",
    "PickOutcome",
    "PlaceOutcome",
    "generate_scene",
    "render",
    "object_mask",
    "pick",
    "place",
    "relation_oracle",
    "relations_between",
    "cell_posterior_maps",
    "free_cell_mask",
    "bbox_for",
    "boxes_overlap",
    "box_contains",
    "iou",
]
