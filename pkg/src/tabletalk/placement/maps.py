"""ProbMaps: per-relation placement score maps and location sampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import torch

from ..worldsim import (
    RELATION_INDEX,
    RELATIONS,
    Scene,
    cell_posterior_maps,
    object_mask,
    render,
)

DIRECTIONAL = ("left", "right", "in_front", "behind")


class NoMassAvailable(Exception):
    pass


@dataclass
class ProbMaps:
    gamma: np.ndarray  # (6, H, W), entries in [0, 1]
    ref_footprint: Optional[np.ndarray] = None  # bool (H, W)
    occupied: Optional[np.ndarray] = None  # bool (H, W), other z0 footprints

    def __post_init__(self):
        if self.gamma.shape[0] != len(RELATIONS):
            raise ValueError(f"expected {len(RELATIONS)} channels, got {self.gamma.shape[0]}")
        if self.gamma.min() < -1e-9 or self.gamma.max() > 1 + 1e-9:
            raise ValueError("gamma entries must lie in [0, 1]")

    def channel(self, relation: str) -> np.ndarray:
        return self.gamma[RELATION_INDEX[relation]]

    def available_mask(self, relation: str) -> np.ndarray:
        mask = np.ones(self.gamma.shape[1:], dtype=bool)
        if self.occupied is not None:
            mask &= ~self.occupied
        if relation in DIRECTIONAL and self.ref_footprint is not None:
            mask &= ~self.ref_footprint
        return mask

    def masked_distribution(self, relation: str) -> np.ndarray:
        masked = self.channel(relation) * self.available_mask(relation)
        total = masked.sum()
        if total <= 0:
            raise NoMassAvailable(f"no placement mass for {relation!r}")
        return masked / total


def predict_maps(scene_image, ref_mask, net) -> ProbMaps:
    """Run the placement net; raises on grid mismatch."""
    from .network import stack_input

    x = stack_input(scene_image, ref_mask)
    with torch.no_grad():
        gamma = net(x).numpy().astype(np.float64)
    return ProbMaps(gamma=gamma)


def attach_scene_masks(maps: ProbMaps, scene: Scene, table: str, ref_id: str) -> ProbMaps:
    ref = scene.find(ref_id)
    h, w = scene.grid_h, scene.grid_w
    footprint = object_mask(scene, ref_id).astype(bool)
    occupied = np.zeros((h, w), dtype=bool)
    for o in scene.objects_on(table):
        if o.id == ref.id or o.z_layer != 0:
            continue
        x0, y0, x1, y1 = o.bbox
        occupied[max(y0, 0) : min(y1, h), max(x0, 0) : min(x1, w)] = True
    maps.ref_footprint = footprint
    maps.occupied = occupied
    return maps


def maps_for_scene(scene: Scene, table: str, ref_id: str, net) -> ProbMaps:
    image = render(scene, table)
    mask = object_mask(scene, ref_id)
    return attach_scene_masks(predict_maps(image, mask, net), scene, table, ref_id)


def ideal_maps(scene: Scene, table: str, ref_id: str) -> ProbMaps:
    """Oracle-derived maps: uniform over the cells satisfying each relation."""
    ref = scene.find(ref_id)
    gamma = (cell_posterior_maps(scene, ref) > 0).astype(np.float64)
    return attach_scene_masks(ProbMaps(gamma=gamma), scene, table, ref_id)


def sample_location(maps: ProbMaps, relation: str, seed: int) -> tuple:
    """Draw (u, v) from the renormalized, masked relation channel."""
    dist = maps.masked_distribution(relation)
    rng = np.random.default_rng(np.random.PCG64(seed))
    flat = dist.ravel()
    idx = int(rng.choice(len(flat), p=flat))
    h, w = dist.shape
    return (idx % w, idx // w)


def argmax_location(maps: ProbMaps, relation: str) -> tuple:
    dist = maps.masked_distribution(relation)
    idx = int(np.argmax(dist))
    return (idx % dist.shape[1], idx // dist.shape[1])


def export_heatmap_png(maps: ProbMaps, relation: str, path) -> None:
    """Linear grayscale PNG: 0 -> black, 1 -> white."""
    from PIL import Image

    channel = np.clip(maps.channel(relation), 0.0, 1.0)
    Image.fromarray((channel * 255).astype(np.uint8), mode="L").save(path)


def export_heatmap_json(maps: ProbMaps, relation: str) -> list:
    return [[float(v) for v in row] for row in maps.channel(relation)]
