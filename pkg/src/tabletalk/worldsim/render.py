"""Top-down tensor rendering of a table."""

from __future__ import annotations

import numpy as np

from .objects import CATEGORIES, COLORS, Scene

# Channel layout: 0 occupancy, 1..6 color one-hot, 7..14 category one-hot,
# 15 z_layer, 16 container-interior mask.
N_CHANNELS = 1 + len(COLORS) + len(CATEGORIES) + 1 + 1
CH_OCCUPANCY = 0
CH_COLOR = 1
CH_CATEGORY = 1 + len(COLORS)
CH_Z = CH_CATEGORY + len(CATEGORIES)
CH_INTERIOR = CH_Z + 1

_COLOR_INDEX = {c: i for i, c in enumerate(COLORS)}
_CATEGORY_INDEX = {c: i for i, c in enumerate(CATEGORIES)}


def render(scene: Scene, table: str) -> np.ndarray:
    """Render one table as a (C, H, W) float32 tensor.

    Cells covered by several stacked objects show the topmost one; empty
    cells are all-zero. Deterministic function of the scene.
    """
    h, w = scene.grid_h, scene.grid_w
    img = np.zeros((N_CHANNELS, h, w), dtype=np.float32)
    top_z = np.full((h, w), -1, dtype=np.int32)
    for obj in sorted(scene.objects_on(table), key=lambda o: (o.z_layer, o.id)):
        x0, y0, x1, y1 = obj.bbox
        ys, xs = np.mgrid[max(y0, 0) : min(y1, h), max(x0, 0) : min(x1, w)]
        sel = obj.z_layer >= top_z[ys, xs]
        ys, xs = ys[sel], xs[sel]
        img[CH_OCCUPANCY, ys, xs] = 1.0
        img[CH_COLOR : CH_COLOR + len(COLORS), ys, xs] = 0.0
        img[CH_CATEGORY : CH_CATEGORY + len(CATEGORIES), ys, xs] = 0.0
        img[CH_COLOR + _COLOR_INDEX[obj.color], ys, xs] = 1.0
        img[CH_CATEGORY + _CATEGORY_INDEX[obj.category], ys, xs] = 1.0
        img[CH_Z, ys, xs] = float(obj.z_layer)
        top_z[ys, xs] = obj.z_layer
        if obj.is_container:
            ix0, iy0, ix1, iy1 = obj.interior
            img[CH_INTERIOR, max(iy0, 0) : min(iy1, h), max(ix0, 0) : min(ix1, w)] = 1.0
    return img


def object_mask(scene: Scene, object_id: str) -> np.ndarray:
    """Binary (H, W) footprint mask for one object."""
    obj = scene.find(object_id)
    h, w = scene.grid_h, scene.grid_w
    mask = np.zeros((h, w), dtype=np.float32)
    x0, y0, x1, y1 = obj.bbox
    mask[max(y0, 0) : min(y1, h), max(x0, 0) : min(x1, w)] = 1.0
    return mask
