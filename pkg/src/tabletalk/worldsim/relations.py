"""Geometric relation oracle over table grids.

All relations are pairwise: a subject bounding box held against one
reference object. Directional predicates require adjacency (gap <= G)
and overlap on the orthogonal axis, so a far-away or diagonal subject
satisfies nothing. Coordinates: x grows rightward, y grows toward the
viewer, so in_front = larger y and behind = smaller y.
"""

from __future__ import annotations

import numpy as np

from .objects import RELATIONS, Scene, SceneObject, box_contains

DEFAULT_GAP = 8


def relation_oracle(scene: Scene, subject_box: tuple, ref: SceneObject, gap: int = DEFAULT_GAP) -> set:
    """Return every relation the subject box satisfies w.r.t. `ref`."""
    sx0, sy0, sx1, sy1 = subject_box
    rx0, ry0, rx1, ry1 = ref.bbox
    out = set()

    if ref.is_container and box_contains(ref.interior, subject_box):
        out.add("inside")
    if ref.flat_topped:
        cx = (sx0 + sx1) / 2.0
        cy = (sy0 + sy1) / 2.0
        area = (sx1 - sx0) * (sy1 - sy0)
        if rx0 <= cx < rx1 and ry0 <= cy < ry1 and area <= ref.area:
            out.add("on_top")
    if out:
        # Containment/support rules out the directional predicates by
        # construction (axis intervals overlap); skip the checks.
        return out

    rows_overlap = max(sy0, ry0) < min(sy1, ry1)
    cols_overlap = max(sx0, rx0) < min(sx1, rx1)
    if rows_overlap:
        if sx1 <= rx0 and rx0 - sx1 <= gap:
            out.add("left")
        elif sx0 >= rx1 and sx0 - rx1 <= gap:
            out.add("right")
    if cols_overlap:
        if sy0 >= ry1 and sy0 - ry1 <= gap:
            out.add("in_front")
        elif sy1 <= ry0 and ry0 - sy1 <= gap:
            out.add("behind")
    return out


def relations_between(scene: Scene, subject: SceneObject, ref: SceneObject, gap: int = DEFAULT_GAP) -> set:
    return relation_oracle(scene, subject.bbox, ref, gap=gap)


def cell_posterior_maps(scene: Scene, ref: SceneObject, gap: int = DEFAULT_GAP) -> np.ndarray:
    """Per-cell relation posteriors for a unit (1x1) subject box.

    Returns a (6, H, W) float array in RELATIONS order. Each cell's
    6-vector is the indicator of the relations a unit box at that cell
    satisfies, normalized to sum 1 when non-empty (all-zero otherwise).
    Under these predicates the relations are mutually exclusive, so each
    cell is one-hot or zero.
    """
    h, w = scene.grid_h, scene.grid_w
    maps = np.zeros((len(RELATIONS), h, w), dtype=np.float64)
    rx0, ry0, rx1, ry1 = ref.bbox

    def clamp(lo, hi, bound):
        return max(lo, 0), min(hi, bound)

    if ref.is_container:
        ix0, iy0, ix1, iy1 = ref.interior
        if ix1 > ix0 and iy1 > iy0:
            maps[0, iy0:iy1, ix0:ix1] = 1.0
    # left: unit box at column x has x1 = x+1 <= rx0 and rx0-(x+1) <= gap
    x_lo, x_hi = clamp(rx0 - 1 - gap, rx0, w)
    y_lo, y_hi = clamp(ry0, ry1, h)
    maps[1, y_lo:y_hi, x_lo:x_hi] = 1.0
    x_lo, x_hi = clamp(rx1, rx1 + gap + 1, w)
    maps[2, y_lo:y_hi, x_lo:x_hi] = 1.0
    x_lo, x_hi = clamp(rx0, rx1, w)
    y_lo, y_hi = clamp(ry1, ry1 + gap + 1, h)
    maps[3, y_lo:y_hi, x_lo:x_hi] = 1.0
    y_lo, y_hi = clamp(ry0 - 1 - gap, ry0, h)
    maps[4, y_lo:y_hi, x_lo:x_hi] = 1.0
    if ref.flat_topped:
        x_lo, x_hi = clamp(rx0, rx1, w)
        y_lo, y_hi = clamp(ry0, ry1, h)
        maps[5, y_lo:y_hi, x_lo:x_hi] = 1.0
    return maps


def free_cell_mask(scene: Scene, table: str, ref: SceneObject, relation: str) -> np.ndarray:
    """Cells available for placement sampling.

    Directional relations exclude the reference's own footprint as well as
    every other z0 footprint; inside/on_top keep the reference footprint
    (that is where the object goes).
    """
    h, w = scene.grid_h, scene.grid_w
    mask = np.ones((h, w), dtype=bool)
    for o in scene.objects_on(table):
        if o.z_layer != 0:
            continue
        if o.id == ref.id and relation in ("inside", "on_top"):
            continue
        x0, y0, x1, y1 = o.bbox
        mask[max(y0, 0) : min(y1, h), max(x0, 0) : min(x1, w)] = False
    return mask
