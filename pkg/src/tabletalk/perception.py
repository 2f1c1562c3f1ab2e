"""Candidate feature bundles consumed by the grounding networks.

Stands in for a detector + visual backbone: each visible object becomes
an ObjectCandidate with an (optionally jittered) bounding box, a binary
mask, an engineered appearance vector, the 5-d normalized location
vector, and two neighbor-context encodings (same-category and
category-agnostic, each up to 5 nearest neighbors).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .seeding import derive_seed
from .worldsim import CATEGORIES, COLORS, SIZES, Scene, iou

APPEARANCE_DIM = len(COLORS) + len(CATEGORIES) + len(SIZES) + 1  # 18
LOC5_DIM = 5
MAX_CONTEXT = 5
SAME_CTX_DIM = 5  # (dx0, dy0, dx1, dy1)/scale, area ratio
ANY_CTX_DIM = APPEARANCE_DIM + 5  # neighbor appearance + offset 5-vector

_COLOR_INDEX = {c: i for i, c in enumerate(COLORS)}
_CATEGORY_INDEX = {c: i for i, c in enumerate(CATEGORIES)}
_SIZE_INDEX = {s: i for i, s in enumerate(SIZES)}


@dataclass
class JitterConfig:
    max_shift: int = 0  # uniform per-edge perturbation in cells
    max_resamples: int = 20  # keep IoU(jittered, true) >= 0.5


@dataclass
class ObjectCandidate:
    id: str
    bbox: tuple  # possibly jittered, half-open cells
    true_bbox: tuple
    mask: np.ndarray
    appearance: np.ndarray  # (18,)
    loc5: np.ndarray  # (5,)
    same_cat_context: np.ndarray = field(default=None)  # (5, 5), zero-padded
    any_cat_context: np.ndarray = field(default=None)  # (5, 23), zero-padded
    n_same: int = 0
    n_any: int = 0


def appearance_vector(obj) -> np.ndarray:
    v = np.zeros(APPEARANCE_DIM, dtype=np.float64)
    v[_COLOR_INDEX[obj.color]] = 1.0
    v[len(COLORS) + _CATEGORY_INDEX[obj.category]] = 1.0
    v[len(COLORS) + len(CATEGORIES) + _SIZE_INDEX[obj.size]] = 1.0
    v[-1] = obj.area / 1.0
    return v


def _loc5(bbox, grid_h, grid_w) -> np.ndarray:
    x0, y0, x1, y1 = bbox
    return np.array(
        [
            x0 / grid_w,
            y0 / grid_h,
            x1 / grid_w,
            y1 / grid_h,
            (x1 - x0) * (y1 - y0) / (grid_w * grid_h),
        ],
        dtype=np.float64,
    )


def _jitter_bbox(bbox, grid_h, grid_w, cfg: JitterConfig, rng) -> tuple:
    if cfg.max_shift <= 0:
        return bbox
    x0, y0, x1, y1 = bbox
    for _ in range(cfg.max_resamples):
        d = rng.integers(-cfg.max_shift, cfg.max_shift + 1, size=4)
        j = (
            max(int(x0 + d[0]), 0),
            max(int(y0 + d[1]), 0),
            min(int(x1 + d[2]), grid_w),
            min(int(y1 + d[3]), grid_h),
        )
        # strict: IoU of exactly 0.5 (e.g. a 3x3 box shifted one cell)
        # would fail the IoU>0.5 correctness criterion downstream
        if j[0] < j[2] and j[1] < j[3] and iou(j, bbox) > 0.5:
            return j
    return bbox


def _offset5(nb_bbox, own_bbox, scale) -> np.ndarray:
    own_area = (own_bbox[2] - own_bbox[0]) * (own_bbox[3] - own_bbox[1])
    nb_area = (nb_bbox[2] - nb_bbox[0]) * (nb_bbox[3] - nb_bbox[1])
    return np.array(
        [
            (nb_bbox[0] - own_bbox[0]) / scale,
            (nb_bbox[1] - own_bbox[1]) / scale,
            (nb_bbox[2] - own_bbox[2]) / scale,
            (nb_bbox[3] - own_bbox[3]) / scale,
            nb_area / own_area,
        ],
        dtype=np.float64,
    )


def _center(bbox):
    return ((bbox[0] + bbox[2]) / 2.0, (bbox[1] + bbox[3]) / 2.0)


def encode_candidates(
    scene: Scene,
    table: str,
    jitter: JitterConfig | None = None,
    seed: int = 0,
) -> list:
    """Encode every object on `table` as an ObjectCandidate."""
    jitter = jitter or JitterConfig()
    objects = scene.objects_on(table)
    grid_h, grid_w = scene.grid_h, scene.grid_w
    grid_area = grid_h * grid_w

    boxes = {}
    for obj in objects:
        rng = np.random.default_rng(np.random.PCG64(derive_seed(seed, "jitter", obj.id)))
        boxes[obj.id] = _jitter_bbox(obj.bbox, grid_h, grid_w, jitter, rng)

    candidates = []
    for obj in objects:
        bbox = boxes[obj.id]
        app = appearance_vector(obj)
        app[-1] = obj.area / grid_area
        mask = np.zeros((grid_h, grid_w), dtype=np.uint8)
        x0, y0, x1, y1 = obj.bbox
        mask[y0:y1, x0:x1] = 1
        scale = math.hypot(bbox[2] - bbox[0], bbox[3] - bbox[1])
        cx, cy = _center(bbox)

        def nearest(others):
            ranked = sorted(
                others,
                key=lambda o: (
                    math.hypot(_center(boxes[o.id])[0] - cx, _center(boxes[o.id])[1] - cy),
                    o.id,
                ),
            )
            return ranked[:MAX_CONTEXT]

        same = nearest([o for o in objects if o.id != obj.id and o.category == obj.category])
        anyc = nearest([o for o in objects if o.id != obj.id])

        same_ctx = np.zeros((MAX_CONTEXT, SAME_CTX_DIM), dtype=np.float64)
        for i, nb in enumerate(same):
            same_ctx[i] = _offset5(boxes[nb.id], bbox, scale)
        any_ctx = np.zeros((MAX_CONTEXT, ANY_CTX_DIM), dtype=np.float64)
        for i, nb in enumerate(anyc):
            nb_app = appearance_vector(nb)
            nb_app[-1] = nb.area / grid_area
            any_ctx[i] = np.concatenate([nb_app, _offset5(boxes[nb.id], bbox, scale)])

        candidates.append(
            ObjectCandidate(
                id=obj.id,
                bbox=bbox,
                true_bbox=obj.bbox,
                mask=mask,
                appearance=app,
                loc5=_loc5(bbox, grid_h, grid_w),
                same_cat_context=same_ctx,
                any_cat_context=any_ctx,
                n_same=len(same),
                n_any=len(anyc),
            )
        )
    return candidates
