"""Scene generation by seeded rejection sampling."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .objects import (
    CATEGORIES,
    COLORS,
    HALF_EXTENTS,
    SIZES,
    PlacementInfeasible,
    Scene,
    SceneObject,
    bbox_for,
    bbox_within,
    boxes_overlap,
)

MAX_ATTEMPTS = 1000


@dataclass
class SceneConfig:
    grid_h: int = 64
    grid_w: int = 64
    n_pick: int = 5
    n_place: int = 1
    ambiguity: bool = False  # force >=2 pick-table objects sharing (category, color, size)
    cluster: bool = True  # bias objects toward existing ones so relations form
    cluster_prob: float = 0.65
    box_container_prob: float = 0.5
    categories: tuple = CATEGORIES
    colors: tuple = COLORS
    sizes: tuple = SIZES
    place_categories: Optional[tuple] = None  # restrict place-table categories
    place_containers_only: bool = False

    def validate(self) -> None:
        if not (0 <= self.n_pick <= 12 and 0 <= self.n_place <= 12):
            raise ValueError("object counts must lie in [0, 12]")
        if self.grid_h < 16 or self.grid_w < 16:
            raise ValueError("grid must be at least 16x16")
        if self.ambiguity and self.n_pick < 2:
            raise ValueError("ambiguity requires n_pick >= 2")


def _sample_center(rng, cfg, hx, hy, existing):
    if cfg.cluster and existing and rng.random() < cfg.cluster_prob:
        anchor = existing[rng.integers(len(existing))]
        ax, ay = anchor.center
        dx = int(rng.integers(-14, 15))
        dy = int(rng.integers(-14, 15))
        x = min(max(ax + dx, hx), cfg.grid_w - hx - 1)
        y = min(max(ay + dy, hy), cfg.grid_h - hy - 1)
        return (x, y)
    x = int(rng.integers(hx, cfg.grid_w - hx))
    y = int(rng.integers(hy, cfg.grid_h - hy))
    return (x, y)


def _place_object(rng, cfg, scene, table, idx, category=None, color=None, size=None):
    existing = scene.objects_on(table)
    for _ in range(MAX_ATTEMPTS):
        cat = category or cfg.categories[rng.integers(len(cfg.categories))]
        col = color or cfg.colors[rng.integers(len(cfg.colors))]
        siz = size or cfg.sizes[rng.integers(len(cfg.sizes))]
        is_container = cat == "bowl" or (
            cat == "box" and rng.random() < cfg.box_container_prob
        )
        if cfg.place_containers_only and table == "place" and not is_container:
            continue
        hx, hy = HALF_EXTENTS[cat][siz]
        center = _sample_center(rng, cfg, hx, hy, existing)
        bbox = bbox_for(cat, siz, center)
        if not bbox_within(bbox, cfg.grid_h, cfg.grid_w):
            continue
        if any(boxes_overlap(bbox, o.bbox) for o in existing):
            continue
        obj = SceneObject(
            id=f"o{idx}",
            category=cat,
            color=col,
            size=siz,
            center=center,
            is_container=is_container,
            table=table,
        )
        scene.objects.append(obj)
        return obj
    raise PlacementInfeasible(
        f"could not place object {idx} on {table} table after {MAX_ATTEMPTS} attempts"
    )


def generate_scene(config: SceneConfig, seed: int) -> Scene:
    """Generate a scene with config.n_pick / config.n_place objects per table.

    Identical (config, seed) pairs produce byte-identical scenes.
    """
    config.validate()
    rng = np.random.default_rng(np.random.PCG64(seed))
    scene = Scene(
        grid_h=config.grid_h,
        grid_w=config.grid_w,
        rng_seed=seed,
        scene_id=f"s{seed}",
    )
    idx = 1
    n_free = config.n_pick - 2 if config.ambiguity else config.n_pick
    for _ in range(max(n_free, 0)):
        _place_object(rng, config, scene, "pick", idx)
        idx += 1
    if config.ambiguity:
        # A duplicated (category, color, size) pair guarantees an ambiguous
        # attribute expression exists.
        pick_objs = scene.objects_on("pick")
        if pick_objs:
            proto = pick_objs[int(rng.integers(len(pick_objs)))]
            cat, col, siz = proto.category, proto.color, proto.size
        else:
            cat = config.categories[rng.integers(len(config.categories))]
            col = config.colors[rng.integers(len(config.colors))]
            siz = config.sizes[rng.integers(len(config.sizes))]
            _place_object(rng, config, scene, "pick", idx, cat, col, siz)
            idx += 1
        _place_object(rng, config, scene, "pick", idx, cat, col, siz)
        idx += 1
        while len(scene.objects_on("pick")) < config.n_pick:
            _place_object(rng, config, scene, "pick", idx)
            idx += 1
    place_cats = config.place_categories
    for _ in range(config.n_place):
        cat = None
        if place_cats:
            cat = place_cats[int(rng.integers(len(place_cats)))]
        _place_object(rng, config, scene, "place", idx, category=cat)
        idx += 1
    return scene
