"""Pick and place mechanics.

Operations are value-pure: they return outcomes carrying a new Scene and
never mutate their input. Grasp success is a Bernoulli draw from the
seed; everything else is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .objects import (
    GripperOccupied,
    NothingHeld,
    ObjectBuried,
    OutOfBounds,
    PlacementInfeasible,
    Scene,
    bbox_for,
    bbox_within,
    box_contains,
    boxes_overlap,
)


@dataclass
class PickOutcome:
    scene: Scene
    success: bool
    object_id: str


@dataclass
class PlaceOutcome:
    scene: Scene
    kind: str  # placed | inside | stacked | nudged
    object_id: str
    requested: tuple
    final_center: tuple
    z_layer: int
    support_id: Optional[str] = None


def pick(scene: Scene, object_id: str, grasp_success_prob: float, seed: int) -> PickOutcome:
    if scene.gripper is not None:
        raise GripperOccupied(f"already holding {scene.gripper.id!r}")
    obj = scene.find(object_id)
    for other in scene.objects_on(obj.table):
        if other.id == obj.id or other.z_layer <= obj.z_layer:
            continue
        ox, oy = other.center
        x0, y0, x1, y1 = obj.bbox
        if x0 <= ox < x1 and y0 <= oy < y1:
            raise ObjectBuried(f"{other.id!r} is stacked on {obj.id!r}")
    rng = np.random.default_rng(np.random.PCG64(seed))
    success = bool(rng.random() < grasp_success_prob)
    new = scene.copy()
    if success:
        held = new.find(object_id)
        new.objects = [o for o in new.objects if o.id != object_id]
        held.z_layer = 0
        new.gripper = held
        new.log_event("pick", object_id=object_id, success=True)
    else:
        new.log_event("pick", object_id=object_id, success=False)
    return PickOutcome(scene=new, success=success, object_id=object_id)


def _nearest_free_center(scene, table, category, size, u, v):
    """Brute-force scan for the closest legal center (grid-fit, no overlap)."""
    blockers = [o.bbox for o in scene.objects_on(table) if o.z_layer == 0]
    best = None
    best_key = None
    for y in range(scene.grid_h):
        for x in range(scene.grid_w):
            bbox = bbox_for(category, size, (x, y))
            if not bbox_within(bbox, scene.grid_h, scene.grid_w):
                continue
            if any(boxes_overlap(bbox, b) for b in blockers):
                continue
            key = ((x - u) ** 2 + (y - v) ** 2, y, x)
            if best_key is None or key < best_key:
                best_key = key
                best = (x, y)
    return best


def place(scene: Scene, location: tuple, table: str) -> PlaceOutcome:
    if scene.gripper is None:
        raise NothingHeld("gripper holds nothing")
    u, v = location
    if not (0 <= u < scene.grid_w and 0 <= v < scene.grid_h):
        raise OutOfBounds(f"location {location!r} outside {scene.grid_w}x{scene.grid_h} grid")

    new = scene.copy()
    obj = new.gripper
    others = new.objects_on(table)
    bbox = bbox_for(obj.category, obj.size, (u, v))

    kind = "placed"
    final = (u, v)
    z = 0
    support = None
    container = next(
        (
            o
            for o in others
            if o.is_container
            and o.z_layer == 0
            and o.interior[0] <= u < o.interior[2]
            and o.interior[1] <= v < o.interior[3]
        ),
        None,
    )
    if container is not None:
        kind = "inside"
        z = container.z_layer + 1
        support = container.id
    else:
        supports = [
            o
            for o in others
            if o.flat_topped and box_contains(o.bbox, bbox) and obj.area <= o.area
        ]
        if supports:
            top = max(supports, key=lambda o: (o.z_layer, o.id))
            kind = "stacked"
            z = top.z_layer + 1
            support = top.id
        else:
            blocked = not bbox_within(bbox, new.grid_h, new.grid_w) or any(
                boxes_overlap(bbox, o.bbox) for o in others if o.z_layer == 0
            )
            if blocked:
                nudged = _nearest_free_center(new, table, obj.category, obj.size, u, v)
                if nudged is None:
                    raise PlacementInfeasible("no free cell for the held object")
                kind = "nudged"
                final = nudged

    obj.center = final
    obj.z_layer = z
    obj.table = table
    new.objects.append(obj)
    new.gripper = None
    new.log_event(
        "place",
        object_id=obj.id,
        table=table,
        requested=[u, v],
        final=[final[0], final[1]],
        outcome=kind,
        z_layer=z,
        support=support,
    )
    return PlaceOutcome(
        scene=new,
        kind=kind,
        object_id=obj.id,
        requested=(u, v),
        final_center=final,
        z_layer=z,
        support_id=support,
    )
