"""Ground-truth world state: objects, tables, scenes, serialization."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

CATEGORIES = ("cup", "box", "bowl", "ball", "banana", "bottle", "teddy", "plate")
COLORS = ("red", "green", "blue", "yellow", "black", "white")
SIZES = ("small", "medium", "large")
TABLES = ("pick", "place")

# Fixed channel/label order; placement maps and posteriors index by this.
RELATIONS = ("inside", "left", "right", "in_front", "behind", "on_top")
RELATION_INDEX = {r: i for i, r in enumerate(RELATIONS)}

SCENE_SCHEMA_VERSION = 1

# Footprint half-extents (hx, hy) per category and size. Containers
# (bowl, box) keep half-extents >= 2 so a 1-cell wall leaves a nonempty
# interior.
HALF_EXTENTS = {
    "cup": {"small": (1, 1), "medium": (2, 2), "large": (3, 3)},
    "box": {"small": (2, 2), "medium": (3, 3), "large": (5, 5)},
    "bowl": {"small": (2, 2), "medium": (3, 3), "large": (4, 4)},
    "ball": {"small": (1, 1), "medium": (2, 2), "large": (3, 3)},
    "banana": {"small": (2, 1), "medium": (3, 1), "large": (4, 2)},
    "bottle": {"small": (1, 1), "medium": (2, 1), "large": (2, 2)},
    "teddy": {"small": (2, 1), "medium": (2, 2), "large": (3, 3)},
    "plate": {"small": (2, 2), "medium": (4, 4), "large": (5, 5)},
}

# Categories that may be generated as open containers.
CONTAINER_CATEGORIES = ("bowl", "box")
# Categories with a flat, stackable top when not a container.
FLAT_CATEGORIES = ("box", "plate")


class WorldError(Exception):
    """Base class for simulator errors."""


class PlacementInfeasible(WorldError):
    pass


class GripperOccupied(WorldError):
    pass


class ObjectNotFound(WorldError):
    pass


class ObjectBuried(WorldError):
    pass


class NothingHeld(WorldError):
    pass


class OutOfBounds(WorldError):
    pass


@dataclass
class SceneObject:
    id: str
    category: str
    color: str
    size: str
    center: tuple  # (x, y) in cells
    z_layer: int = 0
    is_container: bool = False
    table: str = "pick"

    @property
    def half_extents(self) -> tuple:
        return HALF_EXTENTS[self.category][self.size]

    @property
    def bbox(self) -> tuple:
        """Half-open footprint (x0, y0, x1, y1)."""
        hx, hy = self.half_extents
        x, y = self.center
        return (x - hx, y - hy, x + hx + 1, y + hy + 1)

    @property
    def area(self) -> int:
        x0, y0, x1, y1 = self.bbox
        return (x1 - x0) * (y1 - y0)

    @property
    def interior(self) -> Optional[tuple]:
        """Interior sub-rectangle for containers (footprint minus 1-cell wall)."""
        if not self.is_container:
            return None
        x0, y0, x1, y1 = self.bbox
        return (x0 + 1, y0 + 1, x1 - 1, y1 - 1)

    @property
    def flat_topped(self) -> bool:
        return self.category in FLAT_CATEGORIES and not self.is_container

    def to_dict(self) -> dict:
        # bbox/interior are derived but serialized so UI clients never
        # have to re-derive geometry from category/size tables
        return {
            "id": self.id,
            "category": self.category,
            "color": self.color,
            "size": self.size,
            "center": list(self.center),
            "z_layer": self.z_layer,
            "is_container": self.is_container,
            "table": self.table,
            "bbox": list(self.bbox),
            "interior": list(self.interior) if self.is_container else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SceneObject":
        return cls(
            id=d["id"],
            category=d["category"],
            color=d["color"],
            size=d["size"],
            center=tuple(d["center"]),
            z_layer=d["z_layer"],
            is_container=d["is_container"],
            table=d["table"],
        )


@dataclass
class Scene:
    grid_h: int = 64
    grid_w: int = 64
    objects: list = field(default_factory=list)
    gripper: Optional[SceneObject] = None
    event_log: list = field(default_factory=list)
    rng_seed: int = 0
    scene_id: str = ""

    def objects_on(self, table: str) -> list:
        if table not in TABLES:
            raise ObjectNotFound(f"no such table: {table!r}")
        return [o for o in self.objects if o.table == table]

    def find(self, object_id: str) -> SceneObject:
        for o in self.objects:
            if o.id == object_id:
                return o
        raise ObjectNotFound(f"no object with id {object_id!r}")

    def log_event(self, kind: str, **payload) -> None:
        self.event_log.append({"tick": len(self.event_log), "kind": kind, **payload})

    def copy(self) -> "Scene":
        return copy.deepcopy(self)

    def to_dict(self) -> dict:
        return {
            "schema": SCENE_SCHEMA_VERSION,
            "grid": {"h": self.grid_h, "w": self.grid_w},
            "objects": [o.to_dict() for o in self.objects],
            "gripper": self.gripper.to_dict() if self.gripper else None,
            "event_log": self.event_log,
            "rng_seed": self.rng_seed,
            "scene_id": self.scene_id,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()

    @classmethod
    def from_dict(cls, d: dict) -> "Scene":
        if d.get("schema") != SCENE_SCHEMA_VERSION:
            raise ValueError(f"unsupported scene schema: {d.get('schema')!r}")
        return cls(
            grid_h=d["grid"]["h"],
            grid_w=d["grid"]["w"],
            objects=[SceneObject.from_dict(o) for o in d["objects"]],
            gripper=SceneObject.from_dict(d["gripper"]) if d.get("gripper") else None,
            event_log=list(d.get("event_log", [])),
            rng_seed=d.get("rng_seed", 0),
            scene_id=d.get("scene_id", ""),
        )

    @classmethod
    def from_json(cls, s: str) -> "Scene":
        return cls.from_dict(json.loads(s))


def bbox_for(category: str, size: str, center: tuple) -> tuple:
    hx, hy = HALF_EXTENTS[category][size]
    x, y = center
    return (x - hx, y - hy, x + hx + 1, y + hy + 1)


def bbox_within(bbox: tuple, grid_h: int, grid_w: int) -> bool:
    x0, y0, x1, y1 = bbox
    return x0 >= 0 and y0 >= 0 and x1 <= grid_w and y1 <= grid_h


def boxes_overlap(a: tuple, b: tuple) -> bool:
    return a[0] < b[2] and b[0] < a[2] and a[1] < b[3] and b[1] < a[3]


def box_contains(outer: tuple, inner: tuple) -> bool:
    return (
        inner[0] >= outer[0]
        and inner[1] >= outer[1]
        and inner[2] <= outer[2]
        and inner[3] <= outer[3]
    )


def iou(a: tuple, b: tuple) -> float:
    ix0, iy0 = max(a[0], b[0]), max(a[1], b[1])
    ix1, iy1 = min(a[2], b[2]), min(a[3], b[3])
    if ix0 >= ix1 or iy0 >= iy1:
        return 0.0
    inter = (ix1 - ix0) * (iy1 - iy0)
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    return inter / (area_a + area_b - inter)
