"""Auxiliary relation classifier supplying the placement learning signal.

Scoring a hallucinated placement: a generic object footprint is
"implanted" at a pixel location and the classifier returns a posterior
over the six relations w.r.t. the masked reference. Oracle mode reads
the geometric oracle directly; learned mode is a small CNN pretrained
against the oracle and frozen afterwards.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn as nn

from ..seeding import derive_seed
from ..worldsim import (
    RELATIONS,
    SceneConfig,
    cell_posterior_maps,
    generate_scene,
    object_mask,
    render,
)

IMPLANT_HALF = 1  # generic 3x3 footprint


class OracleAuxClassifier:
    """Indicator posterior from the geometric oracle, normalized to sum 1."""

    mode = "oracle"

    def __init__(self, scene, ref):
        self.maps = cell_posterior_maps(scene, ref)

    def posterior(self, cells, image=None, ref_mask=None) -> np.ndarray:
        us = np.asarray([c[0] for c in cells])
        vs = np.asarray([c[1] for c in cells])
        return self.maps[:, vs, us].T.copy()


class AuxClassifierNet(nn.Module):
    """Relation classifier over a hallucinated scene.

    Each relation is the existence of a local implant-reference
    configuration, so features max-pool (an average would wash the
    single informative site out of a 64x64 grid).
    """

    def __init__(self, in_channels: int):
        super().__init__()
        self.features = nn.Sequential(
            nn.Conv2d(in_channels, 24, 3, stride=2, padding=1),
            nn.ReLU(inplace=True),
            nn.Conv2d(24, 48, 3, stride=2, padding=1),
            nn.ReLU(inplace=True),
            nn.Conv2d(48, 48, 3, stride=2, padding=1),
            nn.ReLU(inplace=True),
            nn.AdaptiveMaxPool2d(1),
        )
        self.head = nn.Sequential(nn.Flatten(), nn.Linear(48, 48), nn.ReLU(), nn.Linear(48, len(RELATIONS)))

    def forward(self, x):
        return self.head(self.features(x))


def implant_masks(h, w, cells) -> np.ndarray:
    out = np.zeros((len(cells), 1, h, w), dtype=np.float32)
    for i, (u, v) in enumerate(cells):
        x0, x1 = max(u - IMPLANT_HALF, 0), min(u + IMPLANT_HALF + 1, w)
        y0, y1 = max(v - IMPLANT_HALF, 0), min(v + IMPLANT_HALF + 1, h)
        out[i, 0, y0:y1, x0:x1] = 1.0
    return out


def offset_channels(h, w, cells) -> np.ndarray:
    """Signed normalized (dx, dy) grids relative to each implant cell.

    Cell-exact geometry (adjacency gaps, row overlap) survives the
    classifier's downsampling as channel values rather than spatial
    detail.
    """
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float32)
    out = np.zeros((len(cells), 2, h, w), dtype=np.float32)
    for i, (u, v) in enumerate(cells):
        out[i, 0] = (xs - u) / w
        out[i, 1] = (ys - v) / h
    return out


class LearnedAuxClassifier:
    """Frozen CNN posterior over hallucinated placements."""

    mode = "learned"

    def __init__(self, net: AuxClassifierNet):
        self.net = net
        self.net.eval()

    def posterior(self, cells, image=None, ref_mask=None) -> np.ndarray:
        batch = hallucinated_batch(image, ref_mask, cells)
        with torch.no_grad():
            logits = self.net(torch.from_numpy(batch))
            return torch.sigmoid(logits).numpy().astype(np.float64)


def hallucinated_batch(image, ref_mask, cells) -> np.ndarray:
    """Stack render + ref mask + implant mask + implant-relative offsets."""
    h, w = image.shape[-2:]
    implants = implant_masks(h, w, cells)
    offsets = offset_channels(h, w, cells)
    base = np.concatenate([image, ref_mask[None]], axis=0).astype(np.float32)
    return np.concatenate(
        [np.repeat(base[None], len(cells), axis=0), implants, offsets], axis=1
    )


def aux_posterior(scene_image, ref_mask, location, classifier) -> np.ndarray:
    """Posterior 6-vector for hallucinating a placement at `location`.

    The generic implant footprint is synthesized at (u, v) internally;
    oracle-mode classifiers ignore the image and read the geometric
    oracle instead.
    """
    u, v = location
    return classifier.posterior([(u, v)], image=scene_image, ref_mask=ref_mask)[0]


def pretrain_aux_classifier(
    n_scenes: int = 400,
    cells_per_scene: int = 56,
    epochs: int = 8,
    seed: int = 0,
    grid: int = 64,
    n_val_scenes: int = 60,
):
    """Train the CNN against the oracle; returns (classifier, agreement).

    Cells are drawn half from the oracle's positive regions and half
    uniformly, otherwise the empty-relation class swamps the loss.
    Agreement = fraction of held-out cells whose binarized posterior
    equals the oracle indicator on all six relations.
    """
    from ..worldsim.render import N_CHANNELS

    torch.manual_seed(derive_seed(seed, "aux-init"))
    net = AuxClassifierNet(N_CHANNELS + 4)

    def build(n, tag):
        items = []
        for i in range(n):
            s_seed = derive_seed(seed, tag, i)
            rng = np.random.default_rng(np.random.PCG64(s_seed))
            scene = generate_scene(
                SceneConfig(n_pick=0, n_place=int(rng.integers(1, 4)), grid_h=grid, grid_w=grid),
                s_seed,
            )
            objs = scene.objects_on("place")
            ref = objs[int(rng.integers(len(objs)))]
            image = render(scene, "place")
            mask = object_mask(scene, ref.id)
            maps = cell_posterior_maps(scene, ref)
            positive = maps.sum(axis=0) > 0
            # boundary ring: negatives one cell away from a positive; the
            # decision surface lives there, so it gets its own quota
            ring = np.zeros_like(positive)
            ring[1:, :] |= positive[:-1, :]
            ring[:-1, :] |= positive[1:, :]
            ring[:, 1:] |= positive[:, :-1]
            ring[:, :-1] |= positive[:, 1:]
            ring &= ~positive
            pos_cells = np.argwhere(positive)
            ring_cells = np.argwhere(ring)
            cells = []
            for _ in range(cells_per_scene // 3):
                if len(pos_cells):
                    y, x = pos_cells[int(rng.integers(len(pos_cells)))]
                    cells.append((int(x), int(y)))
                if len(ring_cells):
                    y, x = ring_cells[int(rng.integers(len(ring_cells)))]
                    cells.append((int(x), int(y)))
                cells.append((int(rng.integers(grid)), int(rng.integers(grid))))
            targets = np.stack([maps[:, v, u] for (u, v) in cells])
            items.append((image, mask, cells, targets.astype(np.float32)))
        return items

    train_items = build(n_scenes, "aux-train")
    val_items = build(n_val_scenes, "aux-val")
    optimizer = torch.optim.Adam(net.parameters(), lr=1e-3)
    bce = nn.BCEWithLogitsLoss()
    order_rng = np.random.default_rng(np.random.PCG64(derive_seed(seed, "aux-order")))
    for _ in range(epochs):
        for i in order_rng.permutation(len(train_items)):
            image, mask, cells, targets = train_items[int(i)]
            logits = net(torch.from_numpy(hallucinated_batch(image, mask, cells)))
            loss = bce(logits, torch.from_numpy(targets))
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()

    clf = LearnedAuxClassifier(net)
    agree = 0
    total = 0
    for image, mask, cells, targets in val_items:
        pred = clf.posterior(cells, image=image, ref_mask=mask)
        agree += int((np.round(pred) == np.round(targets)).all(axis=1).sum())
        total += len(cells)
    return clf, agree / max(total, 1)
