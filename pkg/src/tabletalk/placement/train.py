"""Auxiliary-classifier training loop for the placement maps.

The net's own predictions choose where to look: locations are sampled
per relation channel from the current maps (with epsilon-uniform
exploration), the frozen classifier scores the hallucinated placement,
and the squared error between the map vector and the posterior at each
sampled cell is the loss. Gradients reach only the map parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from ..config import PlacementTrainConfig
from ..seeding import derive_seed
from ..worldsim import (
    RELATIONS,
    Scene,
    SceneConfig,
    cell_posterior_maps,
    generate_scene,
    object_mask,
    relation_oracle,
    render,
)
from .classifier import OracleAuxClassifier
from .maps import NoMassAvailable, ProbMaps, attach_scene_masks, sample_location
from .network import PlacementNet, stack_input


class NonFiniteLoss(Exception):
    pass


@dataclass
class PlacementExample:
    scene: Scene
    ref_id: str
    image: np.ndarray
    ref_mask: np.ndarray
    posterior: np.ndarray  # (6, H, W) oracle posterior
    channel_mask: np.ndarray  # (6,) bool; inside/on_top only when applicable


def build_placement_scenes(n: int, seed: int, grid: int = 64, max_objects: int = 3, tag: str = "place-scene"):
    """Single-designated-reference scenes for placement training/eval."""
    out = []
    for i in range(n):
        s_seed = derive_seed(seed, tag, i)
        rng = np.random.default_rng(np.random.PCG64(s_seed))
        scene = generate_scene(
            SceneConfig(
                n_pick=0,
                n_place=int(rng.integers(1, max_objects + 1)),
                grid_h=grid,
                grid_w=grid,
            ),
            s_seed,
        )
        objs = scene.objects_on("place")
        ref = objs[int(rng.integers(len(objs)))]
        channel_mask = np.ones(len(RELATIONS), dtype=bool)
        channel_mask[RELATIONS.index("inside")] = ref.is_container
        channel_mask[RELATIONS.index("on_top")] = ref.flat_topped
        out.append(
            PlacementExample(
                scene=scene,
                ref_id=ref.id,
                image=render(scene, "place"),
                ref_mask=object_mask(scene, ref.id),
                posterior=cell_posterior_maps(scene, ref).astype(np.float32),
                channel_mask=channel_mask,
            )
        )
    return out


def _sample_cells(gamma_np: np.ndarray, k: int, eps: float, rng) -> np.ndarray:
    """Sample k flat cell indices from mix((1-eps)*normalize(g), eps*uniform)."""
    flat = gamma_np.ravel()
    n = flat.size
    total = flat.sum()
    if total <= 0:
        # degenerate channel: fall back to uniform sampling
        probs = np.full(n, 1.0 / n)
    else:
        probs = (1.0 - eps) * (flat / total) + eps / n
        probs = probs / probs.sum()
    return rng.choice(n, size=k, p=probs)


def relnet_step(model, scene_image, ref_mask, classifier, k: int, eps: float, seed: int,
                channel_mask=None) -> torch.Tensor:
    """One training objective evaluation for a single scene.

    Per relation channel, k locations are sampled from the current maps
    mixed with eps-uniform exploration; the loss is the mean squared L2
    norm between the 6-vector of map scores at each sampled cell and the
    classifier posterior there.
    """
    if k < 1:
        raise ValueError("need k >= 1 samples per channel")
    x = stack_input(scene_image, ref_mask)
    gamma = model(x)
    h, w = gamma.shape[1:]
    rng = np.random.default_rng(np.random.PCG64(seed))
    gamma_np = gamma.detach().numpy()
    per_sample = []
    for c in range(gamma.shape[0]):
        if channel_mask is not None and not channel_mask[c]:
            continue
        cells = _sample_cells(gamma_np[c], k, eps, rng)
        us, vs = cells % w, cells // w
        target = classifier.posterior(
            list(zip(us.tolist(), vs.tolist())), image=scene_image, ref_mask=ref_mask
        )
        pred = gamma[:, torch.from_numpy(vs), torch.from_numpy(us)].T
        diff = pred - torch.as_tensor(target, dtype=pred.dtype)
        per_sample.append((diff * diff).sum(dim=1))
    if not per_sample:
        return torch.zeros((), dtype=gamma.dtype)
    return torch.cat(per_sample).mean()


def satisfaction_rates(net, examples, seed: int, samples_per_relation: int = 3):
    """Fraction of sampled placements whose oracle set contains the relation."""
    from .maps import predict_maps

    hits = {r: 0 for r in RELATIONS}
    totals = {r: 0 for r in RELATIONS}
    with torch.no_grad():
        for i, ex in enumerate(examples):
            maps = predict_maps(ex.image, ex.ref_mask, net)
            attach_scene_masks(maps, ex.scene, "place", ex.ref_id)
            ref = ex.scene.find(ex.ref_id)
            for c, rel in enumerate(RELATIONS):
                if not ex.channel_mask[c]:
                    continue
                if not ((ex.posterior[c] > 0) & maps.available_mask(rel)).any():
                    continue  # infeasible in this scene (edge-flush reference)
                for j in range(samples_per_relation):
                    try:
                        u, v = sample_location(maps, rel, derive_seed(seed, "sat", i, rel, j))
                    except NoMassAvailable:
                        totals[rel] += 1
                        continue
                    totals[rel] += 1
                    if rel in relation_oracle(ex.scene, (u, v, u + 1, v + 1), ref):
                        hits[rel] += 1
    return {r: hits[r] / totals[r] if totals[r] else None for r in RELATIONS}


def train_placement(cfg: PlacementTrainConfig, examples=None, val_examples=None):
    """Train the placement net; returns (net, curves).

    `examples` defaults to cfg.n_scenes generated single-reference
    scenes. Batched internally, but the objective per scene is exactly
    relnet_step's: squared posterior mismatch at self-sampled cells.
    """
    torch.set_num_threads(cfg.num_threads)
    torch.manual_seed(derive_seed(cfg.seed, "place-init"))
    if examples is None:
        examples = build_placement_scenes(cfg.n_scenes, cfg.seed, tag="place-train")
    if val_examples is None:
        val_examples = build_placement_scenes(
            cfg.n_val_scenes, cfg.seed, tag="place-val"
        )

    classifiers = _classifiers_for(cfg, examples)
    net = PlacementNet(cfg.base_channels)
    optimizer = torch.optim.Adam(net.parameters(), lr=cfg.learning_rate)
    inputs = [stack_input(ex.image, ex.ref_mask) for ex in examples]
    posteriors = [torch.from_numpy(ex.posterior) for ex in examples]

    curves = []
    for epoch in range(cfg.epochs):
        rng = np.random.default_rng(np.random.PCG64(derive_seed(cfg.seed, "place-epoch", epoch)))
        order = rng.permutation(len(examples))
        epoch_loss = 0.0
        n_terms = 0
        for start in range(0, len(order), cfg.batch_size):
            idxs = [int(i) for i in order[start : start + cfg.batch_size]]
            batch = torch.stack([inputs[i] for i in idxs])
            gamma = net(batch)
            gamma_np = gamma.detach().numpy()
            h, w = gamma.shape[2:]
            losses = []
            for row, i in enumerate(idxs):
                ex = examples[i]
                for c in range(len(RELATIONS)):
                    if not ex.channel_mask[c]:
                        continue
                    cells = _sample_cells(
                        gamma_np[row, c], cfg.samples_per_channel, cfg.epsilon, rng
                    )
                    us, vs = cells % w, cells // w
                    if classifiers is None:
                        target = posteriors[i][:, vs, us].T.to(gamma.dtype)
                    else:
                        target = torch.as_tensor(
                            classifiers[i].posterior(
                                list(zip(us.tolist(), vs.tolist())),
                                image=ex.image,
                                ref_mask=ex.ref_mask,
                            ),
                            dtype=gamma.dtype,
                        )
                    pred = gamma[row][:, torch.from_numpy(vs), torch.from_numpy(us)].T
                    diff = pred - target
                    losses.append((diff * diff).sum(dim=1))
            loss = torch.cat(losses).mean()
            if not torch.isfinite(loss):
                raise NonFiniteLoss(f"non-finite placement loss at epoch {epoch}")
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach()) * len(losses)
            n_terms += len(losses)

        rates = satisfaction_rates(net, val_examples, seed=derive_seed(cfg.seed, "val", epoch))
        row = {"epoch": epoch, "loss": epoch_loss / max(n_terms, 1)}
        for rel in RELATIONS:
            row[f"sat_{rel}"] = rates[rel]
        covered = [v for v in rates.values() if v is not None]
        row["sat_mean"] = sum(covered) / len(covered) if covered else 0.0
        curves.append(row)
    return net, curves


def _classifiers_for(cfg, examples):
    """Oracle mode short-circuits through precomputed posteriors (None)."""
    if cfg.classifier_mode == "oracle":
        return None
    if cfg.classifier_mode == "learned":
        from .classifier import pretrain_aux_classifier

        clf, _ = pretrain_aux_classifier(seed=cfg.seed)
        return [clf] * len(examples)
    raise ValueError(f"unknown classifier mode {cfg.classifier_mode!r}")
