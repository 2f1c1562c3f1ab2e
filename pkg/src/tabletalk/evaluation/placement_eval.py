"""Per-relation placement satisfaction tables."""

from __future__ import annotations

from ..placement import (
    NoMassAvailable,
    argmax_location,
    attach_scene_masks,
    predict_maps,
    sample_location,
)
from ..seeding import derive_seed
from ..worldsim import RELATIONS, relation_oracle


def eval_placement(examples, net=None, maps_fn=None, samples_per_relation: int = 3,
                   seed: int = 0) -> dict:
    """Sampled and argmax-cell oracle satisfaction per relation.

    Relations inapplicable to a scene's reference (no container / no
    flat top) are skipped; `coverage` counts scenes actually scored.
    Either a trained net or an explicit maps_fn(scene_example) supplies
    the maps.
    """
    if (net is None) == (maps_fn is None):
        raise ValueError("pass exactly one of net / maps_fn")
    hits = {r: 0 for r in RELATIONS}
    totals = {r: 0 for r in RELATIONS}
    argmax_hits = {r: 0 for r in RELATIONS}
    coverage = {r: 0 for r in RELATIONS}
    for i, ex in enumerate(examples):
        if maps_fn is not None:
            maps = maps_fn(ex)
        else:
            maps = attach_scene_masks(
                predict_maps(ex.image, ex.ref_mask, net), ex.scene, "place", ex.ref_id
            )
        ref = ex.scene.find(ex.ref_id)
        for c, rel in enumerate(RELATIONS):
            if not ex.channel_mask[c]:
                continue
            # skip relations with no satisfying free cell at all (e.g. a
            # reference flush against the grid edge): scene infeasibility,
            # not model error
            if not ((ex.posterior[c] > 0) & maps.available_mask(rel)).any():
                continue
            coverage[rel] += 1
            try:
                au, av = argmax_location(maps, rel)
                argmax_hits[rel] += rel in relation_oracle(ex.scene, (au, av, au + 1, av + 1), ref)
            except NoMassAvailable:
                pass
            for j in range(samples_per_relation):
                totals[rel] += 1
                try:
                    u, v = sample_location(maps, rel, derive_seed(seed, "eval", i, rel, j))
                except NoMassAvailable:
                    continue
                hits[rel] += rel in relation_oracle(ex.scene, (u, v, u + 1, v + 1), ref)
    table = {}
    for rel in RELATIONS:
        table[rel] = {
            "satisfaction": hits[rel] / totals[rel] if totals[rel] else None,
            "argmax_satisfaction": argmax_hits[rel] / coverage[rel] if coverage[rel] else None,
            "coverage": coverage[rel],
            "samples": totals[rel],
        }
    return table
