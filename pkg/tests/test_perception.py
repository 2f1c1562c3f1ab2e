import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tabletalk.perception import (
    ANY_CTX_DIM,
    APPEARANCE_DIM,
    MAX_CONTEXT,
    JitterConfig,
    encode_candidates,
)
from tabletalk.worldsim import Scene, SceneConfig, SceneObject, generate_scene, iou


def scene_of(*objs):
    s = Scene()
    s.objects = list(objs)
    return s


def obj(id, center, category="cup", color="red", size="medium"):
    return SceneObject(id=id, category=category, color=color, size=size, center=center)


class TestLoc5:
    def test_hand_computed_example(self):
        # bbox (16,16,32,32) on 64x64 -> (0.25, 0.25, 0.5, 0.5, 0.0625)
        s = scene_of(SceneObject(id="a", category="box", color="red", size="large", center=(23, 23)))
        # large box has half-extent 5 -> bbox (18,18,29,29); instead check formula directly
        c = encode_candidates(s, "pick")[0]
        x0, y0, x1, y1 = c.bbox
        assert np.allclose(c.loc5, [x0 / 64, y0 / 64, x1 / 64, y1 / 64, (x1 - x0) * (y1 - y0) / 4096])

    def test_quarter_box(self):
        # craft the exact spec example through a raw loc5 computation
        from tabletalk.perception import _loc5

        assert np.allclose(_loc5((16, 16, 32, 32), 64, 64), [0.25, 0.25, 0.5, 0.5, 0.0625])


class TestContext:
    def test_sole_object_zero_padding(self):
        s = scene_of(obj("a", (20, 20)))
        c = encode_candidates(s, "pick")[0]
        assert c.n_same == 0 and c.n_any == 0
        assert not c.same_cat_context.any()
        assert not c.any_cat_context.any()

    def test_truncation_to_five_nearest(self):
        objs = [obj("a", (30, 30))]
        centers = [(10, 30), (20, 30), (40, 30), (50, 30), (30, 10), (30, 50), (30, 56)]
        for i, ctr in enumerate(centers):
            objs.append(obj(f"n{i}", ctr))
        s = scene_of(*objs)
        cand = encode_candidates(s, "pick")[0]
        assert cand.n_same == MAX_CONTEXT
        # the 5 nearest by center distance: distances 10,10,20,20,20 vs 26 for n6
        dists = sorted(abs(c[0] - 30) + abs(c[1] - 30) for c in centers)[:5]
        got = []
        for row in cand.same_cat_context:
            # recover center distance from offsets (scale = own diagonal)
            scale = np.hypot(5, 5)
            got.append(np.hypot(row[0] * scale, row[1] * scale))
        assert max(got) <= 26

    def test_sorted_by_distance(self):
        s = scene_of(obj("a", (30, 30)), obj("far", (50, 30)), obj("near", (38, 30)))
        cand = encode_candidates(s, "pick")[0]
        assert cand.n_any == 2
        first, second = cand.any_cat_context[0], cand.any_cat_context[1]
        assert abs(first[APPEARANCE_DIM]) < abs(second[APPEARANCE_DIM])


class TestJitter:
    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 1000), shift=st.integers(1, 4))
    def test_iou_bound(self, seed, shift):
        s = generate_scene(SceneConfig(n_pick=5, n_place=0), seed=seed % 50)
        for c in encode_candidates(s, "pick", jitter=JitterConfig(max_shift=shift), seed=seed):
            assert iou(c.bbox, c.true_bbox) >= 0.5

    def test_deterministic(self):
        s = generate_scene(SceneConfig(n_pick=5, n_place=0), seed=4)
        a = encode_candidates(s, "pick", jitter=JitterConfig(max_shift=2), seed=9)
        b = encode_candidates(s, "pick", jitter=JitterConfig(max_shift=2), seed=9)
        assert all(x.bbox == y.bbox for x, y in zip(a, b))


class TestTranslationCovariance:
    def test_offsets_invariant_loc5_shifts(self):
        base = [obj("a", (20, 20)), obj("b", (28, 20)), obj("c", (20, 30), category="box")]
        s1 = scene_of(*base)
        shifted = [
            SceneObject(id=o.id, category=o.category, color=o.color, size=o.size,
                        center=(o.center[0] + 6, o.center[1] + 4))
            for o in base
        ]
        s2 = scene_of(*shifted)
        c1 = encode_candidates(s1, "pick")
        c2 = encode_candidates(s2, "pick")
        for a, b in zip(c1, c2):
            assert np.allclose(b.loc5[:4] - a.loc5[:4], [6 / 64, 4 / 64, 6 / 64, 4 / 64])
            assert np.isclose(a.loc5[4], b.loc5[4])
            assert np.allclose(a.same_cat_context, b.same_cat_context)
            assert np.allclose(a.any_cat_context, b.any_cat_context)


def test_feature_dims_fixed():
    s = generate_scene(SceneConfig(n_pick=7, n_place=0), seed=3)
    cands = encode_candidates(s, "pick")
    for c in cands:
        assert c.appearance.shape == (APPEARANCE_DIM,)
        assert c.loc5.shape == (5,)
        assert c.same_cat_context.shape == (MAX_CONTEXT, 5)
        assert c.any_cat_context.shape == (MAX_CONTEXT, ANY_CTX_DIM)
        assert ((0 <= c.loc5) & (c.loc5 <= 1)).all()
