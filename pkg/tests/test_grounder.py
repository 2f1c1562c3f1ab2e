import numpy as np
import pytest
import torch

from tabletalk.config import TrainConfig
from tabletalk.grounding import (
    GroundingConfig,
    GroundingNet,
    JointModel,
    comprehend,
    encode_expression,
    featurize,
    hinge_loss,
    match_score,
    train_grounding,
    weighted_score,
)
from tabletalk.language import DatasetConfig, Vocabulary, build_dataset
from tabletalk.perception import encode_candidates
from tabletalk.worldsim import Scene, SceneConfig, SceneObject, generate_scene

V = len(Vocabulary())


def small_net(seed=0):
    torch.manual_seed(seed)
    return GroundingNet(V, GroundingConfig())


def candidates_for(seed=3, n=5):
    scene = generate_scene(SceneConfig(n_pick=n, n_place=0), seed=seed)
    return encode_candidates(scene, "pick")


class TestHingeLoss:
    CFG = TrainConfig()

    def test_hand_example_one_active_term(self):
        # (0.9, 0.5, 0.85): wrong-expr term inactive, wrong-obj term 0.05
        assert abs(hinge_loss(0.9, 0.5, 0.85, self.CFG) - 0.05) < 1e-9

    def test_margin_satisfied_is_zero(self):
        assert hinge_loss(0.9, 0.7, 0.75, self.CFG) == 0.0

    def test_hand_example_both_terms(self):
        assert abs(hinge_loss(0.2, 0.9, 0.9, self.CFG) - 1.6) < 1e-9

    def test_non_negative_and_monotone(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            p, we, wo = rng.uniform(-1, 1, 3)
            l0 = hinge_loss(p, we, wo, self.CFG)
            assert l0 >= 0.0
            assert hinge_loss(p + 0.05, we, wo, self.CFG) <= l0 + 1e-12

    def test_gradient_matches_finite_differences(self):
        # away from the hinge kink
        vals = (0.9, 0.5, 0.85)
        xs = [torch.tensor(v, dtype=torch.float64, requires_grad=True) for v in vals]
        loss = hinge_loss(*xs, self.CFG)
        loss.backward()
        h = 1e-6
        for i in range(3):
            shift = [torch.tensor(v, dtype=torch.float64) for v in vals]
            shift[i] = shift[i] + h
            up = hinge_loss(*shift, self.CFG)
            shift[i] = shift[i] - 2 * h
            down = hinge_loss(*shift, self.CFG)
            fd = float((up - down) / (2 * h))
            grad = float(xs[i].grad)
            denom = max(abs(fd), abs(grad), 1e-8)
            assert abs(fd - grad) / denom < 1e-4 or abs(fd - grad) < 1e-8


class TestWeightedScore:
    def test_hand_example(self):
        assert abs(weighted_score((0.8, 0.6, 0.4), (0.5, 0.3, 0.2)) - 0.66) < 1e-9

    def test_equal_scores_collapse(self):
        for w in [(1, 0, 0), (0.2, 0.5, 0.3), (1 / 3, 1 / 3, 1 / 3)]:
            assert abs(weighted_score((0.37, 0.37, 0.37), w) - 0.37) < 1e-12

    def test_degenerate_weight(self):
        assert weighted_score((0.9, -0.5, 0.1), (1.0, 0.0, 0.0)) == pytest.approx(0.9)


class TestEncodeExpression:
    def test_module_weights_on_simplex(self):
        net = small_net()
        enc = encode_expression([4, 5, 6, 1], net)
        assert abs(enc.module_weights.sum() - 1.0) < 1e-6
        assert (enc.module_weights >= 0).all()
        for m in ("subj", "loc", "rel"):
            assert abs(enc.word_attention[m].sum() - 1.0) < 1e-6

    def test_single_token_attention_is_identity(self):
        net = small_net()
        enc = encode_expression([7], net)
        for m in ("subj", "loc", "rel"):
            assert torch.allclose(enc.q[m], enc.hidden_states[0])

    def test_vocab_permutation_invariance(self):
        net = small_net(seed=1)
        perm = torch.randperm(V)
        inv = torch.empty_like(perm)
        inv[perm] = torch.arange(V)
        net2 = small_net(seed=1)
        with torch.no_grad():
            net2.embedding.weight.copy_(net.embedding.weight[perm])
        tokens = [3, 9, 20, 1]
        permuted = [int(inv[t]) for t in tokens]
        a = encode_expression(tokens, net)
        b = encode_expression(permuted, net2)
        assert np.allclose(a.module_weights, b.module_weights)
        for m in ("subj", "loc", "rel"):
            assert torch.allclose(a.q[m], b.q[m])


class TestComprehend:
    def test_scores_bounded(self):
        net = small_net()
        cands = candidates_for()
        result = comprehend(cands, [5, 9, 1], net)
        for s in result.scores.values():
            assert -1.0 - 1e-9 <= s <= 1.0 + 1e-9

    def test_ambiguous_set_threshold_arithmetic(self):
        # scores [0.92, 0.88, 0.40] with m1=0.1 -> two within margin
        from tabletalk.grounding.model import MatchResult

        scores = {"a": 0.92, "b": 0.88, "c": 0.40}
        ranking = sorted(scores, key=lambda c: -scores[c])
        amb = [c for c in ranking if scores[ranking[0]] - scores[c] < 0.1]
        assert amb == ["a", "b"]
        scores = {"a": 0.9, "b": 0.2, "c": 0.1}
        ranking = sorted(scores, key=lambda c: -scores[c])
        amb = [c for c in ranking if scores[ranking[0]] - scores[c] < 0.1]
        assert amb == ["a"]

    def test_single_candidate(self):
        net = small_net()
        cands = candidates_for(n=1)
        result = comprehend(cands, [5, 1], net)
        assert result.ranking == [cands[0].id]
        assert result.ambiguous_set == [cands[0].id]

    def test_top_always_in_ambiguous_set(self):
        net = small_net()
        cands = candidates_for(n=6)
        for toks in ([4, 5], [9, 10, 11], [20]):
            r = comprehend(cands, toks + [1], net)
            assert r.ranking[0] in r.ambiguous_set
            assert r.ranking == sorted(r.scores, key=lambda c: (-r.scores[c], c))

    def test_match_score_agrees_with_comprehend(self):
        net = small_net()
        cands = candidates_for(n=4)
        tokens = [6, 7, 8, 1]
        result = comprehend(cands, tokens, net)
        enc = encode_expression(tokens, net)
        for c in cands:
            assert match_score(c, enc, net) == pytest.approx(result.scores[c.id], abs=1e-9)

    def test_scale_invariance_of_ranking(self):
        net = small_net()
        cands = candidates_for(n=5)
        tokens = [6, 12, 1]
        base = comprehend(cands, tokens, net)
        for c in cands:
            c.appearance = c.appearance * 3.7
            c.loc5 = c.loc5 * 3.7
            c.same_cat_context = c.same_cat_context * 3.7
            c.any_cat_context = c.any_cat_context * 3.7
        scaled = comprehend(cands, tokens, net)
        assert scaled.ranking == base.ranking
        for cid in base.scores:
            assert scaled.scores[cid] == pytest.approx(base.scores[cid], abs=1e-9)


class TestTraining:
    def _toy_dataset(self):
        # one scene, two objects, two expressions: separable
        return build_dataset(
            DatasetConfig(n_samples=2, exprs_per_scene=2, n_pick_range=(2, 2), splits=(1.0, 0.0, 0.0)),
            seed=3,
        )

    def test_toy_problem_reaches_zero_loss(self):
        ds = self._toy_dataset()
        cfg = TrainConfig(epochs=200, batch_size=2, learning_rate=0.01, seed=1, jitter=0)
        model, curves = train_grounding(ds, cfg)
        assert curves[-1]["L1"] < 1e-6
        from tabletalk.grounding import prepare_examples, validation_accuracy

        ex, _ = prepare_examples(ds.split("train"), seed=1, jitter=0)
        assert validation_accuracy(model, ex) == 1.0

    def test_zero_epochs_returns_initialization(self):
        from tabletalk.seeding import derive_seed

        ds = self._toy_dataset()
        cfg = TrainConfig(epochs=0, seed=7)
        model, curves = train_grounding(ds, cfg)
        torch.manual_seed(derive_seed(7, "init"))
        fresh = JointModel(V, GroundingConfig(margin=cfg.m1))
        for (k, a), (_, b) in zip(model.state_dict().items(), fresh.state_dict().items()):
            assert torch.equal(a, b), k
        assert curves == []

    def test_bit_reproducible(self):
        ds = self._toy_dataset()
        cfg = TrainConfig(epochs=5, batch_size=2, seed=11, jitter=0)
        m1, c1 = train_grounding(ds, cfg)
        m2, c2 = train_grounding(ds, cfg)
        for (k, a), (_, b) in zip(m1.state_dict().items(), m2.state_dict().items()):
            assert torch.equal(a, b), k
        assert c1 == c2
