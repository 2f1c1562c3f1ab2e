import itertools
import math

import numpy as np
import pytest
import torch
import torch.nn as nn

from tabletalk.config import TrainConfig
from tabletalk.generation import (
    ExpressionDecoder,
    beam_search,
    decode_nll,
    mmi_loss,
    mmi_margin,
    rerank,
)
from tabletalk.grounding import GroundingConfig, JointModel, comprehend, featurize
from tabletalk.language import DatasetConfig, Vocabulary, build_dataset
from tabletalk.perception import encode_candidates
from tabletalk.worldsim import SceneConfig, generate_scene

CFG = TrainConfig()


def tiny_decoder(vocab_size=4, v_dim=6, hidden=8, seed=0):
    torch.manual_seed(seed)
    emb = nn.Embedding(vocab_size, 5).double()
    return ExpressionDecoder(emb, v_dim=v_dim, hidden_dim=hidden, ctx_dim=3)


class TestDecodeNLL:
    def test_uniform_decoder_gives_T_log_V(self):
        dec = tiny_decoder(vocab_size=7)
        with torch.no_grad():
            dec.out.weight.zero_()
            dec.out.bias.zero_()
        v = torch.zeros(6, dtype=torch.float64)
        tokens = [3, 2, 5, 1]  # T = 4
        nll = decode_nll(v, tokens, dec, bos=0).detach()
        assert abs(float(nll) - 4 * math.log(7)) < 1e-9

    def test_certain_decoder_gives_zero(self):
        dec = tiny_decoder(vocab_size=5)
        with torch.no_grad():
            dec.out.weight.zero_()
            dec.out.bias.fill_(-2000.0)
            dec.out.bias[3] = 2000.0
        v = torch.zeros(6, dtype=torch.float64)
        assert float(decode_nll(v, [3, 3, 3], dec, bos=0).detach()) == 0.0

    def test_non_negative(self):
        dec = tiny_decoder()
        v = torch.randn(6, dtype=torch.float64)
        assert float(decode_nll(v, [1, 2, 3], dec, bos=0).detach()) >= 0.0

    def test_overfits_single_sample(self):
        dec = tiny_decoder(vocab_size=6, seed=3)
        v = torch.randn(6, dtype=torch.float64)
        tokens = [4, 2, 5, 1]
        opt = torch.optim.Adam(dec.parameters(), lr=0.01)
        losses = []
        for _ in range(60):
            loss = decode_nll(v, tokens, dec, bos=0)
            opt.zero_grad()
            loss.backward()
            opt.step()
            losses.append(float(loss.detach()))
        assert losses[-1] < losses[0] * 0.2
        # early-epoch trend decreases
        assert losses[5] < losses[0]


class TestMMI:
    def test_hand_example_inactive(self):
        assert mmi_margin(-2.0, -3.5, CFG) == 0.0

    def test_hand_example_active(self):
        assert abs(mmi_margin(-2.0, -2.3, CFG) - 0.07) < 1e-9

    def test_equal_reps_give_lambda3_m2(self):
        dec = tiny_decoder()
        v = torch.randn(6, dtype=torch.float64)
        loss = mmi_loss(v, v.clone(), [1, 2], dec, CFG, bos=0).detach()
        assert abs(float(loss) - CFG.lambda3 * CFG.m2) < 1e-12

    def test_non_negative(self):
        dec = tiny_decoder(seed=5)
        va, vb = torch.randn(2, 6, dtype=torch.float64)
        assert float(mmi_loss(va, vb, [2, 1], dec, CFG, bos=0).detach()) >= 0.0


class TestGradientCheck:
    def test_decoder_gradients_match_finite_differences(self):
        dec = tiny_decoder(vocab_size=5, seed=7)
        v_t = torch.randn(6, dtype=torch.float64)
        v_o = torch.randn(6, dtype=torch.float64)
        tokens = [2, 4, 1]

        def total():
            return decode_nll(v_t, tokens, dec, bos=0) + mmi_loss(
                v_t, v_o, tokens, dec, CFG, bos=0
            )

        loss = total()
        dec.zero_grad()
        loss.backward()
        h = 1e-6
        checked = 0
        for p in dec.parameters():
            if p.grad is None:
                continue
            flat = p.data.view(-1)
            gflat = p.grad.view(-1)
            idxs = range(0, flat.numel(), max(1, flat.numel() // 5))
            for i in idxs:
                orig = float(flat[i])
                flat[i] = orig + h
                up = float(total().detach())
                flat[i] = orig - h
                down = float(total().detach())
                flat[i] = orig
                fd = (up - down) / (2 * h)
                an = float(gflat[i])
                denom = max(abs(fd), abs(an), 1e-6)
                assert abs(fd - an) / denom < 1e-4, (fd, an)
                checked += 1
        assert checked >= 20


class TestBeamSearch:
    def _enumerate(self, dec, v, eos, bos, max_len):
        """Exhaustive scoring of every finished sequence up to max_len."""
        out = []

        def walk(prefix, logp, state):
            dist, new_state = dec.step(v.unsqueeze(0), prefix[-1] if prefix else bos, state)
            for tok in range(dec.vocab_size):
                seq = prefix + [tok]
                lp = logp + float(dist[tok])
                if tok == eos or len(seq) == max_len:
                    out.append((seq, lp))
                else:
                    walk(seq, lp, new_state)

        with torch.no_grad():
            walk([], 0.0, dec.initial_state(v.unsqueeze(0)))
        return out

    def test_matches_exhaustive_enumeration(self):
        dec = tiny_decoder(vocab_size=3, seed=11)
        v = torch.randn(6, dtype=torch.float64)
        eos, bos, max_len = 1, 0, 3
        space = self._enumerate(dec, v, eos, bos, max_len)
        ranked = sorted(space, key=lambda t: (-(t[1] / len(t[0])), t[0]))
        width = len(space) + 5  # beam covers the entire space
        hyps = beam_search(v, dec, eos=eos, bos=bos, beam_width=width, max_len=max_len)
        assert len(hyps) == min(width, len(space))
        for h, (seq, lp) in zip(hyps, ranked[: len(hyps)]):
            assert h.tokens == seq
            assert abs(h.log_prob - lp) < 1e-9

    def test_beam_one_is_greedy(self):
        dec = tiny_decoder(vocab_size=5, seed=13)
        v = torch.randn(6, dtype=torch.float64)
        hyps = beam_search(v, dec, eos=1, bos=0, beam_width=1, max_len=4)
        assert len(hyps) == 1
        with torch.no_grad():
            state = dec.initial_state(v.unsqueeze(0))
            seq = []
            prev = 0
            for _ in range(4):
                dist, state = dec.step(v.unsqueeze(0), prev, state)
                prev = int(torch.argmax(dist))
                seq.append(prev)
                if prev == 1:
                    break
        assert hyps[0].tokens == seq

    def test_all_hypotheses_finished(self):
        dec = tiny_decoder(vocab_size=6, seed=17)
        v = torch.randn(6, dtype=torch.float64)
        for width in (1, 3, 5):
            for h in beam_search(v, dec, eos=1, bos=0, beam_width=width, max_len=5):
                assert h.finished
                assert h.tokens[-1] == 1 or len(h.tokens) == 5
                assert h.log_prob <= 0.0


class TestRerank:
    def _trained_setup(self):
        ds = build_dataset(
            DatasetConfig(n_samples=2, exprs_per_scene=2, n_pick_range=(2, 2), splits=(1.0, 0, 0)),
            seed=9,
        )
        torch.manual_seed(0)
        model = JointModel(len(ds.vocab), GroundingConfig())
        return ds, model

    def test_single_hypothesis_returned(self):
        from tabletalk.generation.beam import BeamHypothesis

        ds, model = self._trained_setup()
        rec = ds.records[0]
        feats = featurize(encode_candidates(rec.scene, "pick"))
        hyp = BeamHypothesis(tokens=rec.tokens, log_prob=-1.0, finished=True)
        assert rerank([hyp], feats, rec.target_id, model.grounder) == rec.tokens

    def test_returned_margin_is_max(self):
        from tabletalk.generation import discriminative_margin
        from tabletalk.generation.beam import BeamHypothesis

        ds, model = self._trained_setup()
        rec = ds.records[0]
        feats = featurize(encode_candidates(rec.scene, "pick"))
        hyps = [
            BeamHypothesis(tokens=ds.records[i].tokens, log_prob=-float(i), finished=True)
            for i in range(len(ds.records))
        ]
        best = rerank(hyps, feats, rec.target_id, model.grounder)
        best_margin = discriminative_margin(best, feats, rec.target_id, model.grounder)
        for h in hyps:
            m = discriminative_margin(h.tokens, feats, rec.target_id, model.grounder)
            assert best_margin >= m - 1e-12

    def test_sole_candidate_margin_convention(self):
        from tabletalk.generation import discriminative_margin

        scene = generate_scene(SceneConfig(n_pick=1, n_place=0), seed=2)
        feats = featurize(encode_candidates(scene, "pick"))
        _, model = self._trained_setup()
        tokens = [4, 1]
        m = discriminative_margin(tokens, feats, feats.ids[0], model.grounder)
        result = comprehend(feats, tokens, model.grounder)
        assert m == pytest.approx(result.scores[feats.ids[0]] + 1.0)


def test_visual_rep_shares_subject_projection_object():
    # the generator's v_vis path runs through the very same FC module the
    # comprehension subject module uses: one object, not a copy
    torch.manual_seed(0)
    model = JointModel(20, GroundingConfig())
    assert model.decoder.embedding is model.grounder.embedding
    scene = generate_scene(SceneConfig(n_pick=2, n_place=0), seed=1)
    feats = featurize(encode_candidates(scene, "pick"))
    rep = model.target_visual_rep(feats, 0)
    d = 2 * model.grounder.cfg.hidden_dim
    assert rep.v.shape == (3 * d,)
    assert rep.v_vis.shape == (d,) and rep.v_loc.shape == (d,) and rep.v_rel.shape == (d,)
    with torch.no_grad():
        model.grounder.shared_subject.weight.mul_(2.0)
    rep2 = model.target_visual_rep(feats, 0)
    assert not torch.allclose(rep.v_vis, rep2.v_vis)  # change propagated through the shared FC


def test_per_step_distribution_normalized():
    dec = tiny_decoder(vocab_size=9, seed=19)
    v = torch.randn(6, dtype=torch.float64)
    with torch.no_grad():
        dist, _ = dec.step(v.unsqueeze(0), 0, dec.initial_state(v.unsqueeze(0)))
    assert abs(float(torch.exp(dist).sum()) - 1.0) < 1e-6
