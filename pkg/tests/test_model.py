import zipfile

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biscnn import nnmath
from biscnn.corpus import OUTSIDE, UNK
from biscnn.errors import ConfigError, RejectedInputError, WindowTooShortError
from biscnn.model import (HyperParams, Rank1, SeqCNN, Variant, branch_features, embed_window, hidden, param_shapes,
                          predict, score)
from biscnn.trainer import encode_corpus

from conftest import analytic_gradients, finite_differences, micro_model, relative_error, total_loss


def zero_params(model):
    for v in model.params.values():
        v[...] = 0.0


class TestHyperParams:
    def test_reference_defaults(self):
        hp = HyperParams()
        assert (hp.d, hp.s, hp.filter_width, hp.n, hp.cs, hp.l2_weight, hp.lr0) == (50, 100, 5, 9, 3, 1e-7, 0.02)
        assert hp.variant is Variant.BI_CONCAT and hp.hidden_dim == 200

    @pytest.mark.parametrize("bad", [dict(d=0), dict(n=1, m=1, filter_width=5), dict(cs=-2), dict(gamma=0.0),
                                     dict(lr0=-1.0)])
    def test_rejects_invalid(self, bad):
        with pytest.raises(ConfigError):
            HyperParams(**bad)

    def test_dict_round_trip(self):
        hp = HyperParams(variant="bi-add", s=7)
        assert HyperParams.from_dict(hp.to_dict()) == hp
        with pytest.raises(ConfigError):
            HyperParams.from_dict({"nope": 1})

    def test_shapes(self):
        shapes = param_shapes(HyperParams(), 100, 126)
        assert shapes["U"] == (100, 50 * 7) and shapes["Vp"] == (100, 100) and shapes["Wc"] == (200, 126)
        assert "U" not in param_shapes(HyperParams(cs=-1), 10, 3)
        base = param_shapes(HyperParams(variant="baseline"), 10, 3)
        assert base["W1"] == (100, 50 * 11) and "Fp" not in base


class TestEmbed:
    def test_identical_ids_identical_rows(self):
        E = np.random.default_rng(0).standard_normal((6, 4))
        rows = embed_window([3, 3, 3], E)
        assert np.array_equal(rows[0], rows[2])

    def test_unk_row_is_zero(self):
        model, _ = micro_model()
        assert not embed_window([UNK], model.params["E"]).any()

    def test_default_past_window_shape(self):
        hp = HyperParams()
        E = np.zeros((20, hp.d))
        assert embed_window(np.zeros(hp.n + hp.m + 1, dtype=int), E).shape == (12, 50)

    def test_invalid_id(self):
        with pytest.raises(IndexError):
            embed_window([0, 9], np.zeros((5, 2)))


class TestBranch:
    def test_zero_filters(self):
        c, _ = branch_features(np.ones((6, 3)), np.zeros((4, 2, 3)), np.zeros(4))
        assert not c.any()

    def test_coordinate_picker(self):
        x = np.random.default_rng(1).standard_normal((7, 3))
        f = np.zeros((1, 1, 3))
        f[0, 0, 2] = 1.0
        c, _ = branch_features(x, f, np.zeros(1))
        assert c[0] == x[:, 2].max()

    def test_composed_oracle(self):
        rng = np.random.default_rng(2)
        x, f, b = rng.standard_normal((12, 5)), rng.standard_normal((6, 5, 5)), rng.standard_normal(6)
        c, trace = branch_features(x, f, b)
        ref, ref_trace = nnmath.max_pool_over_time(nnmath.conv_full_width(x, f, b))
        np.testing.assert_allclose(c, ref, atol=1e-12)
        assert np.array_equal(trace, ref_trace)

    def test_short_window(self):
        with pytest.raises(WindowTooShortError):
            branch_features(np.ones((2, 3)), np.ones((1, 3, 3)), np.zeros(1))


class TestHidden:
    def test_all_zero(self):
        s, d = 4, 3
        z = np.zeros
        h = hidden(z(d), z(s), z(s), Variant.BI_CONCAT, z((s, d)), z((s, s)), z((s, s)))
        assert h.shape == (2 * s,) and np.all(h == 0.5)

    def test_bi_add_with_zero_vf_is_past(self):
        rng = np.random.default_rng(3)
        e, cp, cf = rng.standard_normal(6), rng.standard_normal(4), rng.standard_normal(4)
        U, Vp = rng.standard_normal((4, 6)), rng.standard_normal((4, 4))
        a = hidden(e, cp, cf, Variant.BI_ADD, U, Vp, np.zeros((4, 4)))
        b = hidden(e, cp, None, Variant.PAST, U, Vp)
        assert np.array_equal(a, b)

    def test_concat_halves_recompute(self):
        rng = np.random.default_rng(4)
        e, cp, cf = rng.standard_normal(6), rng.standard_normal(4), rng.standard_normal(4)
        U, Vp, Vf = rng.standard_normal((4, 6)), rng.standard_normal((4, 4)), rng.standard_normal((4, 4))
        h = hidden(e, cp, cf, Variant.BI_CONCAT, U, Vp, Vf)
        np.testing.assert_allclose(h[:4], 1 / (1 + np.exp(-(U @ e + Vp @ cp))), atol=1e-15)
        np.testing.assert_allclose(h[4:], 1 / (1 + np.exp(-(U @ e + Vf @ cf))), atol=1e-15)
        assert np.array_equal(h[:4], hidden(e, cp, None, Variant.PAST, U, Vp))


class TestScoreAndPredict:
    def test_zero_class_vectors(self):
        assert not score(np.ones(5), np.zeros((5, 3))).any()

    def test_one_hot_extracts_row(self):
        W = np.arange(12.0).reshape(4, 3)
        assert np.array_equal(score(np.eye(4)[2], W), W[2])

    def test_dot_product_oracle(self):
        rng = np.random.default_rng(5)
        h, W = rng.standard_normal(7), rng.standard_normal((7, 4))
        oracle = [sum(h[i] * W[i, c] for i in range(7)) for c in range(4)]
        np.testing.assert_allclose(score(h, W), oracle, atol=1e-12)

    def test_dim_mismatch(self):
        with pytest.raises(RejectedInputError):
            score(np.ones(3), np.ones((4, 2)))

    def test_predict_rules(self):
        assert predict([-0.5, -2.0]) == OUTSIDE
        assert predict([-1, 0.7, 0.2]) == 1
        assert predict([-0.1, -0.1]) == OUTSIDE
        assert predict([0.3, 0.3]) == 0
        assert predict([0.0, 0.0]) == OUTSIDE

    @given(st.lists(st.floats(-10, 10), min_size=1, max_size=8), st.floats(0.01, 100))
    def test_predict_scale_invariant(self, scores, alpha):
        assert predict(np.array(scores) * alpha) == predict(scores)


class TestSeqCNN:
    def test_zero_baseline_predicts_outside(self):
        model, corpus = micro_model(Variant.BASELINE, baseline_hidden=6)
        zero_params(model)
        assert not model.sentence_scores(model.vocab.encode(corpus[0].words)).any()
        assert model.tag(corpus[0].words) == ["O"] * len(corpus[0])

    def test_baseline_hidden_in_unit_interval(self):
        model, corpus = micro_model(Variant.BASELINE, baseline_hidden=6, init_scale=3.0)
        win = model.windows(model.vocab.encode(corpus[1].words))
        h = model.forward(win.past[0], win.future[0], win.surrounding[0]).h
        assert h.shape == (6,) and np.all((h > 0) & (h < 1))

    def test_baseline_reads_eleven_words_by_default(self):
        model, corpus = micro_model(Variant.BASELINE, baseline_hidden=3)
        assert model.windows(model.vocab.encode(corpus[0].words)).surrounding.shape == (6, 11)

    @pytest.mark.parametrize("variant", list(Variant))
    def test_forward_deterministic(self, variant):
        model, corpus = micro_model(variant, baseline_hidden=5)
        ids = model.vocab.encode(corpus[2].words)
        assert np.array_equal(model.sentence_scores(ids), model.sentence_scores(ids))

    @pytest.mark.parametrize("variant", list(Variant))
    def test_gradients_match_finite_differences(self, variant):
        model, corpus = micro_model(variant, baseline_hidden=5)
        encoded = encode_corpus(model, corpus)
        for kind in ("ranking", "hinge") if variant is Variant.BI_CONCAT else ("ranking",):
            analytic = analytic_gradients(model, encoded, kind)
            numeric = finite_differences(lambda: total_loss(model, encoded, kind), model.params)
            for name in model.params:
                err = relative_error(analytic[name], numeric[name])
                # hinge kinks can sit inside the difference stencil; compare ranking strictly
                tol = 1e-4 if kind == "ranking" else 1e-2
                assert err.max() < tol, (variant, kind, name, err.max())

    def test_no_surrounding_input(self):
        model, corpus = micro_model(cs=-1)
        assert "U" not in model.params
        encoded = encode_corpus(model, corpus)
        analytic = analytic_gradients(model, encoded)
        numeric = finite_differences(lambda: total_loss(model, encoded), model.params)
        for name in model.params:
            assert relative_error(analytic[name], numeric[name]).max() < 1e-4

    def test_rank1_matches_dense(self):
        u, v = np.arange(3.0), np.arange(4.0)
        assert np.array_equal(Rank1(u, v).toarray(), np.outer(u, v))

    def test_shape_validation(self):
        model, _ = micro_model()
        bad = dict(model.params)
        bad["Vp"] = np.zeros((2, 2))
        with pytest.raises(RejectedInputError):
            SeqCNN(model.hp, model.vocab, model.labels, bad)


class TestCheckpoint:
    @pytest.mark.parametrize("variant", list(Variant))
    def test_round_trip_bitwise(self, tmp_path, variant):
        model, corpus = micro_model(variant, seed=3, baseline_hidden=4)
        model.save(tmp_path / "m.ckpt")
        again = SeqCNN.load(tmp_path / "m.ckpt")
        assert again.hp == model.hp and again.vocab == model.vocab and again.labels == model.labels
        for s in corpus:
            ids = model.vocab.encode(s.words)
            assert np.array_equal(again.sentence_scores(ids), model.sentence_scores(ids))

    def test_bytes_deterministic(self, tmp_path):
        model, _ = micro_model()
        model.save(tmp_path / "a")
        model.save(tmp_path / "b")
        assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()

    def test_version_check(self, tmp_path):
        model, _ = micro_model()
        model.save(tmp_path / "a")
        with zipfile.ZipFile(tmp_path / "a") as src, zipfile.ZipFile(tmp_path / "b", "w") as dst:
            for item in src.infolist():
                data = src.read(item)
                if item.filename == "meta.json":
                    data = data.replace(b'"format_version": 1', b'"format_version": 99')
                dst.writestr(item, data)
        with pytest.raises(RejectedInputError):
            SeqCNN.load(tmp_path / "b")


@given(seed=st.integers(0, 2**16))
@settings(max_examples=25, deadline=None)
def test_bi_add_degenerates_to_past(seed):
    add, corpus = micro_model(Variant.BI_ADD, seed=seed)
    add.params["Vf"][...] = 0.0
    past_params = {k: v for k, v in add.params.items() if k not in ("Ff", "bf", "Vf")}
    past = SeqCNN(add.hp.replace(variant=Variant.PAST), add.vocab, add.labels, past_params)
    for s in corpus:
        ids = add.vocab.encode(s.words)
        assert np.array_equal(add.sentence_scores(ids), past.sentence_scores(ids))
