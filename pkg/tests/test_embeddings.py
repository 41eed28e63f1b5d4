import numpy as np
import pytest

from conftest import finite_difference, make_corpus, rel_err
from embedsum.embeddings import (
    EmbeddingMatrix,
    TrainConfig,
    cbow_example_loss,
    load_embeddings,
    noise_distribution,
    save_embeddings,
    sg_example_loss,
    sgns_example_grads,
    sigmoid,
    train_cbow,
    train_sg,
)


def alternating_corpus(n_tokens=200):
    tokens = ["a", "b"] * (n_tokens // 2)
    return make_corpus([[tokens]])


def dense_sgns_grads(inp, out, ctx_ids, target, negs, mode):
    """Assemble full-table gradients from the per-example pieces."""
    if mode == "cbow":
        h = inp[list(ctx_ids)].mean(axis=0)
    else:
        h = inp[ctx_ids]  # ctx_ids is the center word id here
    ids = [target, *negs]
    _, g, grad_h = sgns_example_grads(h, out, ids)
    d_inp = np.zeros_like(inp)
    d_out = np.zeros_like(out)
    for r, wid in enumerate(ids):
        d_out[wid] += g[r] * h
    if mode == "cbow":
        for wid in ctx_ids:
            d_inp[wid] += grad_h / len(ctx_ids)
    else:
        d_inp[ctx_ids] += grad_h
    return d_inp, d_out


class TestGradients:
    @pytest.mark.parametrize("mode", ["cbow", "sg"])
    def test_matches_finite_differences(self, mode, rng):
        for _ in range(20):
            vocab_size = int(rng.integers(3, 15))
            dim = int(rng.integers(2, 8))
            inp = rng.normal(scale=0.5, size=(vocab_size, dim))
            out = rng.normal(scale=0.5, size=(vocab_size, dim))
            negs = rng.integers(0, vocab_size, size=4).tolist()
            if mode == "cbow":
                ctx = rng.integers(0, vocab_size, size=int(rng.integers(1, 5))).tolist()
                target = int(rng.integers(0, vocab_size))
                loss_fn = lambda: cbow_example_loss(inp, out, ctx, target, negs)
                d_inp, d_out = dense_sgns_grads(inp, out, ctx, target, negs, "cbow")
            else:
                center = int(rng.integers(0, vocab_size))
                context = int(rng.integers(0, vocab_size))
                loss_fn = lambda: sg_example_loss(inp, out, center, context, negs)
                d_inp, d_out = dense_sgns_grads(inp, out, center, context, negs, "sg")
            fd_inp, fd_out = finite_difference(loss_fn, [inp, out])
            assert rel_err(d_inp, fd_inp) < 1e-4
            assert rel_err(d_out, fd_out) < 1e-4


class TestTraining:
    def test_zero_epochs_returns_seeded_init(self):
        vocab, docs = make_corpus([[["a", "b", "a", "b"]]])
        cfg = TrainConfig(dim=4, window=1, epochs=0, seed=7)
        e = train_cbow(docs, vocab, cfg)
        expected = np.random.default_rng(7).uniform(-0.5 / 4, 0.5 / 4, size=(2, 4))
        assert np.array_equal(e.input_vectors, expected)
        assert np.array_equal(e.output_vectors, np.zeros((2, 4)))

    def test_cbow_learns_alternating_corpus(self):
        vocab, docs = alternating_corpus()
        cfg = TrainConfig(dim=4, window=1, epochs=10, lr_initial=0.05, seed=3)
        e = train_cbow(docs, vocab, cfg)
        a, b = vocab.id_of("a"), vocab.id_of("b")
        score = float(e.input_vectors[a] @ e.output_vectors[b])
        assert sigmoid(score) > 0.9

    def test_sg_learns_alternating_corpus(self):
        vocab, docs = alternating_corpus()
        cfg = TrainConfig(dim=4, window=1, epochs=10, lr_initial=0.05, seed=3)
        e = train_sg(docs, vocab, cfg)
        a, b = vocab.id_of("a"), vocab.id_of("b")
        score = float(e.input_vectors[a] @ e.output_vectors[b])
        assert sigmoid(score) > 0.9

    @pytest.mark.parametrize("train", [train_cbow, train_sg])
    def test_deterministic_given_seed(self, train):
        vocab, docs = make_corpus([[["a", "b", "c", "a", "b"], ["c", "b", "a"]]])
        cfg = TrainConfig(dim=6, window=2, epochs=3, seed=11)
        e1 = train(docs, vocab, cfg)
        e2 = train(docs, vocab, cfg)
        assert np.array_equal(e1.input_vectors, e2.input_vectors)
        assert np.array_equal(e1.output_vectors, e2.output_vectors)

    @pytest.mark.parametrize("mode", ["cbow", "sg"])
    def test_loss_decreases_at_small_lr(self, mode):
        vocab, docs = make_corpus(
            [[["a", "b", "c", "a", "b", "c", "d", "a"], ["d", "c", "b", "a"]]]
        )
        train = train_cbow if mode == "cbow" else train_sg
        kw = dict(dim=5, window=2, lr_initial=1e-3, lr_final=1e-3, seed=5)
        init = train(docs, vocab, TrainConfig(epochs=0, **kw))
        trained = train(docs, vocab, TrainConfig(epochs=10, **kw))
        loss0 = corpus_surrogate_loss(init, docs, vocab, mode, window=2)
        loss1 = corpus_surrogate_loss(trained, docs, vocab, mode, window=2)
        assert loss1 < loss0

    def test_tiny_vocabulary_errors(self):
        vocab, docs = make_corpus([[["a", "a", "a"]]])
        with pytest.raises(ValueError, match="at least 2"):
            train_cbow(docs, vocab, TrainConfig(dim=2))

    def test_deterministic_flag_rejects_workers(self):
        vocab, docs = make_corpus([[["a", "b"]]])
        with pytest.raises(ValueError, match="workers=1"):
            train_cbow(docs, vocab, TrainConfig(dim=2, deterministic=True), workers=2)

    def test_parallel_mode_produces_finite_tables(self):
        vocab, docs = make_corpus([[["a", "b", "c", "d"] * 5] for _ in range(4)])
        cfg = TrainConfig(dim=4, window=2, epochs=2, seed=1, deterministic=False)
        e = train_sg(docs, vocab, cfg, workers=2)
        assert np.isfinite(e.input_vectors).all()


def corpus_surrogate_loss(e, docs, vocab, mode, window, k=5, seed=99):
    """Total negative-sampling loss over the corpus with freshly seeded draws."""
    rng = np.random.default_rng(seed)
    noise_cum = np.cumsum(noise_distribution(vocab))
    total = 0.0
    for doc in docs:
        for sent in doc.sentences:
            ids = sent.usable_ids()
            if len(ids) < 2:
                continue
            for t in range(len(ids)):
                ctx = ids[max(0, t - window):t] + ids[t + 1:t + 1 + window]
                if not ctx:
                    continue
                if mode == "cbow":
                    negs = np.searchsorted(noise_cum, rng.random(k), side="right")
                    negs = np.minimum(negs, vocab.size - 1)
                    negs = [n for n in negs if n != ids[t]]
                    total += cbow_example_loss(
                        e.input_vectors, e.output_vectors, ctx, ids[t], negs
                    )
                else:
                    for c in ctx:
                        negs = np.searchsorted(noise_cum, rng.random(k), side="right")
                        negs = np.minimum(negs, vocab.size - 1)
                        negs = [n for n in negs if n != c]
                        total += sg_example_loss(
                            e.input_vectors, e.output_vectors, ids[t], c, negs
                        )
    return total


class TestNoise:
    def test_distribution_normalized(self):
        vocab, _ = make_corpus([[["a", "a", "a", "b", "c"]]])
        dist = noise_distribution(vocab, 0.75)
        assert dist.sum() == pytest.approx(1.0, abs=1e-12)
        assert (dist > 0).all()

    def test_exponent_flattens(self):
        vocab, _ = make_corpus([[["a"] * 9 + ["b"]]])
        raw = noise_distribution(vocab, 1.0)
        flat = noise_distribution(vocab, 0.0)
        assert raw.max() > flat.max()
        assert flat[0] == pytest.approx(flat[1])


class TestEmbeddingIO:
    def make_matrix(self, with_output=True, rng=None):
        rng = rng or np.random.default_rng(0)
        inp = rng.normal(size=(3, 4))
        out = rng.normal(size=(3, 4)) if with_output else None
        return EmbeddingMatrix(("a", "b", "c"), inp, out, 4, "cbow" if with_output else "svd")

    def test_round_trip_single_table(self, tmp_path):
        e = self.make_matrix(with_output=False)
        path = tmp_path / "emb.txt"
        save_embeddings(e, str(path))
        loaded = load_embeddings(str(path))
        assert loaded.words == e.words
        assert loaded.method == e.method
        assert np.max(np.abs(loaded.input_vectors - e.input_vectors)) < 1e-6
        assert loaded.output_vectors is None

    def test_round_trip_dual_table(self, tmp_path):
        e = self.make_matrix(with_output=True)
        path = tmp_path / "emb.txt"
        save_embeddings(e, str(path), {"command": "test"})
        loaded = load_embeddings(str(path))
        assert np.max(np.abs(loaded.input_vectors - e.input_vectors)) < 1e-6
        assert np.max(np.abs(loaded.output_vectors - e.output_vectors)) < 1e-6

    def test_truncated_row_names_index(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("2 3 svd\na 1.0 2.0 3.0\nb 1.0 2.0\n")
        with pytest.raises(ValueError, match="row 1"):
            load_embeddings(str(path))

    def test_header_row_count_mismatch(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("2 2 svd\na 1.0 2.0\nb 1.0 2.0\nc 1.0 2.0\n")
        with pytest.raises(ValueError, match="claims 2"):
            load_embeddings(str(path))


class TestTrainConfig:
    def test_lr_final_defaults_to_hundredth(self):
        cfg = TrainConfig(lr_initial=0.5)
        assert cfg.lr_final == pytest.approx(0.005)

    def test_rejects_final_above_initial(self):
        with pytest.raises(ValueError):
            TrainConfig(lr_initial=0.01, lr_final=0.1)

    @pytest.mark.parametrize(
        "kw",
        [dict(dim=0), dict(window=0), dict(epochs=-1), dict(negative_samples=0),
         dict(glove_xmax=0.0), dict(lr_initial=-1.0)],
    )
    def test_rejects_bad_fields(self, kw):
        with pytest.raises(ValueError):
            TrainConfig(**kw)
