import numpy as np
import pytest

from embedsum.cooccur import accumulate, to_log_matrix
from embedsum.svd import svd_embeddings, truncated_svd
from conftest import make_corpus


def random_symmetric(rng, n):
    a = rng.normal(size=(n, n))
    return a + a.T


class TestTruncatedSvd:
    def test_identity_2x2(self):
        f = truncated_svd(np.eye(2), 2)
        assert np.allclose(f.sigma, [1.0, 1.0], atol=1e-12)
        assert np.allclose(f.reconstruct(), np.eye(2), atol=1e-10)

    def test_hand_eigendecomposition(self):
        f = truncated_svd(np.array([[2.0, 1.0], [1.0, 2.0]]), 1)
        assert f.sigma[0] == pytest.approx(3.0, abs=1e-10)
        col = f.u[:, 0]
        expected = np.array([1.0, 1.0]) / np.sqrt(2.0)
        assert min(
            np.abs(col - expected).max(), np.abs(col + expected).max()
        ) < 1e-9

    def test_rank5_error_matches_dense_oracle(self, rng):
        a = random_symmetric(rng, 30)
        f = truncated_svd(a, 5, seed=1)
        err = np.linalg.norm(a - f.reconstruct())
        sigma_full = np.linalg.svd(a, compute_uv=False)
        expected = np.sqrt(np.sum(sigma_full[5:] ** 2))
        assert abs(err - expected) / expected < 1e-6

    def test_orthonormal_columns(self, rng):
        a = random_symmetric(rng, 25)
        f = truncated_svd(a, 7, seed=2)
        gram = f.u.T @ f.u
        assert np.abs(gram - np.eye(7)).max() < 1e-8

    def test_sigma_nonincreasing_nonnegative(self, rng):
        a = random_symmetric(rng, 20)
        f = truncated_svd(a, 10, seed=3)
        assert (f.sigma >= 0).all()
        assert (np.diff(f.sigma) <= 1e-12).all()

    @pytest.mark.parametrize("n", [5, 20, 50])
    def test_full_rank_reconstruction_exact(self, n, rng):
        a = random_symmetric(rng, n)
        f = truncated_svd(a, n, seed=4)
        assert np.linalg.norm(a - f.reconstruct()) < 1e-8

    def test_rank_above_size_errors(self):
        with pytest.raises(ValueError, match="rank"):
            truncated_svd(np.eye(3), 4)

    def test_nonsymmetric_errors(self):
        with pytest.raises(ValueError, match="symmetric"):
            truncated_svd(np.array([[1.0, 2.0], [0.0, 1.0]]), 1)

    def test_zero_matrix(self):
        f = truncated_svd(np.zeros((4, 4)), 2)
        assert np.allclose(f.sigma, 0.0)
        gram = f.u.T @ f.u
        assert np.abs(gram - np.eye(2)).max() < 1e-8

    def test_deterministic_given_seed(self, rng):
        a = random_symmetric(rng, 15)
        f1 = truncated_svd(a, 4, seed=8)
        f2 = truncated_svd(a, 4, seed=8)
        assert np.array_equal(f1.u, f2.u)
        assert np.array_equal(f1.sigma, f2.sigma)

    def test_accepts_sparse_log_matrix(self):
        vocab, docs = make_corpus([[["a", "b", "c", "a", "b"]]])
        la = to_log_matrix(accumulate(docs, vocab, window=2))
        f = truncated_svd(la, 2, seed=0)
        dense = la.to_dense()
        sigma_full = np.abs(np.linalg.eigvalsh(dense))
        assert f.sigma[0] == pytest.approx(np.sort(sigma_full)[-1], rel=1e-8)


class TestSvdEmbeddings:
    def test_zero_exponent_emits_raw_rows(self, rng):
        a = random_symmetric(rng, 6)
        f = truncated_svd(a, 3, seed=5)
        e = svd_embeddings(f, tuple("abcdef"), scale_exponent=0.0)
        assert np.array_equal(e.input_vectors, f.u)
        assert e.output_vectors is None
        assert e.method == "svd"

    def test_unit_exponent_scales_by_sigma(self):
        f = truncated_svd(np.diag([3.0, 2.0, 1.0]), 3, seed=6)
        e = svd_embeddings(f, ("a", "b", "c"), scale_exponent=1.0)
        assert np.array_equal(e.input_vectors, f.u * f.sigma)
        # identity factorization: sigma is all ones, so scaling is a no-op
        fi = truncated_svd(np.eye(3), 3, seed=6)
        ei = svd_embeddings(fi, ("a", "b", "c"), scale_exponent=1.0)
        assert np.allclose(ei.input_vectors, fi.u, atol=1e-12)

    def test_identical_cooccurrence_rows_have_cosine_one(self):
        # c and d occur in interchangeable contexts, so their rows in the
        # log co-occurrence matrix are identical
        sents = [["a", "c", "b"], ["a", "d", "b"]] * 3
        vocab, docs = make_corpus([sents])
        la = to_log_matrix(accumulate(docs, vocab, window=1))
        c, d = vocab.id_of("c"), vocab.id_of("d")
        dense = la.to_dense()
        assert np.array_equal(dense[c], dense[d])
        f = truncated_svd(la, 2, seed=0)
        e = svd_embeddings(f, vocab.words)
        vc, vd = e.input_vectors[c], e.input_vectors[d]
        cos = vc @ vd / (np.linalg.norm(vc) * np.linalg.norm(vd))
        assert abs(cos - 1.0) < 1e-9

    def test_word_count_mismatch_errors(self):
        f = truncated_svd(np.eye(3), 2)
        with pytest.raises(ValueError, match="words"):
            svd_embeddings(f, ("a", "b"))
