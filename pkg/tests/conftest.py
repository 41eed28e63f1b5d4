import numpy as np
import pytest

from embedsum.corpus import (
    RawDocument,
    RawSentence,
    build_vocabulary,
    encode_corpus,
)
from embedsum.embeddings import EmbeddingMatrix


def make_raw_doc(doc_id, sentences):
    """Raw document from a list of token lists (one per sentence)."""
    return RawDocument(
        doc_id, tuple(RawSentence(tuple(s), (0, 0)) for s in sentences)
    )


def make_corpus(sentence_lists, min_count=1, oov_policy="drop"):
    """(vocab, encoded docs) from a list of documents of token lists."""
    raw = [make_raw_doc(f"d{i}", sents) for i, sents in enumerate(sentence_lists)]
    vocab = build_vocabulary(raw, min_count)
    return vocab, encode_corpus(vocab, raw, oov_policy)


def embedding_from(words, vectors, method="svd", output=None):
    arr = np.asarray(vectors, dtype=float)
    out = None if output is None else np.asarray(output, dtype=float)
    return EmbeddingMatrix(
        words=tuple(words),
        input_vectors=arr,
        output_vectors=out,
        dim=arr.shape[1],
        method=method,
    )


def finite_difference(loss_fn, arrays, step=1e-5):
    """Central finite-difference gradients of loss_fn() w.r.t. each array.

    loss_fn takes no arguments and reads the (mutated in place) arrays.
    """
    grads = []
    for arr in arrays:
        g = np.zeros_like(arr)
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = arr[idx]
            arr[idx] = orig + step
            up = loss_fn()
            arr[idx] = orig - step
            down = loss_fn()
            arr[idx] = orig
            g[idx] = (up - down) / (2.0 * step)
        grads.append(g)
    return grads


def rel_err(a, b):
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    denom = max(float(np.linalg.norm(b)), 1e-12)
    return float(np.linalg.norm(a - b)) / denom


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
