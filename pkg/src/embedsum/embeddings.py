"""Word embedding trainers behind one common output contract.

Four methods produce an :class:`EmbeddingMatrix`:

* CBOW — predict the center word from the unweighted mean of the in-window
  context word vectors, trained with the negative-sampling surrogate.
* Skip-gram — predict each context word from the center word, same surrogate.
* GloVe-style weighted least squares — fit dot products plus biases to log
  co-occurrence counts by SGD over the stored entries.
* Truncated SVD of the log co-occurrence matrix (see :mod:`embedsum.svd`).

The full-vocabulary softmax defines the model probabilities; training uses
the negative-sampling surrogate (per positive pair, maximize
log sigma(score) + sum over k sampled negatives of log sigma(-score)),
with negatives drawn from the unigram distribution raised to a noise
exponent.  The exact softmax scorer is kept for ranking and for small-V
tests.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cooccur import CooccurrenceMatrix
from .corpus import Document, Vocabulary

METHODS = ("cbow", "sg", "glove", "svd")


class NumericalError(RuntimeError):
    """Raised when training produces non-finite parameters."""


@dataclass
class TrainConfig:
    """Hyperparameters shared by the SGD trainers.

    ``lr_final`` defaults to ``lr_initial / 100``; the rate decays linearly
    between the two over all updates.  ``deterministic=True`` requires a
    single worker and makes runs bit-reproducible for a fixed seed.
    """

    dim: int = 100
    window: int = 5
    epochs: int = 5
    lr_initial: float = 0.025
    lr_final: float | None = None
    negative_samples: int = 5
    noise_exponent: float = 0.75
    glove_xmax: float = 100.0
    glove_alpha: float = 0.75
    seed: int = 42
    deterministic: bool = True

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.lr_initial <= 0:
            raise ValueError("lr_initial must be positive")
        if self.lr_final is None:
            self.lr_final = self.lr_initial / 100.0
        if not (0.0 < self.lr_final <= self.lr_initial):
            raise ValueError("need 0 < lr_final <= lr_initial")
        if self.negative_samples < 1:
            raise ValueError("negative_samples must be >= 1")
        if self.noise_exponent < 0:
            raise ValueError("noise_exponent must be >= 0")
        if self.glove_xmax <= 0 or self.glove_alpha <= 0:
            raise ValueError("glove_xmax and glove_alpha must be positive")


@dataclass(eq=False)
class EmbeddingMatrix:
    """V x d embedding tables plus metadata.

    ``input_vectors`` is the emitted word representation; ``output_vectors``
    holds the context/output table (CBOW, SG and the least-squares trainer;
    absent for SVD).  ``biases`` carries the least-squares bias terms.
    """

    words: tuple[str, ...]
    input_vectors: np.ndarray
    output_vectors: np.ndarray | None
    dim: int
    method: str
    biases: np.ndarray | None = None
    output_biases: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown method: {self.method!r}")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.input_vectors.shape != (len(self.words), self.dim):
            raise ValueError("input_vectors shape does not match words x dim")
        if not np.isfinite(self.input_vectors).all():
            raise ValueError("non-finite input vectors")
        if self.output_vectors is not None and not np.isfinite(self.output_vectors).all():
            raise ValueError("non-finite output vectors")

    @property
    def size(self) -> int:
        return len(self.words)


def sigmoid(x: np.ndarray | float) -> np.ndarray | float:
    """Numerically stable logistic function."""
    x = np.asarray(x, dtype=float)
    t = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + t), t / (1.0 + t))


def log_sigmoid(x: np.ndarray | float) -> np.ndarray | float:
    """log(sigmoid(x)) without overflow for large |x|."""
    x = np.asarray(x, dtype=float)
    return np.minimum(x, 0.0) - np.log1p(np.exp(-np.abs(x)))


def conditional_softmax(query: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Exact softmax over the vocabulary of ``table @ query``, max-shifted."""
    scores = table @ query
    m = scores.max()
    e = np.exp(scores - m)
    return e / e.sum()


def noise_distribution(vocab: Vocabulary, exponent: float = 0.75) -> np.ndarray:
    """Unigram distribution raised to ``exponent``, normalized."""
    freq = np.asarray(vocab.freq, dtype=float) ** exponent
    return freq / freq.sum()


def _draw_negatives(
    rng: np.random.Generator, noise_cum: np.ndarray, k: int, exclude: int
) -> np.ndarray:
    """Sample k negatives from the noise distribution, skipping the target."""
    negs = np.searchsorted(noise_cum, rng.random(k), side="right")
    negs = np.minimum(negs, len(noise_cum) - 1)
    return negs[negs != exclude]


def sgns_example_grads(
    h: np.ndarray, out: np.ndarray, ids: Sequence[int]
) -> tuple[float, np.ndarray, np.ndarray]:
    """Loss and gradients of one negative-sampling example.

    ``ids[0]`` is the positive word, the rest are sampled negatives.  Returns
    (loss, g, grad_h) where the gradient w.r.t. output row ``ids[r]`` is
    ``g[r] * h`` and ``grad_h`` is the gradient w.r.t. the hidden vector.
    """
    rows = out[list(ids)]
    scores = rows @ h
    loss = float(-log_sigmoid(scores[0]) - np.sum(log_sigmoid(-scores[1:])))
    g = np.asarray(sigmoid(scores)).copy()
    g[0] -= 1.0
    grad_h = g @ rows
    return loss, g, grad_h


def cbow_example_loss(
    inp: np.ndarray,
    out: np.ndarray,
    ctx_ids: Sequence[int],
    target: int,
    neg_ids: Sequence[int],
) -> float:
    """Surrogate loss of one CBOW example with fixed negatives."""
    h = inp[list(ctx_ids)].mean(axis=0)
    loss, _, _ = sgns_example_grads(h, out, [target, *neg_ids])
    return loss


def sg_example_loss(
    inp: np.ndarray,
    out: np.ndarray,
    center: int,
    context: int,
    neg_ids: Sequence[int],
) -> float:
    """Surrogate loss of one skip-gram pair with fixed negatives."""
    loss, _, _ = sgns_example_grads(inp[center], out, [context, *neg_ids])
    return loss


class _LinearLr:
    """Linear decay from initial to final over a known number of updates."""

    def __init__(self, initial: float, final: float, total: int):
        self.initial = initial
        self.final = final
        self.total = max(total, 1)
        self.step = 0

    def next(self) -> float:
        frac = min(self.step / max(self.total - 1, 1), 1.0)
        self.step += 1
        return self.initial + (self.final - self.initial) * frac


def _sentence_sequences(docs: Sequence[Document]) -> list[list[int]]:
    """Usable-id sequences; sentences shorter than 2 tokens contribute nothing."""
    seqs = []
    for doc in docs:
        for sent in doc.sentences:
            ids = sent.usable_ids()
            if len(ids) >= 2:
                seqs.append(ids)
    return seqs


def _count_examples(seqs: Sequence[Sequence[int]], window: int, mode: str) -> int:
    total = 0
    for seq in seqs:
        n = len(seq)
        if mode == "cbow":
            total += n  # every position has context once n >= 2
        else:
            for t in range(n):
                total += min(n - 1, t + window) - max(0, t - window)
    return total


def _init_tables(
    rng: np.random.Generator, size: int, dim: int
) -> tuple[np.ndarray, np.ndarray]:
    inp = rng.uniform(-0.5 / dim, 0.5 / dim, size=(size, dim))
    out = np.zeros((size, dim))
    return inp, out


def _sgns_pass(
    seqs: Sequence[Sequence[int]],
    inp: np.ndarray,
    out: np.ndarray,
    cfg: TrainConfig,
    mode: str,
    noise_cum: np.ndarray,
    rng: np.random.Generator,
    lr: _LinearLr,
) -> None:
    c = cfg.window
    k = cfg.negative_samples
    for seq in seqs:
        n = len(seq)
        for t in range(n):
            target_word = seq[t]
            ctx = seq[max(0, t - c):t] + seq[t + 1:t + 1 + c]
            if not ctx:
                continue
            if mode == "cbow":
                negs = _draw_negatives(rng, noise_cum, k, target_word)
                rate = lr.next()
                h = inp[ctx].mean(axis=0)
                ids = [target_word, *negs]
                _, g, grad_h = sgns_example_grads(h, out, ids)
                for r, wid in enumerate(ids):
                    out[wid] -= (rate * g[r]) * h
                step = (rate / len(ctx)) * grad_h
                for wid in ctx:
                    inp[wid] -= step
            else:
                for ctx_word in ctx:
                    negs = _draw_negatives(rng, noise_cum, k, ctx_word)
                    rate = lr.next()
                    h = inp[target_word]
                    ids = [ctx_word, *negs]
                    _, g, grad_h = sgns_example_grads(h, out, ids)
                    for r, wid in enumerate(ids):
                        out[wid] -= (rate * g[r]) * h
                    inp[target_word] -= rate * grad_h


def _check_finite(*tables: np.ndarray) -> None:
    for t in tables:
        if not np.isfinite(t).all():
            raise NumericalError("training diverged: non-finite parameters")


def _train_sgns(
    docs: Sequence[Document],
    vocab: Vocabulary,
    cfg: TrainConfig,
    mode: str,
    workers: int,
) -> EmbeddingMatrix:
    if vocab.size < 2:
        raise ValueError("vocabulary must contain at least 2 words")
    if cfg.deterministic and workers > 1:
        raise ValueError("deterministic training requires workers=1")
    rng = np.random.default_rng(cfg.seed)
    inp, out = _init_tables(rng, vocab.size, cfg.dim)
    seqs = _sentence_sequences(docs)
    if cfg.epochs > 0 and seqs:
        noise_cum = np.cumsum(noise_distribution(vocab, cfg.noise_exponent))
        if workers <= 1:
            total = _count_examples(seqs, cfg.window, mode) * cfg.epochs
            lr = _LinearLr(cfg.lr_initial, cfg.lr_final, total)
            # divergence shows up as inf/nan and is caught per epoch
            with np.errstate(over="ignore", invalid="ignore"):
                for _ in range(cfg.epochs):
                    _sgns_pass(seqs, inp, out, cfg, mode, noise_cum, rng, lr)
                    _check_finite(inp, out)
        else:
            # Relaxed-consistency mode: workers update the shared tables
            # without locks, so per-cell results may differ run to run.
            shards = [seqs[i::workers] for i in range(workers)]
            threads = []
            for widx, shard in enumerate(shards):
                if not shard:
                    continue
                wrng = np.random.default_rng([cfg.seed, widx])
                total = _count_examples(shard, cfg.window, mode) * cfg.epochs
                lr = _LinearLr(cfg.lr_initial, cfg.lr_final, total)

                def run(shard=shard, wrng=wrng, lr=lr):
                    for _ in range(cfg.epochs):
                        _sgns_pass(shard, inp, out, cfg, mode, noise_cum, wrng, lr)

                threads.append(threading.Thread(target=run))
            for th in threads:
                th.start()
            for th in threads:
                th.join()
            _check_finite(inp, out)
    return EmbeddingMatrix(
        words=vocab.words,
        input_vectors=inp,
        output_vectors=out,
        dim=cfg.dim,
        method=mode,
    )


def train_cbow(
    docs: Sequence[Document], vocab: Vocabulary, cfg: TrainConfig, workers: int = 1
) -> EmbeddingMatrix:
    """Train CBOW with negative sampling.

    The hidden vector at position t is the unweighted mean of the input
    vectors of the <= 2*window in-window context words of the same sentence;
    the center word is the positive example scored against the output table.
    """
    return _train_sgns(docs, vocab, cfg, "cbow", workers)


def train_sg(
    docs: Sequence[Document], vocab: Vocabulary, cfg: TrainConfig, workers: int = 1
) -> EmbeddingMatrix:
    """Train skip-gram with negative sampling.

    Every (center, context) pair in the window is one example: the center's
    input vector predicts the context word against the output table.
    """
    return _train_sgns(docs, vocab, cfg, "sg", workers)


def glove_weight(x: float, xmax: float, alpha: float) -> float:
    """Monotonic smoothing weight: (x / xmax)^alpha capped at 1."""
    return (x / xmax) ** alpha if x < xmax else 1.0


def glove_entry_grads(
    vi: np.ndarray, vtj: np.ndarray, bi: float, btj: float, logx: float, weight: float
) -> tuple[float, float]:
    """Per-entry loss and shared gradient factor.

    The entry loss is weight * (vi . vtj + bi + btj - logx)^2; gradients are
    g*vtj (w.r.t. vi), g*vi (w.r.t. vtj) and g (w.r.t. both biases), with
    g = 2 * weight * (residual).
    """
    diff = float(vi @ vtj + bi + btj - logx)
    return weight * diff * diff, 2.0 * weight * diff


def train_glove(
    x: CooccurrenceMatrix,
    cfg: TrainConfig,
    words: Sequence[str] | None = None,
    workers: int = 1,
) -> EmbeddingMatrix:
    """Fit dot products plus biases to log counts by SGD over stored entries.

    Minimizes sum over stored (i, j) of f(X_ij) * (v_i . vt_j + b_i + bt_j
    - log X_ij)^2, visiting entries in a seeded shuffled order each epoch.
    The emitted word representation is v + vt (sum of the two tables).
    """
    if not x.entries:
        raise ValueError("empty co-occurrence matrix")
    if cfg.deterministic and workers > 1:
        raise ValueError("deterministic training requires workers=1")

    items = sorted(x.entries.items())
    ii = np.array([k[0] for k, _ in items], dtype=np.int64)
    jj = np.array([k[1] for k, _ in items], dtype=np.int64)
    xx = np.array([v for _, v in items], dtype=float)
    if (xx <= 0).any():
        bad = int(np.argmax(xx <= 0))
        raise ValueError(
            f"non-positive count stored at ({ii[bad]}, {jj[bad]}): cannot take log"
        )
    logx = np.log(xx)
    wgt = np.array([glove_weight(v, cfg.glove_xmax, cfg.glove_alpha) for v in xx])

    size = x.vocab_size
    rng = np.random.default_rng(cfg.seed)
    v, vt = _init_tables(rng, size, cfg.dim)
    b = np.zeros(size)
    bt = np.zeros(size)

    n = len(items)
    if cfg.epochs > 0:
        if workers <= 1:
            lr = _LinearLr(cfg.lr_initial, cfg.lr_final, cfg.epochs * n)
            with np.errstate(over="ignore", invalid="ignore"):
                for _ in range(cfg.epochs):
                    _glove_pass(rng.permutation(n), ii, jj, logx, wgt, v, vt, b, bt, lr)
                    _check_finite(v, vt)
        else:
            threads = []
            for widx in range(workers):
                sel = np.arange(widx, n, workers)
                if sel.size == 0:
                    continue
                wrng = np.random.default_rng([cfg.seed, widx])
                lr = _LinearLr(cfg.lr_initial, cfg.lr_final, cfg.epochs * sel.size)

                def run(sel=sel, wrng=wrng, lr=lr):
                    for _ in range(cfg.epochs):
                        order = sel[wrng.permutation(sel.size)]
                        _glove_pass(order, ii, jj, logx, wgt, v, vt, b, bt, lr)

                threads.append(threading.Thread(target=run))
            for th in threads:
                th.start()
            for th in threads:
                th.join()
            _check_finite(v, vt)

    if words is None:
        words = [f"w{i}" for i in range(size)]
    elif len(words) != size:
        raise ValueError("words length does not match the matrix vocab_size")
    return EmbeddingMatrix(
        words=tuple(words),
        input_vectors=v + vt,
        output_vectors=vt,
        dim=cfg.dim,
        method="glove",
        biases=b,
        output_biases=bt,
    )


def _glove_pass(order, ii, jj, logx, wgt, v, vt, b, bt, lr: _LinearLr) -> None:
    for idx in order:
        i = ii[idx]
        j = jj[idx]
        _, g = glove_entry_grads(v[i], vt[j], b[i], bt[j], logx[idx], wgt[idx])
        rate = lr.next()
        gv = g * vt[j]
        gvt = g * v[i]
        v[i] -= rate * gv
        vt[j] -= rate * gvt
        b[i] -= rate * g
        bt[j] -= rate * g


def glove_total_loss(x, e_v: np.ndarray, e_vt: np.ndarray, b: np.ndarray, bt: np.ndarray,
                     xmax: float, alpha: float) -> float:
    """Weighted least-squares objective over all stored entries."""
    total = 0.0
    for (i, j), count in sorted(x.entries.items()):
        loss, _ = glove_entry_grads(e_v[i], e_vt[j], b[i], bt[j], float(np.log(count)),
                                    glove_weight(count, xmax, alpha))
        total += loss
    return total


def save_embeddings(e: EmbeddingMatrix, path: str, snapshot: dict | None = None) -> None:
    """Write the text format: "V d method" header, one "word c_1 .. c_d" row
    per word, and a second block of V rows when the output table is present."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, val in sorted((snapshot or {}).items()):
            fh.write(f"# {key}={val}\n")
        fh.write(f"{e.size} {e.dim} {e.method}\n")
        for table in (e.input_vectors, e.output_vectors):
            if table is None:
                continue
            for w, row in zip(e.words, table):
                comps = " ".join(repr(float(c)) for c in row)
                fh.write(f"{w} {comps}\n")


def load_embeddings(path: str) -> EmbeddingMatrix:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError(f"empty embedding file: {path}")
    head = lines[0].split()
    if len(head) != 3:
        raise ValueError(f"malformed embedding header: {lines[0]!r}")
    size, dim = int(head[0]), int(head[1])
    method = head[2]
    rows = lines[1:]
    if len(rows) not in (size, 2 * size):
        raise ValueError(
            f"header claims {size} words but file has {len(rows)} rows "
            f"(expected {size} or {2 * size})"
        )

    def parse_block(block: list[str], offset: int) -> tuple[list[str], np.ndarray]:
        words = []
        vecs = np.empty((len(block), dim))
        for r, ln in enumerate(block):
            parts = ln.split()
            if len(parts) != dim + 1:
                raise ValueError(f"row {offset + r}: expected {dim} components")
            words.append(parts[0])
            vecs[r] = [float(p) for p in parts[1:]]
        return words, vecs

    in_words, inp = parse_block(rows[:size], 0)
    out = None
    if len(rows) == 2 * size:
        out_words, out = parse_block(rows[size:], size)
        if out_words != in_words:
            raise ValueError("output block word order differs from input block")
    return EmbeddingMatrix(
        words=tuple(in_words),
        input_vectors=inp,
        output_vectors=out,
        dim=dim,
        method=method,
    )
