"""Sentence scoring and summary extraction.

Three rankers turn embeddings into sentence scores:

* cosine between the averaged document vector and each averaged sentence
  vector;
* a bilinear similarity v_D^T W v_S with W learned from (document,
  summary-sentence, non-summary-sentence) triplets by passive-aggressive
  updates, so summary sentences outscore non-summary ones by a margin;
* the log-likelihood of the whole document under a sentence-specific
  language model that interpolates the sentence unigram model with an
  embedding-derived word-given-word model.

A plain sentence-unigram ranker (the likelihood at interpolation weight 1)
is kept as the language-model baseline.  Extraction picks top-scored
sentences under a word-budget ratio and emits them in document order.
"""

from __future__ import annotations

import logging
import math
import weakref
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .corpus import OOV_ID, Document, Sentence
from .embeddings import EmbeddingMatrix

log = logging.getLogger(__name__)


@dataclass
class SentenceVector:
    """Frequency-weighted mean of in-vocabulary word vectors."""

    values: np.ndarray
    usable_tokens: int

    @property
    def valid(self) -> bool:
        return self.usable_tokens >= 1


def _weighted_mean(
    counts: Counter[int], length: int, e: EmbeddingMatrix
) -> SentenceVector:
    vec = np.zeros(e.dim)
    usable = 0
    for wid, c in counts.items():
        vec += (c / length) * e.input_vectors[wid]
        usable += c
    return SentenceVector(vec, usable)


def sentence_vector(s: Sentence, e: EmbeddingMatrix) -> SentenceVector:
    """v_S = sum over words of n(w, S)/|S| * v_w, over usable tokens only."""
    ids = s.usable_ids()
    if not ids:
        return SentenceVector(np.zeros(e.dim), 0)
    return _weighted_mean(Counter(ids), s.length, e)


def document_vector(doc: Document, e: EmbeddingMatrix) -> SentenceVector:
    """Same construction as sentence vectors, over all document tokens."""
    counts: Counter[int] = Counter()
    length = 0
    for s in doc.sentences:
        counts.update(s.usable_ids())
        length += s.length
    if not counts or length == 0:
        return SentenceVector(np.zeros(e.dim), 0)
    return _weighted_mean(counts, length, e)


def _ranked(scores: list[float]) -> list[tuple[int, float]]:
    """Descending by score, ties broken by earlier document position."""
    return sorted(enumerate(scores), key=lambda kv: (-kv[1], kv[0]))


def cosine_rank(doc: Document, e: EmbeddingMatrix) -> list[tuple[int, float]]:
    """Score each sentence by cosine(v_D, v_S); invalid sentences rank last."""
    dv = document_vector(doc, e)
    if not dv.valid:
        raise ValueError(f"document {doc.doc_id!r} has no in-vocabulary tokens")
    dn = float(np.linalg.norm(dv.values))
    scores = []
    for s in doc.sentences:
        sv = sentence_vector(s, e)
        if not sv.valid:
            scores.append(-math.inf)
            continue
        sn = float(np.linalg.norm(sv.values))
        if dn == 0.0 or sn == 0.0:
            scores.append(0.0)
        else:
            scores.append(float(dv.values @ sv.values) / (dn * sn))
    return _ranked(scores)


@dataclass
class BilinearModel:
    """d x d similarity matrix with its margin and aggressiveness bound."""

    w: np.ndarray
    delta: float
    aggressiveness: float
    trained_epochs: int = 0

    def __post_init__(self) -> None:
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.aggressiveness <= 0:
            raise ValueError("aggressiveness must be positive")
        if not np.isfinite(self.w).all():
            raise ValueError("non-finite similarity matrix")

    @property
    def dim(self) -> int:
        return self.w.shape[0]


@dataclass(frozen=True)
class Triplet:
    """Document vector with one summary and one non-summary sentence vector."""

    doc_vector: np.ndarray
    pos: np.ndarray
    neg: np.ndarray


def bilinear_score(m: BilinearModel, vd: np.ndarray, vs: np.ndarray) -> float:
    """Exact bilinear form vd^T W vs."""
    vd = np.asarray(vd, dtype=float)
    vs = np.asarray(vs, dtype=float)
    if vd.shape != (m.dim,) or vs.shape != (m.dim,):
        raise ValueError(
            f"dimension mismatch: model is {m.dim}, got {vd.shape} and {vs.shape}"
        )
    return float(vd @ m.w @ vs)


def triplet_loss(m: BilinearModel, t: Triplet) -> float:
    """Hinge loss max(0, delta - R(v_D, v_S+) + R(v_D, v_S-))."""
    r_pos = bilinear_score(m, t.doc_vector, t.pos)
    r_neg = bilinear_score(m, t.doc_vector, t.neg)
    return max(0.0, m.delta - r_pos + r_neg)


def train_bilinear(
    triplets: Iterable[Triplet],
    delta: float = 1.0,
    aggressiveness: float = 0.1,
    epochs: int = 10,
    seed: int = 42,
) -> BilinearModel:
    """Passive-aggressive training of the bilinear similarity.

    W starts at identity (so the untrained model is dot-product ranking)
    and triplets are visited in a seeded shuffled order each epoch.  A
    violating triplet gets the minimal-norm correction W += tau * G with
    G = v_D (v_S+ - v_S-)^T and tau = min(C, loss / ||G||_F^2); when
    tau < C the updated model satisfies the margin on that triplet exactly.
    """
    trips = list(triplets)
    if not trips:
        raise ValueError("empty triplet stream")
    if delta <= 0 or aggressiveness <= 0:
        raise ValueError("delta and aggressiveness must be positive")
    d = trips[0].doc_vector.shape[0]
    w = np.eye(d)
    model = BilinearModel(w, delta, aggressiveness)
    rng = np.random.default_rng(seed)
    for _ in range(epochs):
        for k in rng.permutation(len(trips)):
            t = trips[k]
            u = t.pos - t.neg
            margin = float(t.doc_vector @ w @ u)
            loss = delta - margin
            if loss <= 0.0:
                continue
            gnorm2 = float(t.doc_vector @ t.doc_vector) * float(u @ u)
            if gnorm2 == 0.0:
                continue
            tau = min(aggressiveness, loss / gnorm2)
            w += tau * np.outer(t.doc_vector, u)
    model.trained_epochs = epochs
    return model


def make_triplets(
    labeled_docs: Sequence[tuple[Document, Sequence[bool]]],
    e: EmbeddingMatrix,
) -> list[Triplet]:
    """Cartesian (summary, non-summary) sentence pairs per document.

    Documents lacking either class (or a valid document vector) contribute
    nothing; an empty result is an error.  Order is deterministic: document
    order, then summary index, then non-summary index.
    """
    out: list[Triplet] = []
    for doc, labels in labeled_docs:
        if len(labels) != len(doc.sentences):
            raise ValueError(f"doc {doc.doc_id!r}: labels do not match sentences")
        dv = document_vector(doc, e)
        if not dv.valid:
            log.warning("doc %r: no valid document vector, skipped", doc.doc_id)
            continue
        pos = []
        neg = []
        for s, flag in zip(doc.sentences, labels):
            sv = sentence_vector(s, e)
            if not sv.valid:
                continue
            (pos if flag else neg).append(sv.values)
        if not pos or not neg:
            log.warning(
                "doc %r: needs at least one summary and one non-summary "
                "sentence, contributes no triplets",
                doc.doc_id,
            )
            continue
        for p in pos:
            for n in neg:
                out.append(Triplet(dv.values, p, n))
    if not out:
        raise ValueError("no document produced any triplet")
    return out


def summary_labels(
    doc: Document,
    references: Sequence[Sequence[str]],
    words: Sequence[str],
) -> list[bool]:
    """Mark sentences whose surface token sequence appears contiguously in a
    reference.  Used to derive triplet training labels from reference files."""

    def surface(s: Sentence) -> list[str]:
        oov = iter(s.oov_surfaces)
        return [next(oov) if i == OOV_ID else words[i] for i in s.token_ids]

    refs = [tuple(r) for r in references]

    def contained(toks: tuple[str, ...]) -> bool:
        n = len(toks)
        if n == 0:
            return False
        for ref in refs:
            for start in range(len(ref) - n + 1):
                if ref[start:start + n] == toks:
                    return True
        return False

    return [contained(tuple(surface(s))) for s in doc.sentences]


def bilinear_rank(
    doc: Document, e: EmbeddingMatrix, model: BilinearModel
) -> list[tuple[int, float]]:
    dv = document_vector(doc, e)
    if not dv.valid:
        raise ValueError(f"document {doc.doc_id!r} has no in-vocabulary tokens")
    scores = []
    for s in doc.sentences:
        sv = sentence_vector(s, e)
        scores.append(
            bilinear_score(model, dv.values, sv.values) if sv.valid else -math.inf
        )
    return _ranked(scores)


def ulm_prob(w: int, s: Sentence) -> float:
    """Sentence unigram probability n(w, S) / |S| (maximum likelihood)."""
    if s.length == 0:
        raise ValueError("empty sentence")
    count = sum(1 for i in s.token_ids if i == w)
    return count / s.length


class EmbeddingWordModel:
    """Word-given-word conditional distributions from embedding dot products.

    P(w_j | w_i) = exp(v_{w_j} . v_{w_i}) / sum_l exp(v_{w_l} . v_{w_i}),
    computed with max-subtraction; the normalized distribution is cached per
    conditioning word.  The predicted side uses the output table for CBOW
    and skip-gram (mirroring their training-time scoring) and the input
    table for the single-table methods.
    """

    def __init__(self, e: EmbeddingMatrix):
        self.query = e.input_vectors
        if e.method in ("cbow", "sg"):
            if e.output_vectors is None:
                raise ValueError(f"{e.method} embeddings need an output table")
            self.candidates = e.output_vectors
        else:
            self.candidates = e.input_vectors
        self.size = e.size
        self._cache: dict[int, np.ndarray] = {}

    def _check(self, wid: int) -> None:
        if not (0 <= wid < self.size):
            raise ValueError(f"word id {wid} out of vocabulary")

    def cond_distribution(self, w_i: int) -> np.ndarray:
        """Full distribution over candidate words given w_i."""
        self._check(w_i)
        dist = self._cache.get(w_i)
        if dist is None:
            scores = self.candidates @ self.query[w_i]
            m = scores.max()
            exps = np.exp(scores - m)
            dist = exps / exps.sum()
            self._cache[w_i] = dist
        return dist

    def prob(self, w_j: int, w_i: int) -> float:
        self._check(w_j)
        return float(self.cond_distribution(w_i)[w_j])


_word_models: "weakref.WeakKeyDictionary[EmbeddingMatrix, EmbeddingWordModel]" = (
    weakref.WeakKeyDictionary()
)


def word_model(e: EmbeddingMatrix) -> EmbeddingWordModel:
    """Shared per-matrix model so partition values are computed once."""
    model = _word_models.get(e)
    if model is None:
        model = EmbeddingWordModel(e)
        _word_models[e] = model
    return model


def embed_word_prob(e: EmbeddingMatrix, w_j: int, w_i: int) -> float:
    """P(w_j | w_i) under the embedding-derived word model."""
    return word_model(e).prob(w_j, w_i)


@dataclass
class LikelihoodConfig:
    """Interpolation weight toward the sentence unigram model, in [0, 1].

    Scores are always log-domain document log-likelihoods.
    """

    ulm_weight: float = 0.5

    def __post_init__(self) -> None:
        if not (0.0 <= self.ulm_weight <= 1.0):
            raise ValueError("ulm_weight must be in [0, 1]")


def doc_likelihood(
    doc: Document,
    s: Sentence,
    e: EmbeddingMatrix | None,
    cfg: LikelihoodConfig,
) -> float:
    """log P(D | S) under the composite sentence-specific language model.

    log P(D|S) = sum over w_j in D of n(w_j, D) * log[ lam * P_ulm(w_j|S)
    + (1 - lam) * sum over w_i in S of alpha_i * P(w_j|w_i) ] with
    alpha_i = n(w_i, S)/|S|.  A word with zero probability under both
    components makes the score -inf (ranked last), not an error.
    """
    if s.length == 0:
        raise ValueError("empty sentence")
    lam = cfg.ulm_weight
    s_counts = Counter(s.usable_ids())

    mix = None
    if lam < 1.0:
        if e is None:
            raise ValueError("an embedding matrix is required when ulm_weight < 1")
        model = word_model(e)
        mix = np.zeros(model.size)
        for wid, c in s_counts.items():
            mix += (c / s.length) * model.cond_distribution(wid)

    doc_counts: Counter[int] = Counter()
    for sent in doc.sentences:
        doc_counts.update(sent.usable_ids())

    total = 0.0
    for w_j, n_jd in doc_counts.items():
        p = 0.0
        if lam > 0.0:
            p += lam * (s_counts.get(w_j, 0) / s.length)
        if lam < 1.0:
            p += (1.0 - lam) * float(mix[w_j])
        if p <= 0.0:
            return -math.inf
        total += n_jd * math.log(p)
    return total


def likelihood_rank(
    doc: Document, e: EmbeddingMatrix | None, cfg: LikelihoodConfig
) -> list[tuple[int, float]]:
    """Score sentences by the document log-likelihood of their language model."""
    scores = []
    for s in doc.sentences:
        if s.length == 0 or (cfg.ulm_weight < 1.0 and s.is_empty):
            scores.append(-math.inf)
        else:
            scores.append(doc_likelihood(doc, s, e, cfg))
    return _ranked(scores)


def ulm_rank(doc: Document) -> list[tuple[int, float]]:
    """Pure sentence-unigram ranking (interpolation weight 1)."""
    return likelihood_rank(doc, None, LikelihoodConfig(ulm_weight=1.0))


@dataclass
class RankedSummary:
    """Scored sentences plus the ids selected under the ratio budget."""

    ranked: tuple[tuple[int, float], ...]
    selected: tuple[int, ...]
    ratio: float


def extract_summary(
    scored: Sequence[tuple[int, float]],
    doc: Document,
    ratio: float,
    budget_unit: str = "words",
) -> RankedSummary:
    """Greedy selection in score order under a ceil(ratio * size) budget.

    A sentence is admitted while the selected word (or sentence) count is
    still below the budget, so the budget may be overshot by the last
    admission; at least one sentence is always selected.  Output order is
    the original document order.
    """
    if not (0.0 < ratio <= 1.0):
        raise ValueError("ratio must be in (0, 1]")
    if budget_unit not in ("words", "sentences"):
        raise ValueError(f"unknown budget unit: {budget_unit!r}")
    ranked = sorted(scored, key=lambda kv: (-kv[1], kv[0]))
    total = doc.n_words if budget_unit == "words" else len(doc.sentences)
    budget = math.ceil(ratio * total)
    selected: list[int] = []
    used = 0
    for idx, _ in ranked:
        if used >= budget and selected:
            break
        selected.append(idx)
        used += doc.sentences[idx].length if budget_unit == "words" else 1
    return RankedSummary(tuple(ranked), tuple(sorted(selected)), ratio)


def save_bilinear(m: BilinearModel, path: str, seed: int = 0,
                  snapshot: dict | None = None) -> None:
    """Text format: "d delta C epochs seed" header, then d rows of d floats."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, val in sorted((snapshot or {}).items()):
            fh.write(f"# {key}={val}\n")
        fh.write(
            f"{m.dim} {m.delta!r} {m.aggressiveness!r} {m.trained_epochs} {seed}\n"
        )
        for row in m.w:
            fh.write(" ".join(repr(float(c)) for c in row) + "\n")


def load_bilinear(path: str) -> BilinearModel:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError(f"empty model file: {path}")
    head = lines[0].split()
    if len(head) != 5:
        raise ValueError(f"malformed model header: {lines[0]!r}")
    d = int(head[0])
    if len(lines) - 1 != d:
        raise ValueError(f"model header claims {d} rows, file has {len(lines) - 1}")
    w = np.empty((d, d))
    for r, ln in enumerate(lines[1:]):
        parts = ln.split()
        if len(parts) != d:
            raise ValueError(f"model row {r}: expected {d} floats")
        w[r] = [float(p) for p in parts]
    return BilinearModel(
        w=w,
        delta=float(head[1]),
        aggressiveness=float(head[2]),
        trained_epochs=int(head[3]),
    )


def save_ranking(
    rankings: Sequence[tuple[str, RankedSummary]],
    path: str,
    snapshot: dict | None = None,
) -> None:
    """Line-oriented "doc_id sentence_index score selected_flag" records."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, val in sorted((snapshot or {}).items()):
            fh.write(f"# {key}={val}\n")
        for doc_id, summary in rankings:
            chosen = set(summary.selected)
            for idx, score in summary.ranked:
                flag = 1 if idx in chosen else 0
                fh.write(f"{doc_id} {idx} {score!r} {flag}\n")


def load_ranking(path: str) -> dict[str, list[tuple[int, float, bool]]]:
    out: dict[str, list[tuple[int, float, bool]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, ln in enumerate(fh, start=1):
            if ln.startswith("#") or not ln.strip():
                continue
            parts = ln.split()
            if len(parts) != 4:
                raise ValueError(f"malformed ranking row at line {lineno}: {ln!r}")
            doc_id, idx, score, flag = parts
            out.setdefault(doc_id, []).append((int(idx), float(score), flag == "1"))
    if not out:
        raise ValueError(f"empty ranking file: {path}")
    return out
