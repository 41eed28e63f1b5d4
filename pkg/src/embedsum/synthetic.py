"""Deterministic synthetic topic corpus for desk-scale experiments.

Each document gets one topic that every sentence mentions, plus two kinds of
noise: a bursty per-document vocabulary (words that recur within one document
only) and a large pool of globally scattered rare words.  Planted summary
sentences invert the mixture (mostly topic words) and the references are
exactly those planted sentences.  The topic is the only lexical thread that
recurs throughout a document, so an informed ranker has a real signal to find
while a random selector does not; the split between bursty and scattered
noise keeps the noise from forming either one coherent cluster or tight
exclusive clusters, both of which would distort similarity geometry.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


@dataclass
class SyntheticCorpusSpec:
    """Generator knobs; everything is deterministic given the seed."""

    n_docs: int = 50
    n_topics: int = 5
    topic_vocab: int = 15
    doc_noise_vocab: int = 25
    global_noise_vocab: int = 300
    global_noise_frac: float = 0.65
    sentences_per_doc: tuple[int, int] = (12, 18)
    tokens_per_sentence: tuple[int, int] = (8, 12)
    summary_sentences: int = 2
    summary_topic_density: float = 0.9
    other_topic_density: float = 0.15
    seed: int = 1234

    def __post_init__(self) -> None:
        if self.n_docs < 1:
            raise ValueError("n_docs must be >= 1")
        if self.n_topics < 1:
            raise ValueError("need at least one topic")
        if self.topic_vocab < 1:
            raise ValueError("topics with empty vocabularies are not allowed")
        if self.doc_noise_vocab < 1 or self.global_noise_vocab < 1:
            raise ValueError("noise pools must be non-empty")
        if not (0.0 <= self.global_noise_frac <= 1.0):
            raise ValueError("global_noise_frac must be in [0, 1]")
        if self.summary_sentences < 1:
            raise ValueError("every document needs at least one summary sentence")
        lo, hi = self.sentences_per_doc
        if not (1 <= lo <= hi):
            raise ValueError("bad sentences_per_doc range")
        if self.summary_sentences >= lo:
            raise ValueError(
                "summary sentences must be a strict subset of document sentences"
            )
        tlo, thi = self.tokens_per_sentence
        if not (1 <= tlo <= thi):
            raise ValueError("bad tokens_per_sentence range")
        for dens in (self.summary_topic_density, self.other_topic_density):
            if not (0.0 <= dens <= 1.0):
                raise ValueError("densities must be in [0, 1]")


def build_synthetic_corpus(
    spec: SyntheticCorpusSpec,
) -> tuple[list[dict], list[dict]]:
    """Build corpus and reference records (the JSON-lines payloads)."""
    rng = np.random.default_rng(spec.seed)
    topics = [
        [f"t{t:02d}w{k:02d}" for k in range(spec.topic_vocab)]
        for t in range(spec.n_topics)
    ]
    global_noise = [f"x{k:03d}" for k in range(spec.global_noise_vocab)]
    corpus_records = []
    reference_records = []
    for d in range(spec.n_docs):
        topic = topics[d % spec.n_topics]
        doc_noise = [f"b{d:03d}w{k:02d}" for k in range(spec.doc_noise_vocab)]
        n_sents = int(
            rng.integers(spec.sentences_per_doc[0], spec.sentences_per_doc[1] + 1)
        )
        planted = sorted(
            rng.choice(n_sents, size=spec.summary_sentences, replace=False).tolist()
        )
        sentences = []
        for i in range(n_sents):
            density = (
                spec.summary_topic_density
                if i in planted
                else spec.other_topic_density
            )
            n_tokens = int(
                rng.integers(spec.tokens_per_sentence[0], spec.tokens_per_sentence[1] + 1)
            )
            n_topic = int(round(density * n_tokens))
            toks = [topic[rng.integers(len(topic))] for _ in range(n_topic)]
            for _ in range(n_tokens - n_topic):
                if rng.random() < spec.global_noise_frac:
                    toks.append(global_noise[rng.integers(len(global_noise))])
                else:
                    toks.append(doc_noise[rng.integers(len(doc_noise))])
            rng.shuffle(toks)
            sentences.append(" ".join(toks))
        doc_id = f"doc{d:04d}"
        corpus_records.append(
            {"doc_id": doc_id, "sentences": sentences, "source_kind": "plain_text"}
        )
        reference_records.append(
            {"doc_id": doc_id, "references": [" . ".join(sentences[i] for i in planted)]}
        )
    return corpus_records, reference_records


def generate_synthetic(
    spec: SyntheticCorpusSpec, corpus_path: str, references_path: str
) -> None:
    """Write the corpus and reference JSON-lines files."""
    corpus_records, reference_records = build_synthetic_corpus(spec)
    with open(corpus_path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in corpus_records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    with open(references_path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in reference_records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
