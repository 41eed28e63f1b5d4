"""Sliding-window word-word co-occurrence counting.

Counts feed two consumers: the weighted least-squares embedding trainer uses
raw counts, and the truncated-SVD trainer uses the log-transformed matrix.
Windows never cross sentence boundaries, and only in-vocabulary tokens are
positions (OOV tokens are excluded from all sums).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import Document, Vocabulary

WEIGHTINGS = ("flat", "inverse_distance")


@dataclass
class CooccurrenceMatrix:
    """Sparse symmetric accumulator of windowed co-occurrence counts.

    Absent entries mean zero.  Counts are doubles so inverse-distance
    weighting can credit fractional amounts.
    """

    entries: dict[tuple[int, int], float] = field(default_factory=dict)
    window: int = 5
    weighting: str = "flat"
    vocab_size: int = 0

    def value(self, i: int, j: int) -> float:
        return self.entries.get((i, j), 0.0)

    def total_mass(self) -> float:
        return sum(self.entries.values())

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.vocab_size, self.vocab_size))
        for (i, j), v in self.entries.items():
            out[i, j] = v
        return out


@dataclass
class LogCooccurrenceMatrix:
    """Same sparse shape with each stored count k replaced by log(1 + k)."""

    entries: dict[tuple[int, int], float] = field(default_factory=dict)
    window: int = 5
    weighting: str = "flat"
    vocab_size: int = 0

    def value(self, i: int, j: int) -> float:
        return self.entries.get((i, j), 0.0)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.vocab_size, self.vocab_size))
        for (i, j), v in self.entries.items():
            out[i, j] = v
        return out


def _accumulate_shard(
    docs: Sequence[Document], window: int, weighting: str
) -> dict[tuple[int, int], float]:
    entries: dict[tuple[int, int], float] = {}
    for doc in docs:
        for sent in doc.sentences:
            ids = sent.usable_ids()
            n = len(ids)
            for t in range(n):
                a = ids[t]
                for off in range(1, min(window, n - 1 - t) + 1):
                    b = ids[t + off]
                    w = 1.0 if weighting == "flat" else 1.0 / off
                    entries[(a, b)] = entries.get((a, b), 0.0) + w
                    entries[(b, a)] = entries.get((b, a), 0.0) + w
    return entries


def merge_entries(
    partials: Sequence[dict[tuple[int, int], float]]
) -> dict[tuple[int, int], float]:
    """Merge partial matrices by addition."""
    merged: dict[tuple[int, int], float] = {}
    for part in partials:
        for key, v in part.items():
            merged[key] = merged.get(key, 0.0) + v
    return merged


def accumulate(
    docs: Sequence[Document],
    vocab: Vocabulary,
    window: int = 5,
    weighting: str = "flat",
    workers: int = 1,
) -> CooccurrenceMatrix:
    """Credit every in-window pair of vocabulary words within each sentence.

    For token position t and offset 1..window, the pair (w_t, w_{t+off}) is
    credited in both directions; flat weighting credits 1, inverse_distance
    credits 1/off.  Sharding documents over workers and merging partials by
    addition gives the same totals as a single pass.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    if weighting not in WEIGHTINGS:
        raise ValueError(f"unknown weighting: {weighting!r}")
    if workers <= 1 or len(docs) <= 1:
        entries = _accumulate_shard(docs, window, weighting)
    else:
        shards = [list(docs[i::workers]) for i in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(
                pool.map(lambda sh: _accumulate_shard(sh, window, weighting), shards)
            )
        entries = merge_entries(partials)
    return CooccurrenceMatrix(entries, window, weighting, vocab.size)


def to_log_matrix(x: CooccurrenceMatrix) -> LogCooccurrenceMatrix:
    """Apply k -> log(1 + k) to every stored count, preserving sparsity."""
    entries = {key: math.log1p(v) for key, v in x.entries.items()}
    return LogCooccurrenceMatrix(entries, x.window, x.weighting, x.vocab_size)


def save_matrix(x: CooccurrenceMatrix, path: str, snapshot: dict | None = None) -> None:
    """Write sorted "id_i id_j value" triples under a "V window weighting" header."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, val in sorted((snapshot or {}).items()):
            fh.write(f"# {key}={val}\n")
        fh.write(f"{x.vocab_size} {x.window} {x.weighting}\n")
        for (i, j) in sorted(x.entries):
            fh.write(f"{i} {j} {x.entries[(i, j)]!r}\n")


def load_matrix(path: str) -> CooccurrenceMatrix:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    if not lines:
        raise ValueError(f"empty matrix file: {path}")
    head = lines[0].split()
    if len(head) != 3:
        raise ValueError(f"malformed matrix header: {lines[0]!r}")
    vocab_size, window = int(head[0]), int(head[1])
    weighting = head[2]
    if weighting not in WEIGHTINGS:
        raise ValueError(f"unknown weighting in header: {weighting!r}")
    entries: dict[tuple[int, int], float] = {}
    for lineno, ln in enumerate(lines[1:], start=2):
        if not ln:
            continue
        parts = ln.split()
        if len(parts) != 3:
            raise ValueError(f"malformed matrix row at line {lineno}: {ln!r}")
        i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        if not (0 <= i < vocab_size and 0 <= j < vocab_size):
            raise ValueError(f"id out of range at line {lineno}: {ln!r}")
        entries[(i, j)] = v
    return CooccurrenceMatrix(entries, window, weighting, vocab_size)
