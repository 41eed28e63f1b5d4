"""ROUGE-1/2/L F-scores and the experiment harness.

Multi-reference aggregation is fixed so results are reproducible within this
artifact: n-gram scores micro-average (counts pooled over references), the
LCS score averages the per-reference F.  No stemming or stop-word removal;
all scores are computed on the token sequences produced by the corpus
module so candidates and references share one tokenization.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .corpus import Document, ReferenceSummarySet, Vocabulary, decode_sentence
from .ranking import RankedSummary, extract_summary

METRICS = ("rouge1", "rouge2", "rougeL")


@dataclass(frozen=True)
class RougeScore:
    recall: float
    precision: float
    f_score: float
    metric: str


def _f_score(recall: float, precision: float) -> float:
    if recall + precision == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def ngram_counts(tokens: Sequence[str], n: int) -> Counter[tuple[str, ...]]:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(
    candidate: Sequence[str], references: Sequence[Sequence[str]], n: int
) -> RougeScore:
    """Clipped n-gram overlap with counts pooled over all references.

    recall = matches / total reference n-grams; precision = matches /
    (candidate n-grams x number of references).  An empty candidate scores
    zero; an empty reference list is an error.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    metric = f"rouge{n}"
    if not references:
        raise ValueError("empty reference list")
    for ref in references:
        if not ref:
            raise ValueError("empty reference")
    if not candidate:
        return RougeScore(0.0, 0.0, 0.0, metric)
    cand = ngram_counts(candidate, n)
    cand_total = max(len(candidate) - n + 1, 0)
    matches = 0
    ref_total = 0
    for ref in references:
        rc = ngram_counts(ref, n)
        ref_total += sum(rc.values())
        matches += sum((cand & rc).values())
    recall = matches / ref_total if ref_total else 0.0
    precision = matches / (cand_total * len(references)) if cand_total else 0.0
    return RougeScore(recall, precision, _f_score(recall, precision), metric)


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length by dynamic programming."""
    m, n = len(a), len(b)
    prev = [0] * (n + 1)
    for i in range(1, m + 1):
        cur = [0] * (n + 1)
        ai = a[i - 1]
        for j in range(1, n + 1):
            if ai == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[n]


def rouge_l(
    candidate: Sequence[str], references: Sequence[Sequence[str]]
) -> RougeScore:
    """LCS-based score; per-reference R, P, F are averaged over references."""
    if not references:
        raise ValueError("empty reference list")
    for ref in references:
        if not ref:
            raise ValueError("empty reference")
    if not candidate:
        return RougeScore(0.0, 0.0, 0.0, "rougeL")
    rs, ps, fs = [], [], []
    for ref in references:
        lcs = lcs_length(candidate, ref)
        r = lcs / len(ref)
        p = lcs / len(candidate)
        rs.append(r)
        ps.append(p)
        fs.append(_f_score(r, p))
    k = len(references)
    return RougeScore(sum(rs) / k, sum(ps) / k, sum(fs) / k, "rougeL")


def score_summary(
    candidate: Sequence[str], references: Sequence[Sequence[str]]
) -> dict[str, RougeScore]:
    return {
        "rouge1": rouge_n(candidate, references, 1),
        "rouge2": rouge_n(candidate, references, 2),
        "rougeL": rouge_l(candidate, references),
    }


@dataclass
class DocumentResult:
    doc_id: str
    scores: dict[str, RougeScore]
    summary: RankedSummary | None = None


@dataclass
class ExperimentReport:
    rows: list[DocumentResult]
    means: dict[str, RougeScore]
    config: dict = field(default_factory=dict)


def mean_scores(rows: Sequence[DocumentResult]) -> dict[str, RougeScore]:
    """Arithmetic mean of each metric's R, P and F over documents."""
    means = {}
    for metric in METRICS:
        k = len(rows)
        means[metric] = RougeScore(
            recall=sum(r.scores[metric].recall for r in rows) / k,
            precision=sum(r.scores[metric].precision for r in rows) / k,
            f_score=sum(r.scores[metric].f_score for r in rows) / k,
            metric=metric,
        )
    return means


def run_experiment(
    test_docs: Sequence[Document],
    references: dict[str, ReferenceSummarySet],
    ranker: Callable[[Document], list[tuple[int, float]]],
    vocab: Vocabulary,
    ratio: float = 0.1,
    config: dict | None = None,
) -> ExperimentReport:
    """Extract a summary per document with the ranker and score all metrics."""
    rows = []
    for doc in test_docs:
        refset = references.get(doc.doc_id)
        if refset is None:
            raise ValueError(f"missing references for doc {doc.doc_id!r}")
        summary = extract_summary(ranker(doc), doc, ratio)
        candidate = [
            tok
            for idx in summary.selected
            for tok in decode_sentence(vocab, doc.sentences[idx])
        ]
        rows.append(
            DocumentResult(doc.doc_id, score_summary(candidate, refset.references), summary)
        )
    return ExperimentReport(rows, mean_scores(rows), dict(config or {}))


def format_report(report: ExperimentReport, per_doc: bool = False) -> str:
    """Human-readable table of corpus means (and optionally per-doc rows)."""
    lines = [f"{'':12s} {'recall':>8s} {'precision':>10s} {'f_score':>8s}"]
    for metric in METRICS:
        s = report.means[metric]
        lines.append(
            f"{metric:12s} {s.recall:8.4f} {s.precision:10.4f} {s.f_score:8.4f}"
        )
    if per_doc:
        lines.append("")
        for row in report.rows:
            for metric in METRICS:
                s = row.scores[metric]
                lines.append(
                    f"{row.doc_id} {metric} {s.recall:.4f} {s.precision:.4f} {s.f_score:.4f}"
                )
    return "\n".join(lines)


def write_report(report: ExperimentReport, path: str, snapshot: dict | None = None) -> None:
    """Machine-readable "doc_id metric R P F" lines; corpus means use doc_id ALL."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, val in sorted((snapshot or {}).items()):
            fh.write(f"# {key}={val}\n")
        for row in report.rows:
            for metric in METRICS:
                s = row.scores[metric]
                fh.write(
                    f"{row.doc_id} {metric} {s.recall!r} {s.precision!r} {s.f_score!r}\n"
                )
        for metric in METRICS:
            s = report.means[metric]
            fh.write(f"ALL {metric} {s.recall!r} {s.precision!r} {s.f_score!r}\n")
