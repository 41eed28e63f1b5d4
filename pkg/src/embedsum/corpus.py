"""Corpus ingestion: tokenization, sentence segmentation, vocabulary building.

Documents and reference summaries arrive as JSON-lines files (one record per
line).  Ingestion produces raw documents of surface tokens; a vocabulary is
counted over those, and a separate encoding pass maps surface tokens to
contiguous integer ids.  Everything downstream works on encoded documents.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

DEFAULT_TERMINATORS = ".!?;\n"
SOURCE_KINDS = ("manual_transcript", "recognized_transcript", "plain_text")
OOV_POLICIES = ("drop", "keep")

# Sentinel id for an out-of-vocabulary token kept in place (oov_policy="keep").
OOV_ID = -1


def tokenize(text: str) -> list[str]:
    """Lowercase and split on whitespace."""
    return text.lower().split()


def split_sentences(
    text: str, terminators: str = DEFAULT_TERMINATORS
) -> list[tuple[list[str], tuple[int, int]]]:
    """Split raw text into tokenized sentences with character spans.

    Every occurrence of a terminator character ends the current sentence.
    Chunks that tokenize to nothing are discarded; text without any
    terminator yields a single sentence.
    """
    spans = []
    start = 0
    for i, ch in enumerate(text):
        if ch in terminators:
            spans.append((start, i))
            start = i + 1
    spans.append((start, len(text)))

    out = []
    for lo, hi in spans:
        toks = tokenize(text[lo:hi])
        if toks:
            out.append((toks, (lo, hi)))
    return out


@dataclass(frozen=True)
class RawSentence:
    """One segmented sentence of surface tokens, before vocabulary encoding."""

    tokens: tuple[str, ...]
    char_span: tuple[int, int]


@dataclass(frozen=True)
class RawDocument:
    doc_id: str
    sentences: tuple[RawSentence, ...]
    source_kind: str = "plain_text"


@dataclass(frozen=True)
class Sentence:
    """Vocabulary-encoded sentence.

    ``token_ids`` holds word ids; under oov_policy="keep" an OOV token stays
    in place as :data:`OOV_ID` with its surface form recorded in
    ``oov_surfaces`` (in order), under "drop" it is removed from ``token_ids``
    but still recorded.  The sentence length |S| is always
    ``len(token_ids)``, so the policy decides whether OOV tokens count.
    """

    token_ids: tuple[int, ...]
    oov_surfaces: tuple[str, ...] = ()
    char_span: tuple[int, int] = (0, 0)

    @property
    def length(self) -> int:
        return len(self.token_ids)

    def usable_ids(self) -> list[int]:
        """Ids of in-vocabulary tokens, in order."""
        return [i for i in self.token_ids if i >= 0]

    @property
    def n_usable(self) -> int:
        return sum(1 for i in self.token_ids if i >= 0)

    @property
    def is_empty(self) -> bool:
        """True when no usable token remains (all-OOV sentence)."""
        return self.n_usable == 0


@dataclass(frozen=True)
class Document:
    doc_id: str
    sentences: tuple[Sentence, ...]
    source_kind: str = "plain_text"

    @property
    def n_words(self) -> int:
        return sum(s.length for s in self.sentences)


@dataclass(frozen=True)
class ReferenceSummarySet:
    """Reference summaries for one document, one token list per annotator."""

    doc_id: str
    references: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class Vocabulary:
    """Bidirectional word/id table with corpus frequencies.

    Ids are contiguous 0..V-1, assigned by descending corpus frequency with
    lexicographic tie-breaking, which makes the build order-independent.
    """

    words: tuple[str, ...]
    freq: tuple[int, ...]
    total_tokens: int
    dropped_tokens: int
    min_count: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {w: i for i, w in enumerate(self.words)})

    @property
    def size(self) -> int:
        return len(self.words)

    def id_of(self, word: str) -> int | None:
        return self._index.get(word)  # type: ignore[attr-defined]

    def __contains__(self, word: str) -> bool:
        return word in self._index  # type: ignore[attr-defined]

    def word_of(self, wid: int) -> str:
        return self.words[wid]


def _parse_record(line: str, lineno: int, required: str) -> dict:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"line {lineno}: invalid record: {exc}") from None
    if not isinstance(rec, dict):
        raise ValueError(f"line {lineno}: record must be an object")
    doc_id = rec.get("doc_id")
    if not isinstance(doc_id, str) or not doc_id:
        raise ValueError(f"line {lineno}: missing or empty doc_id")
    if required not in rec and not (required == "text" and "sentences" in rec):
        raise ValueError(f"line {lineno}: record lacks a '{required}' field")
    return rec


def ingest_corpus(
    path: str,
    fmt: str = "jsonl",
    terminators: str = DEFAULT_TERMINATORS,
) -> list[RawDocument]:
    """Read a line-oriented corpus file into raw (unencoded) documents.

    Each line is a JSON object with ``doc_id`` and either ``text`` (segmented
    here) or ``sentences`` (a list of pre-segmented sentence strings), plus an
    optional ``source_kind``.
    """
    if fmt != "jsonl":
        raise ValueError(f"unsupported corpus format: {fmt!r}")
    docs: list[RawDocument] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            rec = _parse_record(line, lineno, required="text")
            doc_id = rec["doc_id"]
            if doc_id in seen:
                raise ValueError(f"line {lineno}: duplicate doc_id {doc_id!r}")
            seen.add(doc_id)
            kind = rec.get("source_kind", "plain_text")
            if kind not in SOURCE_KINDS:
                raise ValueError(f"line {lineno}: unknown source_kind {kind!r}")
            if "sentences" in rec:
                raw = rec["sentences"]
                if not isinstance(raw, list) or not raw:
                    raise ValueError(f"line {lineno}: 'sentences' must be a non-empty list")
                sents = []
                for s in raw:
                    toks = tokenize(s)
                    if not toks:
                        raise ValueError(f"line {lineno}: empty sentence in doc {doc_id!r}")
                    sents.append(RawSentence(tuple(toks), (0, len(s))))
            else:
                segmented = split_sentences(rec["text"], terminators)
                if not segmented:
                    raise ValueError(f"line {lineno}: empty text in doc {doc_id!r}")
                sents = [RawSentence(tuple(t), span) for t, span in segmented]
            docs.append(RawDocument(doc_id, tuple(sents), kind))
    if not docs:
        raise ValueError(f"empty corpus file: {path}")
    return docs


def ingest_references(
    path: str, terminators: str = DEFAULT_TERMINATORS
) -> dict[str, ReferenceSummarySet]:
    """Read a line-oriented reference file: doc_id plus a list of summaries.

    Each reference string is segmented and tokenized exactly like document
    text, then flattened to one token list, so candidates and references
    share a single tokenization.
    """
    refs: dict[str, ReferenceSummarySet] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            rec = _parse_record(line, lineno, required="references")
            doc_id = rec["doc_id"]
            if doc_id in refs:
                raise ValueError(f"line {lineno}: duplicate doc_id {doc_id!r}")
            raw = rec["references"]
            if not isinstance(raw, list) or not raw:
                raise ValueError(f"line {lineno}: 'references' must be a non-empty list")
            token_lists = []
            for r in raw:
                toks = [t for chunk, _ in split_sentences(r, terminators) for t in chunk]
                if not toks:
                    raise ValueError(f"line {lineno}: empty reference for doc {doc_id!r}")
                token_lists.append(tuple(toks))
            refs[doc_id] = ReferenceSummarySet(doc_id, tuple(token_lists))
    if not refs:
        raise ValueError(f"empty reference file: {path}")
    return refs


def build_vocabulary(docs: Sequence[RawDocument], min_count: int = 1) -> Vocabulary:
    """Count tokens over all documents and retain those with count >= min_count."""
    if not docs:
        raise ValueError("cannot build a vocabulary from an empty document list")
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts: Counter[str] = Counter()
    for doc in docs:
        for sent in doc.sentences:
            counts.update(sent.tokens)
    total_raw = sum(counts.values())
    kept = sorted(
        ((w, c) for w, c in counts.items() if c >= min_count),
        key=lambda wc: (-wc[1], wc[0]),
    )
    if not kept:
        raise ValueError("empty vocabulary: every token fell below min_count")
    words = tuple(w for w, _ in kept)
    freq = tuple(c for _, c in kept)
    total = sum(freq)
    return Vocabulary(
        words=words,
        freq=freq,
        total_tokens=total,
        dropped_tokens=total_raw - total,
        min_count=min_count,
    )


def encode_sentence(
    vocab: Vocabulary,
    raw_tokens: Iterable[str],
    oov_policy: str = "drop",
    char_span: tuple[int, int] = (0, 0),
) -> Sentence:
    """Map surface tokens to vocabulary ids under the given OOV policy."""
    if oov_policy not in OOV_POLICIES:
        raise ValueError(f"unknown oov_policy: {oov_policy!r}")
    ids: list[int] = []
    oov: list[str] = []
    for tok in raw_tokens:
        wid = vocab.id_of(tok)
        if wid is None:
            oov.append(tok)
            if oov_policy == "keep":
                ids.append(OOV_ID)
        else:
            ids.append(wid)
    return Sentence(tuple(ids), tuple(oov), char_span)


def decode_sentence(vocab: Vocabulary, sentence: Sentence) -> list[str]:
    """Recover surface tokens; OOV placeholders restore their recorded form."""
    out = []
    oov_iter = iter(sentence.oov_surfaces)
    for wid in sentence.token_ids:
        out.append(next(oov_iter) if wid == OOV_ID else vocab.words[wid])
    return out


def encode_document(vocab: Vocabulary, doc: RawDocument, oov_policy: str = "drop") -> Document:
    sents = tuple(
        encode_sentence(vocab, s.tokens, oov_policy, s.char_span) for s in doc.sentences
    )
    return Document(doc.doc_id, sents, doc.source_kind)


def encode_corpus(
    vocab: Vocabulary, docs: Sequence[RawDocument], oov_policy: str = "drop"
) -> list[Document]:
    return [encode_document(vocab, d, oov_policy) for d in docs]


def save_vocabulary(vocab: Vocabulary, path: str, snapshot: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, val in sorted((snapshot or {}).items()):
            fh.write(f"# {key}={val}\n")
        fh.write(
            f"{vocab.size} {vocab.total_tokens} {vocab.dropped_tokens} {vocab.min_count}\n"
        )
        for w, c in zip(vocab.words, vocab.freq):
            fh.write(f"{w} {c}\n")


def load_vocabulary(path: str) -> Vocabulary:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    if not lines:
        raise ValueError(f"empty vocabulary file: {path}")
    head = lines[0].split()
    if len(head) != 4:
        raise ValueError(f"malformed vocabulary header: {lines[0]!r}")
    size, total, dropped, min_count = (int(x) for x in head)
    rows = [ln.split() for ln in lines[1:] if ln]
    if len(rows) != size:
        raise ValueError(f"vocabulary header claims {size} words, file has {len(rows)}")
    for i, row in enumerate(rows):
        if len(row) != 2:
            raise ValueError(f"malformed vocabulary row {i}: {rows[i]!r}")
    return Vocabulary(
        words=tuple(r[0] for r in rows),
        freq=tuple(int(r[1]) for r in rows),
        total_tokens=total,
        dropped_tokens=dropped,
        min_count=min_count,
    )
