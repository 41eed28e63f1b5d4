"""Command-line front end for the pipeline.

Subcommands: build-vocab, cooccur, train-embeddings, train-triplet,
summarize, evaluate, gen-synthetic.  Options can come from a flat
``key = value`` config file (``--config``); explicit flags win.  The seed
falls back to the EMBEDSUM_SEED environment variable when neither a flag nor
the config provides one.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Callable

from . import corpus as corpus_mod
from . import cooccur as cooccur_mod
from . import embeddings as emb_mod
from . import evaluation as eval_mod
from . import ranking as rank_mod
from . import svd as svd_mod
from .synthetic import SyntheticCorpusSpec, generate_synthetic

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

DEFAULT_SEED = 42
RANKERS = ("cosine", "triplet", "likelihood", "ulm")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(f"{self.prog}: {message}")


def parse_bool(text: str) -> bool:
    return text.strip().lower() in ("1", "true", "yes", "on")


def load_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; blank lines and # comments are ignored."""
    cfg: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"config line {lineno}: expected key = value")
            key, _, val = line.partition("=")
            cfg[key.strip().replace("-", "_")] = val.strip()
    return cfg


class _Options:
    """Resolution order: explicit flag, config file, built-in default."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.cfg = load_config(args.config) if getattr(args, "config", None) else {}

    def get(self, name: str, conv: Callable, default=None):
        val = getattr(self.args, name, None)
        if val is not None:
            return val
        if name in self.cfg:
            return conv(self.cfg[name])
        return default

    def require(self, name: str, conv: Callable = str):
        val = self.get(name, conv)
        if val is None:
            raise _UsageError(f"missing required option --{name.replace('_', '-')}")
        return val

    def seed(self) -> int:
        val = self.get("seed", int)
        if val is not None:
            return val
        env = os.environ.get("EMBEDSUM_SEED")
        if env is not None:
            return int(env)
        return DEFAULT_SEED


def _check_input(path: str) -> str:
    if not os.path.exists(path):
        raise ValueError(f"input path does not exist: {path}")
    return path


def _load_encoded(corpus_path: str, vocab_path: str, oov_policy: str):
    vocab = corpus_mod.load_vocabulary(_check_input(vocab_path))
    raw = corpus_mod.ingest_corpus(_check_input(corpus_path))
    return vocab, corpus_mod.encode_corpus(vocab, raw, oov_policy)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--oov-policy", dest="oov_policy", choices=corpus_mod.OOV_POLICIES)


def build_parser() -> _Parser:
    parser = _Parser(prog="embedsum", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("build-vocab", help="count tokens and write the vocabulary")
    _add_common(p)
    p.add_argument("--corpus")
    p.add_argument("--min-count", dest="min_count", type=int)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_build_vocab)

    p = sub.add_parser("cooccur", help="accumulate windowed co-occurrence counts")
    _add_common(p)
    p.add_argument("--corpus")
    p.add_argument("--vocab")
    p.add_argument("--window", type=int)
    p.add_argument("--weighting", choices=cooccur_mod.WEIGHTINGS)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_cooccur)

    p = sub.add_parser("train-embeddings", help="train one of the four methods")
    _add_common(p)
    p.add_argument("--method", choices=emb_mod.METHODS)
    p.add_argument("--corpus")
    p.add_argument("--vocab")
    p.add_argument("--cooccur", help="precomputed co-occurrence matrix file")
    p.add_argument("--dim", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--weighting", choices=cooccur_mod.WEIGHTINGS)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", dest="lr_initial", type=float)
    p.add_argument("--lr-final", dest="lr_final", type=float)
    p.add_argument("--negative", dest="negative_samples", type=int)
    p.add_argument("--noise-exponent", dest="noise_exponent", type=float)
    p.add_argument("--glove-xmax", dest="glove_xmax", type=float)
    p.add_argument("--glove-alpha", dest="glove_alpha", type=float)
    p.add_argument("--svd-scale-exponent", dest="svd_scale_exponent", type=float)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_train_embeddings)

    p = sub.add_parser("train-triplet", help="learn the bilinear similarity")
    _add_common(p)
    p.add_argument("--corpus")
    p.add_argument("--vocab")
    p.add_argument("--embeddings")
    p.add_argument("--references")
    p.add_argument("--delta", type=float)
    p.add_argument("--aggressiveness", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_train_triplet)

    p = sub.add_parser("summarize", help="rank sentences and extract summaries")
    _add_common(p)
    p.add_argument("--corpus")
    p.add_argument("--vocab")
    p.add_argument("--embeddings")
    p.add_argument("--ranker", choices=RANKERS)
    p.add_argument("--model", help="bilinear model file (triplet ranker)")
    p.add_argument("--ulm-lambda", dest="ulm_lambda", type=float)
    p.add_argument("--ratio", type=float)
    p.add_argument("--budget-unit", dest="budget_unit", choices=("words", "sentences"))
    p.add_argument("--output")
    p.set_defaults(func=_cmd_summarize)

    p = sub.add_parser("evaluate", help="score a ranking file against references")
    _add_common(p)
    p.add_argument("--corpus")
    p.add_argument("--vocab")
    p.add_argument("--references")
    p.add_argument("--ranking")
    p.add_argument("--output")
    p.add_argument("--per-doc", dest="per_doc", action="store_true", default=None)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("gen-synthetic", help="write a synthetic topic corpus")
    _add_common(p)
    p.add_argument("--output-corpus", dest="output_corpus")
    p.add_argument("--output-references", dest="output_references")
    p.add_argument("--docs", type=int)
    p.add_argument("--topics", type=int)
    p.add_argument("--topic-vocab", dest="topic_vocab", type=int)
    p.add_argument("--doc-noise-vocab", dest="doc_noise_vocab", type=int)
    p.add_argument("--global-noise-vocab", dest="global_noise_vocab", type=int)
    p.add_argument("--global-noise-frac", dest="global_noise_frac", type=float)
    p.add_argument("--sentences-min", dest="sentences_min", type=int)
    p.add_argument("--sentences-max", dest="sentences_max", type=int)
    p.add_argument("--tokens-min", dest="tokens_min", type=int)
    p.add_argument("--tokens-max", dest="tokens_max", type=int)
    p.add_argument("--summary-sentences", dest="summary_sentences", type=int)
    p.add_argument("--summary-density", dest="summary_density", type=float)
    p.add_argument("--other-density", dest="other_density", type=float)
    p.set_defaults(func=_cmd_gen_synthetic)

    return parser


def _cmd_build_vocab(opts: _Options) -> None:
    corpus_path = _check_input(opts.require("corpus"))
    min_count = opts.get("min_count", int, 1)
    output = opts.require("output")
    docs = corpus_mod.ingest_corpus(corpus_path)
    vocab = corpus_mod.build_vocabulary(docs, min_count)
    snapshot = {"command": "build-vocab", "corpus": corpus_path, "min_count": min_count}
    corpus_mod.save_vocabulary(vocab, output, snapshot)
    print(f"wrote vocabulary of {vocab.size} words to {output}")


def _cmd_cooccur(opts: _Options) -> None:
    window = opts.get("window", int, 5)
    weighting = opts.get("weighting", str, "flat")
    workers = opts.get("workers", int, 1)
    oov_policy = opts.get("oov_policy", str, "drop")
    output = opts.require("output")
    vocab, docs = _load_encoded(opts.require("corpus"), opts.require("vocab"), oov_policy)
    x = cooccur_mod.accumulate(docs, vocab, window, weighting, workers)
    snapshot = {
        "command": "cooccur", "window": window, "weighting": weighting,
        "oov_policy": oov_policy,
    }
    cooccur_mod.save_matrix(x, output, snapshot)
    print(f"wrote {len(x.entries)} entries to {output}")


def _train_config(opts: _Options, method: str) -> emb_mod.TrainConfig:
    default_lr = 0.05 if method == "glove" else 0.025
    workers = opts.get("workers", int, 1)
    return emb_mod.TrainConfig(
        dim=opts.get("dim", int, 100),
        window=opts.get("window", int, 5),
        epochs=opts.get("epochs", int, 5),
        lr_initial=opts.get("lr_initial", float, default_lr),
        lr_final=opts.get("lr_final", float),
        negative_samples=opts.get("negative_samples", int, 5),
        noise_exponent=opts.get("noise_exponent", float, 0.75),
        glove_xmax=opts.get("glove_xmax", float, 100.0),
        glove_alpha=opts.get("glove_alpha", float, 0.75),
        seed=opts.seed(),
        deterministic=workers <= 1,
    )


def _cmd_train_embeddings(opts: _Options) -> None:
    method = opts.require("method")
    if method not in emb_mod.METHODS:
        raise _UsageError(f"unknown method: {method}")
    output = opts.require("output")
    workers = opts.get("workers", int, 1)
    oov_policy = opts.get("oov_policy", str, "drop")
    cfg = _train_config(opts, method)
    snapshot = {
        "command": "train-embeddings", "method": method, "dim": cfg.dim,
        "window": cfg.window, "epochs": cfg.epochs, "seed": cfg.seed,
        "workers": workers, "oov_policy": oov_policy,
    }

    if method in ("cbow", "sg"):
        vocab, docs = _load_encoded(opts.require("corpus"), opts.require("vocab"), oov_policy)
        train = emb_mod.train_cbow if method == "cbow" else emb_mod.train_sg
        e = train(docs, vocab, cfg, workers=workers)
    else:
        vocab = corpus_mod.load_vocabulary(_check_input(opts.require("vocab")))
        matrix_path = opts.get("cooccur", str)
        if matrix_path is not None:
            x = cooccur_mod.load_matrix(_check_input(matrix_path))
        else:
            raw = corpus_mod.ingest_corpus(_check_input(opts.require("corpus")))
            docs = corpus_mod.encode_corpus(vocab, raw, oov_policy)
            weighting = opts.get("weighting", str, "flat")
            x = cooccur_mod.accumulate(docs, vocab, cfg.window, weighting, workers)
        if method == "glove":
            e = emb_mod.train_glove(x, cfg, words=vocab.words, workers=workers)
        else:
            fact = svd_mod.truncated_svd(cooccur_mod.to_log_matrix(x), cfg.dim, seed=cfg.seed)
            exponent = opts.get("svd_scale_exponent", float, 0.0)
            e = svd_mod.svd_embeddings(fact, vocab.words, exponent)

    emb_mod.save_embeddings(e, output, snapshot)
    print(f"wrote {e.size}x{e.dim} {method} embeddings to {output}")


def _cmd_train_triplet(opts: _Options) -> None:
    oov_policy = opts.get("oov_policy", str, "drop")
    output = opts.require("output")
    delta = opts.get("delta", float, 1.0)
    aggressiveness = opts.get("aggressiveness", float, 0.1)
    epochs = opts.get("epochs", int, 10)
    seed = opts.seed()
    vocab, docs = _load_encoded(opts.require("corpus"), opts.require("vocab"), oov_policy)
    e = emb_mod.load_embeddings(_check_input(opts.require("embeddings")))
    if e.words != vocab.words:
        raise ValueError("embedding words do not match the vocabulary")
    refs = corpus_mod.ingest_references(_check_input(opts.require("references")))
    labeled = []
    for doc in docs:
        refset = refs.get(doc.doc_id)
        if refset is None:
            continue
        labeled.append(
            (doc, rank_mod.summary_labels(doc, refset.references, vocab.words))
        )
    if not labeled:
        raise ValueError("no document has references; cannot build triplets")
    triplets = rank_mod.make_triplets(labeled, e)
    model = rank_mod.train_bilinear(triplets, delta, aggressiveness, epochs, seed)
    snapshot = {
        "command": "train-triplet", "delta": delta, "aggressiveness": aggressiveness,
        "epochs": epochs, "seed": seed, "triplets": len(triplets),
    }
    rank_mod.save_bilinear(model, output, seed=seed, snapshot=snapshot)
    print(f"trained bilinear model on {len(triplets)} triplets, wrote {output}")


def _cmd_summarize(opts: _Options) -> None:
    ranker = opts.require("ranker")
    if ranker not in RANKERS:
        raise _UsageError(f"unknown ranker: {ranker}")
    ratio = opts.get("ratio", float, 0.1)
    budget_unit = opts.get("budget_unit", str, "words")
    oov_policy = opts.get("oov_policy", str, "drop")
    output = opts.require("output")
    vocab, docs = _load_encoded(opts.require("corpus"), opts.require("vocab"), oov_policy)

    e = None
    if ranker != "ulm":
        e = emb_mod.load_embeddings(_check_input(opts.require("embeddings")))
        if e.words != vocab.words:
            raise ValueError("embedding words do not match the vocabulary")

    if ranker == "cosine":
        score = lambda doc: rank_mod.cosine_rank(doc, e)
    elif ranker == "triplet":
        model = rank_mod.load_bilinear(_check_input(opts.require("model")))
        if model.dim != e.dim:
            raise ValueError("bilinear model dimension does not match embeddings")
        score = lambda doc: rank_mod.bilinear_rank(doc, e, model)
    elif ranker == "likelihood":
        lcfg = rank_mod.LikelihoodConfig(opts.get("ulm_lambda", float, 0.5))
        score = lambda doc: rank_mod.likelihood_rank(doc, e, lcfg)
    else:
        score = rank_mod.ulm_rank

    rankings = []
    for doc in docs:
        summary = rank_mod.extract_summary(score(doc), doc, ratio, budget_unit)
        rankings.append((doc.doc_id, summary))
    snapshot = {
        "command": "summarize", "ranker": ranker, "ratio": ratio,
        "budget_unit": budget_unit, "oov_policy": oov_policy,
    }
    if ranker == "likelihood":
        snapshot["ulm_lambda"] = opts.get("ulm_lambda", float, 0.5)
    rank_mod.save_ranking(rankings, output, snapshot)
    print(f"wrote rankings for {len(rankings)} documents to {output}")


def _cmd_evaluate(opts: _Options) -> None:
    oov_policy = opts.get("oov_policy", str, "drop")
    output = opts.require("output")
    vocab, docs = _load_encoded(opts.require("corpus"), opts.require("vocab"), oov_policy)
    refs = corpus_mod.ingest_references(_check_input(opts.require("references")))
    ranking = rank_mod.load_ranking(_check_input(opts.require("ranking")))

    rows = []
    for doc in docs:
        if doc.doc_id not in ranking:
            raise ValueError(f"ranking file has no rows for doc {doc.doc_id!r}")
        refset = refs.get(doc.doc_id)
        if refset is None:
            raise ValueError(f"missing references for doc {doc.doc_id!r}")
        selected = sorted(idx for idx, _, flag in ranking[doc.doc_id] if flag)
        candidate = [
            tok
            for idx in selected
            for tok in corpus_mod.decode_sentence(vocab, doc.sentences[idx])
        ]
        rows.append(
            eval_mod.DocumentResult(
                doc.doc_id, eval_mod.score_summary(candidate, refset.references)
            )
        )
    report = eval_mod.ExperimentReport(
        rows, eval_mod.mean_scores(rows), {"command": "evaluate"}
    )
    eval_mod.write_report(report, output, {"command": "evaluate", "oov_policy": oov_policy})
    print(eval_mod.format_report(report, per_doc=bool(opts.get("per_doc", parse_bool, False))))


def _cmd_gen_synthetic(opts: _Options) -> None:
    spec = SyntheticCorpusSpec(
        n_docs=opts.get("docs", int, 50),
        n_topics=opts.get("topics", int, 5),
        topic_vocab=opts.get("topic_vocab", int, 15),
        doc_noise_vocab=opts.get("doc_noise_vocab", int, 25),
        global_noise_vocab=opts.get("global_noise_vocab", int, 300),
        global_noise_frac=opts.get("global_noise_frac", float, 0.65),
        sentences_per_doc=(
            opts.get("sentences_min", int, 12),
            opts.get("sentences_max", int, 18),
        ),
        tokens_per_sentence=(
            opts.get("tokens_min", int, 8),
            opts.get("tokens_max", int, 12),
        ),
        summary_sentences=opts.get("summary_sentences", int, 2),
        summary_topic_density=opts.get("summary_density", float, 0.9),
        other_topic_density=opts.get("other_density", float, 0.15),
        seed=opts.seed(),
    )
    corpus_path = opts.require("output_corpus")
    refs_path = opts.require("output_references")
    generate_synthetic(spec, corpus_path, refs_path)
    print(f"wrote {spec.n_docs} synthetic documents to {corpus_path}")


def cmd_dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "command", None) is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        opts = _Options(args)
        if getattr(args, "oov_policy", None) not in (None, *corpus_mod.OOV_POLICIES):
            raise _UsageError(f"unknown oov policy: {args.oov_policy}")
        args.func(opts)
        return EXIT_OK
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except emb_mod.NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError, KeyError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main(argv: list[str] | None = None) -> int:
    return cmd_dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
