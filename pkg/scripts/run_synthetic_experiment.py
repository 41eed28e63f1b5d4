#!/usr/bin/env python3
"""Full desk-scale experiment on the synthetic corpus.

Generates a corpus, trains all four embedding methods, then compares the
cosine, triplet and document-likelihood rankers (plus the sentence-unigram
baseline) on a held-out test split.  The triplet model is trained and the
likelihood interpolation weight tuned on the development split only.

Usage:
    python scripts/run_synthetic_experiment.py --outdir /tmp/embedsum-exp
"""

import argparse
import os
import sys
import time

from embedsum.cooccur import accumulate, to_log_matrix
from embedsum.corpus import build_vocabulary, encode_corpus, ingest_corpus, ingest_references
from embedsum.embeddings import TrainConfig, train_cbow, train_glove, train_sg
from embedsum.evaluation import METRICS, run_experiment
from embedsum.ranking import (
    LikelihoodConfig,
    bilinear_rank,
    cosine_rank,
    likelihood_rank,
    make_triplets,
    summary_labels,
    train_bilinear,
    ulm_rank,
)
from embedsum.svd import svd_embeddings, truncated_svd
from embedsum.synthetic import SyntheticCorpusSpec, generate_synthetic


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="synthetic-experiment")
    parser.add_argument("--docs", type=int, default=50)
    parser.add_argument("--dev-fraction", type=float, default=0.7)
    parser.add_argument("--dim", type=int, default=16)
    parser.add_argument("--window", type=int, default=5)
    parser.add_argument("--ratio", type=float, default=0.1)
    parser.add_argument("--seed", type=int, default=1234)
    return parser.parse_args()


def main():
    args = parse_args()
    os.makedirs(args.outdir, exist_ok=True)
    corpus_path = os.path.join(args.outdir, "corpus.jsonl")
    refs_path = os.path.join(args.outdir, "refs.jsonl")
    generate_synthetic(SyntheticCorpusSpec(n_docs=args.docs, seed=args.seed),
                       corpus_path, refs_path)

    raw = ingest_corpus(corpus_path)
    vocab = build_vocabulary(raw, 1)
    docs = encode_corpus(vocab, raw)
    refs = ingest_references(refs_path)
    n_dev = int(round(args.dev_fraction * len(docs)))
    dev, test = docs[:n_dev], docs[n_dev:]
    print(f"corpus: {len(docs)} docs, V={vocab.size}, dev={len(dev)} test={len(test)}")

    t0 = time.time()
    x = accumulate(docs, vocab, window=args.window)
    methods = {
        "cbow": train_cbow(docs, vocab, TrainConfig(
            dim=args.dim, window=args.window, epochs=5, lr_initial=0.05, seed=args.seed)),
        "sg": train_sg(docs, vocab, TrainConfig(
            dim=args.dim, window=args.window, epochs=3, lr_initial=0.025, seed=args.seed)),
        "glove": train_glove(x, TrainConfig(
            dim=args.dim, window=args.window, epochs=25, lr_initial=0.05, seed=args.seed),
            words=vocab.words),
        "svd": svd_embeddings(
            truncated_svd(to_log_matrix(x), args.dim, seed=args.seed), vocab.words),
    }
    print(f"trained 4 embedding methods in {time.time() - t0:.1f}s")

    def scores(subset, ranker):
        report = run_experiment(subset, refs, ranker, vocab, args.ratio)
        return {m: report.means[m].f_score for m in METRICS}

    def fmt(row):
        return "  ".join(f"{row[m]:.3f}" for m in METRICS)

    header = f"{'method':8s} {'ranker':12s} " + "  ".join(f"{m:>6s}" for m in METRICS)

    print("\n== sentence-unigram baseline (test split)")
    print(header)
    print(f"{'-':8s} {'ulm':12s} " + fmt(scores(test, ulm_rank)))

    print("\n== embedding methods x rankers (test split)")
    print(header)
    for name, e in methods.items():
        labeled = [
            (d, summary_labels(d, refs[d.doc_id].references, vocab.words)) for d in dev
        ]
        model = train_bilinear(
            make_triplets(labeled, e), delta=1.0, aggressiveness=0.1, epochs=10,
            seed=args.seed,
        )
        best_lam, best = 0.5, -1.0
        for lam in [i / 10 for i in range(1, 10)]:
            dev_score = scores(dev, lambda d, lam=lam: likelihood_rank(
                d, e, LikelihoodConfig(lam)))["rouge1"]
            if dev_score > best:
                best, best_lam = dev_score, lam
        rows = {
            "cosine": scores(test, lambda d, e=e: cosine_rank(d, e)),
            "triplet": scores(test, lambda d, e=e, m=model: bilinear_rank(d, e, m)),
            f"lik(l={best_lam})": scores(test, lambda d, e=e, l=best_lam: likelihood_rank(
                d, e, LikelihoodConfig(l))),
        }
        for ranker, row in rows.items():
            print(f"{name:8s} {ranker:12s} " + fmt(row))
    return 0


if __name__ == "__main__":
    sys.exit(main())
