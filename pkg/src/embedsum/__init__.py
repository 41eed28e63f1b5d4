"""Word embeddings four ways, and embedding-based extractive summarization.

Trainers: CBOW and skip-gram with negative sampling, GloVe-style weighted
least squares on co-occurrence counts, and truncated SVD of the log
co-occurrence matrix.  Rankers: averaged-vector cosine, a triplet-learned
bilinear similarity, and a document-likelihood language model, evaluated
with ROUGE-1/2/L F-scores.
"""

from .cooccur import CooccurrenceMatrix, LogCooccurrenceMatrix, accumulate, to_log_matrix
from .corpus import (
    Document,
    RawDocument,
    ReferenceSummarySet,
    Sentence,
    Vocabulary,
    build_vocabulary,
    encode_corpus,
    encode_document,
    encode_sentence,
    ingest_corpus,
    ingest_references,
)
from .embeddings import (
    EmbeddingMatrix,
    NumericalError,
    TrainConfig,
    load_embeddings,
    save_embeddings,
    train_cbow,
    train_glove,
    train_sg,
)
from .evaluation import ExperimentReport, RougeScore, rouge_l, rouge_n, run_experiment
from .ranking import (
    BilinearModel,
    LikelihoodConfig,
    RankedSummary,
    SentenceVector,
    Triplet,
    bilinear_score,
    cosine_rank,
    doc_likelihood,
    embed_word_prob,
    extract_summary,
    likelihood_rank,
    make_triplets,
    sentence_vector,
    train_bilinear,
    triplet_loss,
    ulm_prob,
    ulm_rank,
)
from .svd import SvdFactorization, svd_embeddings, truncated_svd
from .synthetic import SyntheticCorpusSpec, build_synthetic_corpus, generate_synthetic

__version__ = "0.1.0"
