"""Multiscale document clustering with Markov Stability."""

from ._core import (
    DiffusionOperator,
    Document,
    Partition,
    StopWords,
    __version__,
    build_mst_knn,
    cosine_similarity,
    ingest,
    ingest_file,
    load_scan,
    log_time_grid,
    louvain,
    nmi,
    partition_pmi,
    preprocess,
    run_pipeline,
    sankey,
    scan,
    select_robust,
    tfidf,
    tokenize,
    variation_of_information,
    zscore_contingency,
)

__all__ = [
    "DiffusionOperator",
    "Document",
    "Partition",
    "StopWords",
    "build_mst_knn",
    "cosine_similarity",
    "ingest",
    "ingest_file",
    "load_scan",
    "log_time_grid",
    "louvain",
    "nmi",
    "partition_pmi",
    "preprocess",
    "run_pipeline",
    "sankey",
    "scan",
    "select_robust",
    "tfidf",
    "tokenize",
    "variation_of_information",
    "zscore_contingency",
]
