"""Sequence embeddings over kmer tokens."""

from ._seqvec import (
    ConfigError,
    Corpus,
    DataError,
    Model,
    SequenceRecord,
    TrainConfig,
    align_classify,
    binary_family_protocol,
    build_corpus,
    kmers_nonoverlapping,
    kmers_overlapping,
    knn_cross_validate,
    load_family_labels,
    metrics_from_counts,
    multiclass_protocol,
    neighbors,
    parse_fasta,
    smith_waterman,
    train,
)

__all__ = [
    "ConfigError",
    "Corpus",
    "DataError",
    "Model",
    "SequenceRecord",
    "TrainConfig",
    "align_classify",
    "binary_family_protocol",
    "build_corpus",
    "kmers_nonoverlapping",
    "kmers_overlapping",
    "knn_cross_validate",
    "load_family_labels",
    "metrics_from_counts",
    "multiclass_protocol",
    "neighbors",
    "parse_fasta",
    "smith_waterman",
    "train",
]
