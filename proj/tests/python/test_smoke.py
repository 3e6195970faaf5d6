import numpy as np
import pytest

import seqvec

FAMILIES = {
    "A": "ACDEFGHIKL",
    "B": "MNPQRSTVWY",
}


def make_records(per_family=12, length=40, seed=3):
    rng = np.random.default_rng(seed)
    records = []
    for fam, letters in FAMILIES.items():
        for i in range(per_family):
            seq = "".join(rng.choice(list(letters), size=length))
            records.append(seqvec.SequenceRecord(f"{fam}{i}", seq, fam))
    return records


def test_tokenizer_examples():
    assert seqvec.kmers_overlapping("ACGTTA", 3) == ["ACG", "CGT", "GTT", "TTA"]
    assert seqvec.kmers_nonoverlapping("QWERTYQWERTY", 3) == [
        ["QWE", "RTY", "QWE", "RTY"],
        ["WER", "TYQ", "WER"],
        ["ERT", "YQW", "ERT"],
    ]
    with pytest.raises(seqvec.DataError):
        seqvec.kmers_nonoverlapping("AAA", 3)


def test_fasta_and_corpus():
    records = seqvec.parse_fasta(">q\nQWERTY\nQWERTY\n")
    corpus = seqvec.build_corpus(records, k=3, mode="nonoverlap")
    assert len(corpus.documents) == 3
    assert dict(zip(corpus.vocabulary, corpus.counts))["QWE"] == 2
    with pytest.raises(seqvec.DataError):
        seqvec.parse_fasta(">a\nMK1\n")


def test_train_infer_and_persist():
    records = make_records()
    corpus = seqvec.build_corpus(records, k=3)
    cfg = seqvec.TrainConfig(arch="dm", dim=16, epochs=10, seed=5)
    model = seqvec.train(corpus, cfg)
    vectors = model.doc_vectors
    assert vectors.shape == (len(records), 16)
    assert np.isfinite(vectors).all()
    again = seqvec.train(corpus, cfg)
    assert model == again
    assert seqvec.Model.from_bytes(model.to_bytes()) == model
    v = model.infer(records[0].residues, seed=2)
    assert v.shape == (16,)
    assert model.loss(corpus) < 6 * np.log(2)


def test_config_validation():
    with pytest.raises(seqvec.ConfigError):
        seqvec.TrainConfig(alpha=5.0)
    with pytest.raises(seqvec.ConfigError):
        seqvec.TrainConfig(arch="lstm")


def test_evaluation_harness():
    rng = np.random.default_rng(0)
    ids = [f"s{i}" for i in range(40)]
    labels = {s: ("X" if i < 20 else "Y") for i, s in enumerate(ids)}
    vectors = np.vstack([rng.normal(0, 0.01, (20, 3)) + 1, rng.normal(0, 0.01, (20, 3)) - 1])
    knn = seqvec.knn_cross_validate(ids, vectors, labels, folds=10, ks=[3])
    assert knn[3]["mean"] == 1.0
    binary = seqvec.binary_family_protocol(ids, vectors, labels, "X")
    assert binary["accuracy"]["mean"] >= 0.95
    multi = seqvec.multiclass_protocol(ids, vectors, labels)
    assert multi["classes"] == ["X", "Y"]
    hits = seqvec.neighbors(ids, vectors, vectors[0], 2, exclude="s0")
    assert len(hits) == 2 and hits[0][0] != "s0"


def test_metrics_and_alignment():
    m = seqvec.metrics_from_counts(8, 9, 1, 2)
    assert m["sensitivity"] == pytest.approx(0.8)
    assert m["precision"] == pytest.approx(8 / 9)
    assert seqvec.metrics_from_counts(0, 10, 0, 0)["sensitivity"] is None
    assert seqvec.smith_waterman("ACG", "ACG", -2, -1, "   A  C  G  T\nA  2 -1 -1 -1\nC -1  2 -1 -1\nG -1 -1  2 -1\nT -1 -1 -1  2\n") == 6
    records = make_records(per_family=4)
    assert seqvec.align_classify(records, records[0], k=3) == "A"
