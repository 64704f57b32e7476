"""Top-topic categorical features and the labelled modelling table."""

import csv
from dataclasses import dataclass

import numpy as np

from . import lda
from .corpus import DurationClass
from .errors import ConfigError, DataError

N_TOP = 4


@dataclass(frozen=True)
class FeatureRow:
    doc_id: int
    top_topics: tuple
    label: DurationClass


@dataclass
class FeatureTable:
    rows: list
    K: int

    def __len__(self):
        return len(self.rows)

    @property
    def X(self):
        return np.array([r.top_topics for r in self.rows], dtype=np.int64).reshape(len(self.rows), N_TOP)

    @property
    def y(self):
        return np.array([int(r.label) for r in self.rows], dtype=np.int64)

    @property
    def doc_ids(self):
        return np.array([r.doc_id for r in self.rows], dtype=np.int64)

    def class_counts(self):
        y = self.y
        return int((y == 0).sum()), int((y == 1).sum())

    def take(self, indices):
        return FeatureTable([self.rows[i] for i in indices], self.K)

    @classmethod
    def from_arrays(cls, X, y, K, doc_ids=None):
        X = np.asarray(X)
        doc_ids = range(len(X)) if doc_ids is None else doc_ids
        rows = [FeatureRow(int(d), tuple(int(v) for v in x), DurationClass(int(lab)))
                for d, x, lab in zip(doc_ids, X, y)]
        return cls(rows, K)

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["doc_id", "t1", "t2", "t3", "t4", "label"])
            for r in self.rows:
                w.writerow([r.doc_id, *r.top_topics, int(r.label)])

    @classmethod
    def from_csv(cls, path, K=None):
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            missing = {"doc_id", "t1", "t2", "t3", "t4", "label"} - set(reader.fieldnames or [])
            if missing:
                raise DataError(f"{path}: missing columns {sorted(missing)}")
            rows = []
            for rec in reader:
                topics = tuple(int(rec[c]) for c in ("t1", "t2", "t3", "t4"))
                rows.append(FeatureRow(int(rec["doc_id"]), topics, DurationClass(int(rec["label"]))))
        if K is None:
            K = max((max(r.top_topics) for r in rows), default=N_TOP - 1) + 1
        return cls(rows, K)


def top_topics(theta, m=N_TOP):
    """Ids of the ``m`` largest entries, largest first; ties go to the smaller id."""
    theta = np.asarray(theta)
    if len(theta) < m:
        raise ConfigError(f"need at least {m} topics, model has {len(theta)}")
    order = np.lexsort((np.arange(len(theta)), -theta))
    return [int(i) for i in order[:m]]


def build_table(matrix, labels, model, fold_in_iterations=100, seed=0, doc_ids=None, jobs=1):
    """One feature row per document, empty documents included (they get
    the uniform mixture and hence topics 0..3)."""
    labels = list(labels)
    if len(labels) != matrix.n_docs:
        raise DataError(f"{len(labels)} labels for {matrix.n_docs} documents")
    if doc_ids is None:
        doc_ids = range(matrix.n_docs)
    if model.K < N_TOP:
        raise ConfigError(f"need at least {N_TOP} topics, model has {model.K}")
    if matrix.n_docs == 0:
        return FeatureTable([], model.K)
    theta, _ = lda.infer_matrix(model, matrix, fold_in_iterations, seed, jobs)
    rows = [
        FeatureRow(int(d), tuple(top_topics(t)), DurationClass(int(lab)))
        for d, t, lab in zip(doc_ids, theta, labels)
    ]
    return FeatureTable(rows, model.K)
