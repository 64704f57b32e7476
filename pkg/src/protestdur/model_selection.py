"""Choose the topic count by cross-validated held-out perplexity."""

import csv
import json
import logging
from dataclasses import dataclass

import numpy as np

from . import lda
from ._util import derive_seed, pmap
from .corpus import CorpusMatrix
from .errors import ConfigError, DataError

logger = logging.getLogger(__name__)


@dataclass
class PerplexityCurve:
    k_values: list
    per_fold: dict  # k -> list of fold perplexities
    folds: int

    @property
    def mean(self):
        return {k: float(np.mean(self.per_fold[k])) for k in self.k_values}

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "fold", "perplexity"])
            for k in self.k_values:
                for f, p in enumerate(self.per_fold[k]):
                    w.writerow([k, f, repr(p)])

    def summary(self):
        mean = self.mean
        return {
            "format_version": 1,
            "kind": "perplexity_curve",
            "folds": self.folds,
            "k_values": list(self.k_values),
            "mean": {str(k): mean[k] for k in self.k_values},
            "selected_k": select_k(self),
        }

    def write(self, csv_path, json_path):
        self.to_csv(csv_path)
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(self.summary(), fh, indent=2)
            fh.write("\n")


def fold_assignment(n_docs, folds, seed):
    """Shuffle once by seed and deal documents round-robin into folds."""
    perm = np.random.default_rng(seed).permutation(n_docs)
    assign = np.empty(n_docs, dtype=np.int64)
    assign[perm] = np.arange(n_docs) % folds
    return assign


def restrict_vocabulary(train, heldout, min_frequency=1):
    """Re-index both matrices to the words seen ``min_frequency`` times in ``train``.

    Held-out words outside that set are dropped.
    """
    totals = np.zeros(train.vocab_size, dtype=np.int64)
    for w, c in train.rows:
        np.add.at(totals, w, c)
    keep = np.flatnonzero(totals >= min_frequency)
    remap = np.full(train.vocab_size, -1, dtype=np.int64)
    remap[keep] = np.arange(len(keep))

    def reindex(m):
        rows = []
        for w, c in m.rows:
            new = remap[w]
            mask = new >= 0
            rows.append((new[mask].astype(np.int32), c[mask].astype(np.int32)))
        return CorpusMatrix(rows, len(keep))

    return reindex(train), reindex(heldout), keep


def evaluate_cell(matrix, assign, k, fold, hyper, seed, fold_in_iterations=100, min_frequency=1, alpha=None):
    """Held-out perplexity for one (k, fold) pair."""
    train_idx = np.flatnonzero(assign != fold)
    test_idx = np.flatnonzero(assign == fold)
    if len(train_idx) == 0 or len(test_idx) == 0:
        raise DataError(f"fold {fold} leaves an empty training or held-out part")
    train, heldout, _ = restrict_vocabulary(matrix.subset(train_idx), matrix.subset(test_idx), min_frequency)
    cell_hyper = hyper.replace(K=k, alpha=alpha, seed=derive_seed(seed, k, fold))
    model = lda.fit_gibbs(train, cell_hyper, track_likelihood=False)
    return lda.perplexity(model, heldout, fold_in_iterations, seed=derive_seed(seed, k, fold, 1))


def sweep_topics(matrix, k_range, folds=10, hyper=None, seed=0, fold_in_iterations=100,
                 min_frequency=1, alpha=None, jobs=1):
    """Cross-validated perplexity for every k in ``k_range``.

    The document partition depends only on ``(n_docs, folds, seed)``, so all
    k values are compared on the same folds. ``hyper`` is a template whose K
    and seed are replaced per cell. ``alpha=None`` gives each cell the default
    50/k; a number fixes alpha across k. Cell seeds are derived from
    ``(seed, k, fold)`` so results do not depend on ``jobs``.
    """
    k_values = sorted(set(int(k) for k in k_range))
    if not k_values:
        raise ConfigError("empty k range")
    if k_values[0] < 2:
        raise ConfigError(f"topic counts must be >= 2, got {k_values[0]}")
    if folds < 2:
        raise ConfigError("need at least 2 folds")
    if matrix.n_docs < folds:
        raise DataError(f"{matrix.n_docs} documents cannot fill {folds} folds")
    hyper = hyper or lda.LdaHyperparams(K=k_values[0])
    assign = fold_assignment(matrix.n_docs, folds, seed)
    cells = [(k, f) for k in k_values for f in range(folds)]

    def run(cell):
        k, f = cell
        p = evaluate_cell(matrix, assign, k, f, hyper, seed, fold_in_iterations, min_frequency, alpha)
        logger.info("k=%d fold=%d perplexity=%.3f", k, f, p)
        return p

    results = dict(zip(cells, pmap(run, cells, jobs)))
    per_fold = {k: [results[(k, f)] for f in range(folds)] for k in k_values}
    return PerplexityCurve(k_values, per_fold, folds)


def select_k(curve):
    """k with the lowest mean perplexity; ties go to the smaller k."""
    if not curve.k_values:
        raise ConfigError("empty perplexity curve")
    mean = curve.mean
    return min(curve.k_values, key=lambda k: (mean[k], k))
