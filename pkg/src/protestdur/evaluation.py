"""Confusion-matrix metrics, holdout scoring and repeated stratified
cross-validation. The positive class is Extended (one day or more)."""

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import trees
from ._util import derive_seed, pmap
from .errors import DataError

METRIC_NAMES = ("balanced_accuracy", "kappa", "sensitivity", "specificity")

# published test-set values for the three learners, kept for side-by-side display
REFERENCE_VALUES = {
    "single": {"balanced_accuracy": 0.7938, "kappa": 0.590, "sensitivity": 0.8703, "specificity": 0.7241},
    "bagged": {"balanced_accuracy": 0.8840, "kappa": 0.769, "sensitivity": 0.9459, "specificity": 0.8276},
    "forest": {"balanced_accuracy": 0.8969, "kappa": 0.795, "sensitivity": 0.9568, "specificity": 0.8424},
}


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def n(self):
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other):
        return ConfusionMatrix(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)

    @classmethod
    def from_predictions(cls, y_true, y_pred):
        y_true = np.asarray(y_true, dtype=np.int64)
        y_pred = np.asarray(y_pred, dtype=np.int64)
        if y_true.shape != y_pred.shape:
            raise ValueError("prediction and truth lengths differ")
        return cls(
            tp=int(((y_true == 1) & (y_pred == 1)).sum()),
            fp=int(((y_true == 0) & (y_pred == 1)).sum()),
            tn=int(((y_true == 0) & (y_pred == 0)).sum()),
            fn=int(((y_true == 1) & (y_pred == 0)).sum()),
        )


@dataclass(frozen=True)
class MetricReport:
    """Metrics are ``None`` when their denominator is zero."""

    sensitivity: float = None
    specificity: float = None
    balanced_accuracy: float = None
    kappa: float = None
    positives: int = 0
    negatives: int = 0

    def as_dict(self):
        return asdict(self)


def metrics(cm):
    pos = cm.tp + cm.fn
    neg = cm.tn + cm.fp
    sens = cm.tp / pos if pos else None
    spec = cm.tn / neg if neg else None
    bal = (sens + spec) / 2 if sens is not None and spec is not None else None
    kappa = None
    n = cm.n
    if n:
        p_o = (cm.tp + cm.tn) / n
        p_e = (pos * (cm.tp + cm.fp) + neg * (cm.tn + cm.fn)) / (n * n)
        if p_e != 1:
            kappa = (p_o - p_e) / (1 - p_e)
    return MetricReport(sens, spec, bal, kappa, pos, neg)


def _predict(model, X):
    if isinstance(model, trees.EnsembleModel):
        return trees.predict_many(model, X)
    return np.asarray(model.predict(X), dtype=np.int64)


def evaluate_holdout(model, test):
    if len(test) == 0:
        raise DataError("empty test table")
    cm = ConfusionMatrix.from_predictions(test.y, _predict(model, test.X))
    return cm, metrics(cm)


@dataclass(frozen=True)
class LearnerSpec:
    mode: trees.EnsembleMode = trees.EnsembleMode.FOREST
    n_trees: int = None
    mtry: int = 2
    config: trees.TreeConfig = trees.TreeConfig()

    def fit(self, train, seed=0, jobs=1):
        mode = trees.EnsembleMode(self.mode)
        if mode is trees.EnsembleMode.SINGLE:
            return trees.fit_tree(train, self.config)
        if mode is trees.EnsembleMode.BAGGED:
            return trees.fit_bagged(train, self.n_trees or 25, self.config, seed, jobs=jobs)
        return trees.fit_forest(train, self.n_trees or 500, self.mtry, self.config, seed, jobs=jobs)


def stratified_folds(y, folds, seed):
    """Fold id per row; each class is shuffled and dealt round-robin."""
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    assign = np.empty(len(y), dtype=np.int64)
    offset = 0
    for c in (0, 1):
        idx = np.flatnonzero(y == c)
        if len(idx) < folds:
            raise DataError(
                f"class {c} has {len(idx)} rows, fewer than {folds} folds; use fewer folds"
            )
        perm = rng.permutation(idx)
        assign[perm] = (np.arange(len(perm)) + offset) % folds
        offset += len(perm)
    return assign


@dataclass
class CVResult:
    reports: list  # (repeat, fold, ConfusionMatrix, MetricReport)
    folds: int
    repeats: int

    @property
    def pooled(self):
        total = ConfusionMatrix()
        for _, _, cm, _ in self.reports:
            total = total + cm
        return metrics(total)

    def summary(self):
        out = {}
        for name in METRIC_NAMES:
            vals = [getattr(r, name) for *_, r in self.reports if getattr(r, name) is not None]
            out[name] = {
                "mean": float(np.mean(vals)) if vals else None,
                "std": float(np.std(vals, ddof=1)) if len(vals) > 1 else None,
                "n": len(vals),
            }
        return out

    def to_dict(self):
        return {
            "folds": self.folds,
            "repeats": self.repeats,
            "summary": self.summary(),
            "pooled": self.pooled.as_dict(),
            "per_fold": [
                {"repeat": r, "fold": f, "confusion": asdict(cm), "metrics": rep.as_dict()}
                for r, f, cm, rep in self.reports
            ],
        }


def cross_validate(table, learner, folds=10, repeats=5, seed=0, jobs=1):
    """Repeated stratified k-fold CV.

    ``learner`` is a LearnerSpec or a callable ``(train_table, seed) -> model``.
    Each repeat reshuffles folds with its own derived seed; every row is
    scored exactly once per repeat.
    """
    fit = learner.fit if isinstance(learner, LearnerSpec) else learner
    y = table.y
    cells = []
    for r in range(repeats):
        assign = stratified_folds(y, folds, derive_seed(seed, r))
        for f in range(folds):
            cells.append((r, f, np.flatnonzero(assign != f), np.flatnonzero(assign == f)))

    def run(cell):
        r, f, tr, te = cell
        model = fit(table.take(tr.tolist()), derive_seed(seed, r, f))
        cm, rep = evaluate_holdout(model, table.take(te.tolist()))
        return r, f, cm, rep

    return CVResult(pmap(run, cells, jobs), folds, repeats)


def _fmt(value, kappa=False):
    if value is None:
        return "undefined"
    return f"{value:.3f}" if kappa else f"{100 * value:.2f}%"


def format_table(reports, reference=None):
    """Plain-text table: one column per learner, rows balanced accuracy,
    kappa, sensitivity, specificity. ``reports`` maps learner -> MetricReport."""
    names = list(reports)
    labels = {"balanced_accuracy": "Balanced accuracy", "kappa": "Kappa",
              "sensitivity": "Sensitivity", "specificity": "Specificity"}
    header = [""] + names
    rows = []
    for m in METRIC_NAMES:
        row = [labels[m]] + [_fmt(getattr(reports[n], m), m == "kappa") for n in names]
        if reference:
            row += [_fmt(reference.get(n, {}).get(m), m == "kappa") for n in names]
        rows.append(row)
    if reference:
        header += [f"ref:{n}" for n in names]
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(str(c).ljust(w) if i == 0 else str(c).rjust(w) for i, (c, w) in enumerate(zip(r, widths)))
             for r in [header] + rows]
    return "\n".join(line.rstrip() for line in lines) + "\n"


def isclose_or_none(a, b, tol):
    if a is None or b is None:
        return a is None and b is None
    return math.isclose(a, b, rel_tol=0, abs_tol=tol)
