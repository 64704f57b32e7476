import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from protestdur.errors import DataError
from protestdur.evaluation import (
    REFERENCE_VALUES,
    ConfusionMatrix,
    LearnerSpec,
    cross_validate,
    evaluate_holdout,
    format_table,
    metrics,
    stratified_folds,
)
from protestdur.features import FeatureTable
from protestdur.trees import EnsembleMode, EnsembleModel, Internal, Leaf, TreeConfig

from .oracles import agrees, metrics_by_rows

NAMES = ("sensitivity", "specificity", "balanced_accuracy", "kappa")


def test_perfect_agreement():
    r = metrics(ConfusionMatrix(tp=50, fp=0, tn=50, fn=0))
    assert (r.sensitivity, r.specificity, r.balanced_accuracy, r.kappa) == (1.0, 1.0, 1.0, 1.0)


def test_chance_agreement():
    r = metrics(ConfusionMatrix(tp=25, fp=25, tn=25, fn=25))
    assert r.kappa == 0.0 and r.balanced_accuracy == 0.5


def test_hand_computed_kappa():
    r = metrics(ConfusionMatrix(tp=90, fp=20, tn=80, fn=10))
    assert r.sensitivity == pytest.approx(0.9, abs=1e-12)
    assert r.specificity == pytest.approx(0.8, abs=1e-12)
    assert r.balanced_accuracy == pytest.approx(0.85, abs=1e-12)
    assert r.kappa == pytest.approx(0.70, abs=1e-12)


def test_undefined_metrics_are_none():
    r = metrics(ConfusionMatrix(tp=0, fp=3, tn=7, fn=0))
    assert r.sensitivity is None and r.balanced_accuracy is None and r.specificity == 0.7
    assert metrics(ConfusionMatrix(tn=9)).kappa is None
    assert metrics(ConfusionMatrix()).kappa is None


cms = st.builds(ConfusionMatrix, *(st.integers(0, 400) for _ in range(4)))


@given(cms)
def test_matches_row_oracle(cm):
    exact = metrics_by_rows(cm.tp, cm.fp, cm.tn, cm.fn)
    r = metrics(cm)
    assert all(agrees(getattr(r, k), exact[k]) for k in NAMES)


@given(cms)
def test_identities(cm):
    r = metrics(cm)
    if r.balanced_accuracy is not None:
        assert r.balanced_accuracy == (r.sensitivity + r.specificity) / 2
    if r.kappa is not None:
        assert r.kappa <= 1 + 1e-12
        if cm.tp + cm.fn and cm.tn + cm.fp:
            assert (abs(r.kappa - 1) < 1e-12) == (cm.fp == cm.fn == 0)


@given(cms)
def test_swapping_positive_class(cm):
    a = metrics(cm)
    b = metrics(ConfusionMatrix(tp=cm.tn, fp=cm.fn, tn=cm.tp, fn=cm.fp))
    assert a.sensitivity == b.specificity and a.specificity == b.sensitivity
    assert a.balanced_accuracy == b.balanced_accuracy
    assert (a.kappa is None) == (b.kappa is None)
    if a.kappa is not None:
        assert a.kappa == pytest.approx(b.kappa, abs=1e-12)


class Constant:
    def __init__(self, cls):
        self.cls = cls

    def predict(self, X):
        return np.full(len(X), self.cls)


def test_all_extended_holdout():
    X = np.tile([0, 1, 2, 3], (388, 1))
    t = FeatureTable.from_arrays(X, [1] * 185 + [0] * 203, K=4)
    cm, r = evaluate_holdout(Constant(1), t)
    assert (cm.tp, cm.fp, cm.tn, cm.fn) == (185, 203, 0, 0)
    assert (r.sensitivity, r.specificity, r.balanced_accuracy) == (1.0, 0.0, 0.5)
    assert (r.positives, r.negatives) == (185, 203)


def test_golden_holdout():
    inner = Internal(1, {2: Leaf(1, (0, 2)), 3: Leaf(0, (2, 0))}, 3, (2, 2))
    root = Internal(0, {0: Leaf(1, (1, 3)), 1: inner}, 1, (3, 5))
    model = EnsembleModel((root,), EnsembleMode.SINGLE)
    X = [[0, 5, 1, 2], [0, 3, 1, 2], [1, 2, 0, 3], [1, 3, 0, 2], [1, 3, 2, 0],
         [2, 3, 1, 0], [2, 2, 0, 1], [1, 4, 0, 2], [0, 1, 2, 3], [1, 2, 3, 0]]
    y = [1, 0, 1, 0, 1, 0, 1, 0, 0, 0]
    cm, r = evaluate_holdout(model, FeatureTable.from_arrays(X, y, K=6))
    assert cm == ConfusionMatrix(tp=3, fp=3, tn=3, fn=1)
    assert r.kappa == pytest.approx((0.6 - 0.48) / 0.52, abs=1e-12)


def test_empty_holdout():
    with pytest.raises(DataError):
        evaluate_holdout(Constant(0), FeatureTable([], 4))


def _grid_table(rule):
    from itertools import product
    X = np.array(list(product(range(5), repeat=4)))
    return FeatureTable.from_arrays(X, [int(rule(r)) for r in X], K=5)


def test_cv_shape_and_partition():
    table = _grid_table(lambda r: r[0] % 2)
    res = cross_validate(table, lambda t, s: Constant(0), folds=10, repeats=5, seed=1)
    assert len(res.reports) == 50
    for rep in range(5):
        assert sum(cm.n for r, _, cm, _ in res.reports if r == rep) == len(table)
    assert res.summary()["balanced_accuracy"]["mean"] == 0.5


def test_cv_constant_learner_on_balanced_data():
    table = FeatureTable.from_arrays(np.tile([0, 1, 2, 3], (40, 1)), [0, 1] * 20, K=4)
    res = cross_validate(table, lambda t, s: Constant(1), folds=4, repeats=2)
    assert res.summary()["balanced_accuracy"]["mean"] == 0.5
    assert res.pooled.balanced_accuracy == 0.5


def test_cv_separable_single_tree():
    table = _grid_table(lambda r: r[1] in (0, 3))
    res = cross_validate(table, LearnerSpec(EnsembleMode.SINGLE), folds=5, repeats=2, seed=3)
    assert res.summary()["balanced_accuracy"]["mean"] == 1.0


def test_cv_independent_of_jobs():
    table = _grid_table(lambda r: (r[0] + r[2]) % 3 == 0)
    spec = LearnerSpec(EnsembleMode.BAGGED, n_trees=5, config=TreeConfig())
    a = cross_validate(table, spec, folds=3, repeats=2, seed=4, jobs=1).to_dict()
    b = cross_validate(table, spec, folds=3, repeats=2, seed=4, jobs=6).to_dict()
    assert a == b


def test_stratified_folds():
    y = np.array([0] * 23 + [1] * 11)
    a = stratified_folds(y, 5, seed=2)
    for f in range(5):
        assert 4 <= (y[a == f] == 0).sum() <= 5 and 2 <= (y[a == f] == 1).sum() <= 3
    with pytest.raises(DataError, match="fewer folds"):
        stratified_folds(np.array([0] * 20 + [1] * 3), 5, seed=0)


def test_format_table_layout():
    reports = {"single": metrics(ConfusionMatrix(90, 20, 80, 10)), "forest": metrics(ConfusionMatrix(tn=5, fp=5))}
    text = format_table(reports, REFERENCE_VALUES)
    lines = text.splitlines()
    assert lines[1].startswith("Balanced accuracy") and "85.00%" in lines[1] and "undefined" in lines[1]
    assert "0.700" in lines[2] and "79.38%" in lines[1]
