from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from protestdur.errors import ConfigError, DataError
from protestdur.features import FeatureTable
from protestdur.sampling import (
    BalanceStrategy,
    balance,
    balance_and_split,
    doc_overlap,
    split,
    split_indices,
)


def _table(n0, n1, seed=0, K=8):
    rng = np.random.default_rng(seed)
    X = np.array([rng.permutation(K)[:4] for _ in range(n0 + n1)])
    return FeatureTable.from_arrays(X, [0] * n0 + [1] * n1, K)


def _multiset(table, cls):
    return Counter((r.doc_id, r.top_topics) for r in table.rows if r.label == cls)


def test_oversample_then_split_sizes():
    t = _table(649, 224)
    b = balance(t, "both_to_majority", seed=1)
    assert b.class_counts() == (649, 649) and len(b) == 1298
    tr, te = split(b, 0.7, seed=2)
    assert abs(len(tr) - 909) <= 1 and abs(len(te) - 389) <= 1
    assert len(tr) + len(te) == 1298


@pytest.mark.parametrize("strategy, expected", [
    ("oversample_minority", (649, 649)),
    ("undersample_majority", (224, 224)),
    ("midpoint", (436, 436)),
])
def test_strategies(strategy, expected):
    assert balance(_table(649, 224), strategy, seed=0).class_counts() == expected


def test_balanced_input_unchanged():
    t = _table(10, 10)
    b = balance(t, "both_to_majority", seed=3)
    assert Counter(b.rows) == Counter(t.rows)


def test_oversampling_keeps_every_minority_row():
    t = _table(4, 2)
    b = balance(t, "oversample_minority", seed=5)
    assert b.class_counts() == (4, 4)
    assert {r.doc_id for r in b.rows if r.label == 1} == {4, 5}


def test_balance_single_class():
    with pytest.raises(DataError):
        balance(_table(5, 0), "both_to_majority")


@settings(max_examples=40)
@given(st.integers(1, 30), st.integers(1, 30), st.sampled_from(list(BalanceStrategy)), st.integers(0, 99))
def test_balance_preserves_row_identity(n0, n1, strategy, seed):
    t = _table(n0, n1, seed)
    b = balance(t, strategy, seed)
    c0, c1 = b.class_counts()
    assert c0 == c1
    for cls in (0, 1):
        assert set(_multiset(b, cls)) <= set(_multiset(t, cls))


def test_ten_row_stratified_split():
    tr, te = split(_table(5, 5), 0.7, stratified=True, seed=0)
    assert len(tr) == 7 and sorted(tr.class_counts()) == [3, 4]


def test_split_deterministic():
    t = _table(30, 20)
    assert [a.tolist() for a in split_indices(t, seed=4)] == [a.tolist() for a in split_indices(t, seed=4)]
    assert split_indices(t, seed=4)[0].tolist() != split_indices(t, seed=5)[0].tolist()


@settings(max_examples=60)
@given(st.integers(1, 60), st.integers(1, 60), st.floats(0.1, 0.9), st.booleans(), st.integers(0, 99))
def test_split_partitions(n0, n1, fraction, stratified, seed):
    t = _table(n0, n1, seed)
    n = n0 + n1
    try:
        tr, te = split_indices(t, fraction, stratified, seed)
    except DataError:
        return
    assert sorted(tr.tolist() + te.tolist()) == list(range(n))
    if stratified:
        y = t.y
        for cls, size in ((0, n0), (1, n1)):
            assert abs((y[tr] == cls).sum() - size * fraction) <= 1 + 1e-9


def test_split_errors():
    with pytest.raises(ConfigError):
        split(_table(3, 3), 1.0)
    with pytest.raises(DataError):
        split(_table(1, 0), 0.7)


def test_split_first_has_no_leakage():
    t = _table(649, 224, seed=2)
    tr, te, manifest = balance_and_split(t, "both_to_majority", 0.7, paper_order=False, seed=7)
    assert doc_overlap(tr, te) == 0 and manifest["doc_id_overlap"] == 0
    assert manifest["order"] == "split_then_balance"
    assert tr.class_counts()[0] == tr.class_counts()[1]


def test_paper_order_reports_overlap():
    t = _table(649, 224, seed=2)
    tr, te, manifest = balance_and_split(t, "both_to_majority", 0.7, paper_order=True, seed=7)
    assert len(tr) + len(te) == 1298 and abs(len(tr) - 909) <= 1
    assert manifest["doc_id_overlap"] == doc_overlap(tr, te) > 0
    assert manifest["order"] == "balance_then_split"
