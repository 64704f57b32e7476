"""Class balancing and train/test splitting of feature tables."""

import enum
import math

import numpy as np

from ._util import derive_seed
from .errors import ConfigError, DataError


class BalanceStrategy(str, enum.Enum):
    OVERSAMPLE_MINORITY = "oversample_minority"
    UNDERSAMPLE_MAJORITY = "undersample_majority"
    BOTH_TO_MAJORITY = "both_to_majority"
    MIDPOINT = "midpoint"


def _class_indices(table):
    y = table.y
    idx0 = np.flatnonzero(y == 0)
    idx1 = np.flatnonzero(y == 1)
    if len(idx0) == 0 or len(idx1) == 0:
        raise DataError("balancing needs both classes present")
    return idx0, idx1


def _resize(idx, target, rng):
    """Resize a class to ``target`` rows.

    Growing keeps every original row once and adds draws with replacement;
    shrinking draws without replacement. Order follows the input.
    """
    if target >= len(idx):
        extra = rng.choice(idx, size=target - len(idx), replace=True)
        return np.concatenate([idx, np.sort(extra)])
    return np.sort(rng.choice(idx, size=target, replace=False))


def balance_indices(table, strategy=BalanceStrategy.BOTH_TO_MAJORITY, seed=0):
    strategy = BalanceStrategy(strategy)
    idx0, idx1 = _class_indices(table)
    n0, n1 = len(idx0), len(idx1)
    if strategy in (BalanceStrategy.OVERSAMPLE_MINORITY, BalanceStrategy.BOTH_TO_MAJORITY):
        target = max(n0, n1)
    elif strategy is BalanceStrategy.UNDERSAMPLE_MAJORITY:
        target = min(n0, n1)
    else:
        target = (n0 + n1) // 2
    rng = np.random.default_rng(seed)
    return np.concatenate([_resize(idx0, target, rng), _resize(idx1, target, rng)])


def balance(table, strategy=BalanceStrategy.BOTH_TO_MAJORITY, seed=0):
    """Equalize class counts by duplicating and/or dropping whole rows.

    ``oversample_minority`` and ``both_to_majority`` raise the minority class
    to the majority count; ``undersample_majority`` lowers the majority to the
    minority count; ``midpoint`` meets at ``(n0 + n1) // 2``.
    """
    return table.take(balance_indices(table, strategy, seed).tolist())


def _n_train(n, train_fraction):
    return int(math.floor(n * train_fraction + 0.5))


def split_indices(table, train_fraction=0.7, stratified=True, seed=0):
    if not 0 < train_fraction < 1:
        raise ConfigError("train_fraction must lie strictly between 0 and 1")
    n = len(table)
    n_train = _n_train(n, train_fraction)
    if n_train == 0 or n_train == n:
        raise DataError(f"a {train_fraction:.2f} split of {n} rows leaves one side empty")
    rng = np.random.default_rng(seed)
    if not stratified:
        perm = rng.permutation(n)
        return np.sort(perm[:n_train]), np.sort(perm[n_train:])

    y = table.y
    classes = [np.flatnonzero(y == c) for c in (0, 1)]
    quotas = [len(c) * train_fraction for c in classes]
    alloc = [int(math.floor(q)) for q in quotas]
    # largest remainder, ties to class 0
    for c in sorted(range(2), key=lambda c: (-(quotas[c] - alloc[c]), c)):
        if sum(alloc) >= n_train:
            break
        if alloc[c] < len(classes[c]):
            alloc[c] += 1
    train, test = [], []
    for idx, k in zip(classes, alloc):
        perm = rng.permutation(idx)
        train.append(perm[:k])
        test.append(perm[k:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def split(table, train_fraction=0.7, stratified=True, seed=0):
    """Partition rows into ``(train, test)``; ``round(n * train_fraction)``
    rows go to train (halves round up)."""
    tr, te = split_indices(table, train_fraction, stratified, seed)
    return table.take(tr.tolist()), table.take(te.tolist())


def doc_overlap(train, test):
    """Number of distinct doc ids present on both sides."""
    return len(set(train.doc_ids.tolist()) & set(test.doc_ids.tolist()))


def balance_and_split(table, strategy=BalanceStrategy.BOTH_TO_MAJORITY, train_fraction=0.7,
                      paper_order=False, seed=0):
    """Produce train/test tables and a manifest.

    Default order splits first and balances only the training side, so no
    document reaches both sides. ``paper_order`` balances the whole table
    first and then splits, which lets duplicated rows straddle the split.
    """
    strategy = BalanceStrategy(strategy)
    s_bal = derive_seed(seed, 1)
    s_split = derive_seed(seed, 2)
    if paper_order:
        balanced = balance(table, strategy, s_bal)
        train, test = split(balanced, train_fraction, True, s_split)
        order = "balance_then_split"
    else:
        train0, test = split(table, train_fraction, True, s_split)
        train = balance(train0, strategy, s_bal)
        order = "split_then_balance"
    manifest = {
        "format_version": 1,
        "kind": "split_manifest",
        "seed": int(seed),
        "strategy": strategy.value,
        "order": order,
        "train_fraction": train_fraction,
        "input_counts": dict(zip(("short_lived", "extended"), table.class_counts())),
        "train_counts": dict(zip(("short_lived", "extended"), train.class_counts())),
        "test_counts": dict(zip(("short_lived", "extended"), test.class_counts())),
        "train_rows": len(train),
        "test_rows": len(test),
        "doc_id_overlap": doc_overlap(train, test),
    }
    return train, test, manifest
