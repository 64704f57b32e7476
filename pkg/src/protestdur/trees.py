"""Gain-ratio decision trees over categorical features, with bagged and
random-forest ensembles.

Splits are multiway: one child per feature value observed at the node.
Values never seen at a node are routed to its ``default`` child, the branch
that received the most training rows.
"""

import enum
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._util import derive_seed, pmap
from .errors import DataError

FORMAT_VERSION = 1
_EPS = 1e-12


class EnsembleMode(str, enum.Enum):
    SINGLE = "single"
    BAGGED = "bagged"
    FOREST = "forest"


@dataclass(frozen=True)
class Leaf:
    cls: int
    counts: tuple


@dataclass(frozen=True)
class Internal:
    feature: int
    children: dict
    default: int
    counts: tuple


@dataclass(frozen=True)
class TreeConfig:
    min_leaf: int = 2
    max_depth: int = None


def entropy(counts):
    """Shannon entropy in bits of a count vector (zeros ignored)."""
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def information_gain(contingency):
    """Gain of splitting by the rows of a branch x class count table."""
    table = np.asarray(contingency, dtype=float)
    n = table.sum()
    parent = entropy(table.sum(axis=0))
    children = sum(row.sum() / n * entropy(row) for row in table if row.sum() > 0)
    return parent - children


def gain_ratio(contingency):
    """Information gain divided by the split information of the branches.

    Returns 0.0 when the split information is zero (a single branch).
    """
    table = np.asarray(contingency, dtype=float)
    split_info = entropy(table.sum(axis=1))
    if split_info <= 0:
        return 0.0
    return information_gain(table) / split_info


def _leaf(counts):
    c0, c1 = int(counts[0]), int(counts[1])
    return Leaf(1 if c1 > c0 else 0, (c0, c1))


def _best_split(X, y, idx, features, n_values, min_leaf):
    """Feature with the highest positive gain ratio, or None (ties to the lower index)."""
    f = kernels.best_split(X, y, idx, np.asarray(features, dtype=np.int64), n_values, min_leaf)
    return None if f < 0 else int(f)


def grow_tree(X, y, config=TreeConfig(), feature_subset=None, n_values=None):
    """Grow a tree on integer arrays ``X`` (n x p) and ``y`` (n,) in {0, 1}.

    ``feature_subset()`` returns the candidate features at each node; by
    default all features are candidates.
    """
    X = np.ascontiguousarray(X, dtype=np.int64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    if len(y) == 0:
        raise DataError("cannot grow a tree on zero rows")
    p = X.shape[1]
    if n_values is None:
        n_values = int(X.max()) + 1
    all_features = np.arange(p, dtype=np.int64)
    if feature_subset is None:
        feature_subset = lambda: all_features  # noqa: E731

    def grow(idx, depth):
        counts = np.bincount(y[idx], minlength=2)
        if counts.min() == 0 or len(idx) < 2 * config.min_leaf:
            return _leaf(counts)
        if config.max_depth is not None and depth >= config.max_depth:
            return _leaf(counts)
        f = _best_split(X, y, idx, feature_subset(), n_values, config.min_leaf)
        if f is None:
            return _leaf(counts)
        vals = X[idx, f]
        sizes = np.bincount(vals, minlength=n_values)
        children = {}
        for v in np.flatnonzero(sizes).tolist():
            children[v] = grow(idx[vals == v], depth + 1)
        default = int(np.argmax(sizes))
        return Internal(f, children, default, (int(counts[0]), int(counts[1])))

    return grow(np.arange(len(y), dtype=np.int64), 0)


def predict_tree(node, row):
    while isinstance(node, Internal):
        v = int(row[node.feature])
        node = node.children.get(v, node.children[node.default])
    return node.cls


def tree_depth(node):
    if isinstance(node, Leaf):
        return 0
    return 1 + max(tree_depth(c) for c in node.children.values())


def node_to_dict(node):
    if isinstance(node, Leaf):
        return {"leaf": True, "class": node.cls, "counts": list(node.counts)}
    return {
        "feature": node.feature,
        "default": node.default,
        "counts": list(node.counts),
        "children": {str(v): node_to_dict(c) for v, c in sorted(node.children.items())},
    }


def node_from_dict(d):
    if d.get("leaf"):
        return Leaf(int(d["class"]), tuple(d["counts"]))
    children = {int(v): node_from_dict(c) for v, c in d["children"].items()}
    return Internal(int(d["feature"]), children, int(d["default"]), tuple(d["counts"]))


@dataclass(frozen=True)
class EnsembleModel:
    trees: tuple
    mode: EnsembleMode
    mtry: int = None
    seed: int = 0

    def __post_init__(self):
        if self.mode is EnsembleMode.SINGLE and len(self.trees) != 1:
            raise ValueError("single mode holds exactly one tree")

    def votes(self, row):
        return sum(predict_tree(t, row) for t in self.trees)

    def to_dict(self):
        return {
            "format_version": FORMAT_VERSION,
            "kind": "tree_ensemble",
            "mode": self.mode.value,
            "mtry": self.mtry,
            "seed": self.seed,
            "trees": [node_to_dict(t) for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("kind") != "tree_ensemble" or d.get("format_version") != FORMAT_VERSION:
            raise DataError("not a version-1 tree_ensemble document")
        return cls(tuple(node_from_dict(t) for t in d["trees"]), EnsembleMode(d["mode"]), d["mtry"], d["seed"])


def _xy(train):
    if isinstance(train, tuple):
        X, y = train
        return np.asarray(X, dtype=np.int64), np.asarray(y, dtype=np.int64)
    return train.X, train.y


def _domain(train, X):
    K = getattr(train, "K", None)
    return max(int(X.max()) + 1 if len(X) else 1, K or 0)


def fit_tree(train, config=TreeConfig()):
    """Single gain-ratio tree. ``train`` is a FeatureTable or an ``(X, y)`` pair."""
    X, y = _xy(train)
    tree = grow_tree(X, y, config, n_values=_domain(train, X))
    return EnsembleModel((tree,), EnsembleMode.SINGLE)


def _fit_ensemble(train, n_trees, config, seed, mtry, bootstrap, jobs, mode):
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    X, y = _xy(train)
    n, p = X.shape
    n_values = _domain(train, X)
    if mtry is not None and not 1 <= mtry <= p:
        raise ValueError(f"mtry must lie in [1, {p}]")
    seeds = [derive_seed(seed, t) for t in range(n_trees)]

    def one(tree_seed):
        rng = np.random.default_rng(tree_seed)
        idx = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        if mtry is None or mtry >= p:
            subset = None
        else:
            subset = lambda: sorted(rng.choice(p, size=mtry, replace=False).tolist())  # noqa: E731
        return grow_tree(X[idx], y[idx], config, subset, n_values)

    trees = tuple(pmap(one, seeds, jobs))
    return EnsembleModel(trees, mode, mtry if mode is EnsembleMode.FOREST else None, int(seed))


def fit_bagged(train, n_trees=25, config=TreeConfig(), seed=0, bootstrap=True, jobs=1):
    """Bootstrap-aggregated trees; each tree sees a resample of size |train|."""
    return _fit_ensemble(train, n_trees, config, seed, None, bootstrap, jobs, EnsembleMode.BAGGED)


def fit_forest(train, n_trees=500, mtry=2, config=TreeConfig(), seed=0, jobs=1):
    """Bagging plus a fresh uniform feature subset of size ``mtry`` at every node.

    With ``mtry`` equal to the feature count no subset is drawn, so the
    result matches ``fit_bagged`` with the same seed.
    """
    return _fit_ensemble(train, n_trees, config, seed, mtry, True, jobs, EnsembleMode.FOREST)


def predict(model, row):
    """Majority vote as ``(class, vote_fraction)``; ties go to ShortLived (0)."""
    votes = model.votes(row)
    n = len(model.trees)
    cls = 1 if 2 * votes > n else 0
    share = votes if cls == 1 else n - votes
    return cls, share / n


def predict_many(model, X):
    X = np.asarray(X, dtype=np.int64)
    out = np.empty(len(X), dtype=np.int64)
    for i, row in enumerate(X.tolist()):
        out[i] = predict(model, row)[0]
    return out


def bootstrap_indices(n, seed):
    """The bootstrap resample used for the ensemble tree with this seed."""
    return np.random.default_rng(seed).integers(0, n, size=n)
