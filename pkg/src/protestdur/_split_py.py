"""Pure-Python twin of ``_split.pyx``; same operation order, same results."""

from math import log2

_EPS = 1e-12


def _xlogx(p):
    return p * log2(p) if p > 0 else 0.0


def best_split(X, y, idx, features, n_values, min_leaf):
    n = len(idx)
    yy = y[idx].tolist()
    c1 = sum(yy)
    c0 = n - c1
    h_parent = -(_xlogx(c0 / n) + _xlogx(c1 / n))
    best, best_ratio = -1, 0.0
    for f in features.tolist():
        counts = [0] * (2 * n_values)
        for x, t in zip(X[idx, f].tolist(), yy):
            counts[2 * x + t] += 1
        present = big = 0
        h_children = split_info = 0.0
        for v in range(n_values):
            a, b = counts[2 * v], counts[2 * v + 1]
            s = a + b
            if s == 0:
                continue
            present += 1
            if s >= min_leaf:
                big += 1
            w = s / n
            h_children += w * -(_xlogx(a / s) + _xlogx(b / s))
            split_info -= _xlogx(w)
        if present < 2 or big < 2:
            continue
        gain = h_parent - h_children
        if gain <= _EPS or split_info <= 0:
            continue
        ratio = gain / split_info
        if ratio > best_ratio + _EPS:
            best, best_ratio = f, ratio
    return best
