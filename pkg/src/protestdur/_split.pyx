# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled gain-ratio split search, mirrored by ``protestdur._split_py``."""

from libc.math cimport log2
from libc.stdint cimport int64_t
from libc.stdlib cimport calloc, free


cdef inline double _xlogx(double p) nogil:
    if p > 0:
        return p * log2(p)
    return 0.0


def best_split(const int64_t[:, ::1] X, const int64_t[::1] y, const int64_t[::1] idx,
               const int64_t[::1] features, int n_values, int min_leaf):
    """Index of the feature with the best positive gain ratio, or -1."""
    cdef Py_ssize_t n = idx.shape[0], nf = features.shape[0]
    cdef Py_ssize_t i, j, v
    cdef int64_t r, f, best = -1
    cdef long c0 = 0, c1 = 0, a, b, s
    cdef int present, big
    cdef double eps = 1e-12
    cdef double h_parent, h_children, split_info, w, gain, ratio, best_ratio = 0.0
    cdef long *counts = <long *> calloc(2 * n_values, sizeof(long))
    if counts == NULL:
        raise MemoryError()
    with nogil:
        for i in range(n):
            if y[idx[i]]:
                c1 += 1
            else:
                c0 += 1
        h_parent = -(_xlogx(<double> c0 / n) + _xlogx(<double> c1 / n))
        for j in range(nf):
            f = features[j]
            for v in range(2 * n_values):
                counts[v] = 0
            for i in range(n):
                r = idx[i]
                counts[2 * X[r, f] + y[r]] += 1
            present = 0
            big = 0
            h_children = 0.0
            split_info = 0.0
            for v in range(n_values):
                a = counts[2 * v]
                b = counts[2 * v + 1]
                s = a + b
                if s == 0:
                    continue
                present += 1
                if s >= min_leaf:
                    big += 1
                w = <double> s / n
                h_children += w * -(_xlogx(<double> a / s) + _xlogx(<double> b / s))
                split_info -= _xlogx(w)
            if present < 2 or big < 2:
                continue
            gain = h_parent - h_children
            if gain <= eps or split_info <= 0:
                continue
            ratio = gain / split_info
            if ratio > best_ratio + eps:
                best = f
                best_ratio = ratio
    free(counts)
    return best
