# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled collapsed-Gibbs kernels.

Both functions mirror ``protestdur._gibbs_py`` operation for operation so the
two backends produce bit-identical results from the same uniforms.
"""

cimport cython
from libc.stdlib cimport malloc, free


def gibbs_sweep(const int[::1] doc_ids, const int[::1] word_ids, int[::1] z,
                int[:, ::1] ndk, int[:, ::1] nkw, int[::1] nk,
                const double[::1] uniforms, double alpha, double beta):
    """One full sweep over every token, updating counts in place."""
    cdef Py_ssize_t n = word_ids.shape[0]
    cdef int K = nk.shape[0]
    cdef double vbeta = nkw.shape[1] * beta
    cdef Py_ssize_t i
    cdef int k, d, w, old
    cdef double total, target
    cdef double *cum = <double *> malloc(K * sizeof(double))
    if cum == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                d = doc_ids[i]
                w = word_ids[i]
                old = z[i]
                ndk[d, old] -= 1
                nkw[old, w] -= 1
                nk[old] -= 1

                total = 0.0
                for k in range(K):
                    total = total + (nkw[k, w] + beta) / (nk[k] + vbeta) * (ndk[d, k] + alpha)
                    cum[k] = total
                target = uniforms[i] * total
                k = 0
                while k < K - 1 and target >= cum[k]:
                    k += 1

                z[i] = k
                ndk[d, k] += 1
                nkw[k, w] += 1
                nk[k] += 1
    finally:
        free(cum)


def foldin_doc(const double[:, ::1] phi, const int[::1] word_ids, int[::1] z,
               int[::1] ndk, const double[:, ::1] uniforms, double alpha,
               int burn_in, double[::1] theta_sum):
    """Fold-in sweeps for one document against frozen ``phi``.

    Accumulates ``(ndk + alpha) / (n + K*alpha)`` into ``theta_sum`` after every
    sweep past ``burn_in``; returns the number of accumulated sweeps.
    """
    cdef Py_ssize_t n = word_ids.shape[0]
    cdef int K = phi.shape[0]
    cdef int iters = uniforms.shape[0]
    cdef double denom = n + K * alpha
    cdef Py_ssize_t i
    cdef int it, k, w, old
    cdef int kept = 0
    cdef double total, target
    cdef double *cum = <double *> malloc(K * sizeof(double))
    if cum == NULL:
        raise MemoryError()
    try:
        with nogil:
            for it in range(iters):
                for i in range(n):
                    w = word_ids[i]
                    old = z[i]
                    ndk[old] -= 1
                    total = 0.0
                    for k in range(K):
                        total = total + phi[k, w] * (ndk[k] + alpha)
                        cum[k] = total
                    target = uniforms[it, i] * total
                    k = 0
                    while k < K - 1 and target >= cum[k]:
                        k += 1
                    z[i] = k
                    ndk[k] += 1
                if it >= burn_in:
                    for k in range(K):
                        theta_sum[k] = theta_sum[k] + (ndk[k] + alpha) / denom
                    kept += 1
    finally:
        free(cum)
    return kept
