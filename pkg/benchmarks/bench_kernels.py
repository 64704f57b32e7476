"""Time the compiled kernels against their pure-Python twins.

    python3 benchmarks/bench_kernels.py [--repeats 3]

Both backends consume the same uniforms, so the script also checks that
their outputs agree bit for bit.
"""

import argparse
import time

import numpy as np

from protestdur import kernels, lda
from protestdur.synthetic import planted_corpus, rule_table


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def sweep_case(matrix, K, sweeps):
    doc_ids, word_ids = matrix.token_arrays()
    rng = np.random.default_rng(0)
    z0 = rng.integers(0, K, size=len(word_ids), dtype=np.int32)
    us = rng.random((sweeps, len(word_ids)))

    def run(fn):
        z = z0.copy()
        ndk = np.zeros((matrix.n_docs, K), dtype=np.int32)
        nkw = np.zeros((K, matrix.vocab_size), dtype=np.int32)
        np.add.at(ndk, (doc_ids, z), 1)
        np.add.at(nkw, (z, word_ids), 1)
        nk = nkw.sum(axis=1).astype(np.int32)
        for u in us:
            fn(doc_ids, word_ids, z, ndk, nkw, nk, u, 50.0 / K, 0.1)
        return nkw

    return lambda fn: (lambda: run(fn)), len(word_ids) * sweeps


def foldin_case(matrix, K, docs, iters):
    model = lda.fit_gibbs(matrix, lda.LdaHyperparams(K=K, train_iterations=50, seed=1), track_likelihood=False)
    rows = [np.repeat(*matrix.rows[d]).astype(np.int32) for d in range(docs)]
    rng = np.random.default_rng(1)
    inputs = [(w, rng.integers(0, K, size=len(w), dtype=np.int32), rng.random((iters, len(w)))) for w in rows]

    def run(fn):
        out = []
        for w, z0, u in inputs:
            z = z0.copy()
            ndk = np.bincount(z, minlength=K).astype(np.int32)
            acc = np.zeros(K)
            fn(model._phi_canonical, w, z, ndk, u, model.hyper.alpha, iters // 2, acc)
            out.append(acc)
        return np.array(out)

    return lambda fn: (lambda: run(fn)), sum(len(w) for w in rows) * iters


def split_case(nodes):
    X, y = rule_table(n_rows=1300, seed=0)
    X = np.ascontiguousarray(X, dtype=np.int64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    rng = np.random.default_rng(2)
    calls = [(np.sort(rng.choice(1300, size=rng.integers(20, 1300), replace=False)).astype(np.int64),
              np.sort(rng.choice(4, size=2, replace=False)).astype(np.int64)) for _ in range(nodes)]

    def run(fn):
        return [fn(X, y, idx, f, 24, 2) for idx, f in calls]

    return lambda fn: (lambda: run(fn)), nodes


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    if kernels.compiled_gibbs_sweep is None:
        raise SystemExit("compiled extension not built; run: pip install -e . --no-build-isolation")
    matrix = planted_corpus(seed=0).matrix
    cases = [
        ("gibbs_sweep K=24, 20 sweeps", sweep_case(matrix, 24, 20), "tokens",
         kernels.compiled_gibbs_sweep, kernels.python_gibbs_sweep),
        ("foldin_doc K=24, 100 docs x 100 sweeps", foldin_case(matrix, 24, 100, 100), "tokens",
         kernels.compiled_foldin_doc, kernels.python_foldin_doc),
        ("best_split, 2000 nodes", split_case(2000), "nodes",
         kernels.compiled_best_split, kernels.python_best_split),
    ]
    print(f"{'kernel':42s} {'cython':>10s} {'python':>10s} {'speedup':>8s}  identical")
    for name, (make, units), unit, fast, slow in cases:
        t_fast, out_fast = best_of(make(fast), args.repeats)
        t_slow, out_slow = best_of(make(slow), max(1, args.repeats // 3))
        same = np.array_equal(np.asarray(out_fast), np.asarray(out_slow))
        print(f"{name:42s} {t_fast:9.3f}s {t_slow:9.3f}s {t_slow / t_fast:7.1f}x  {same}"
              f"   ({units / t_fast:,.0f} {unit}/s compiled)")


if __name__ == "__main__":
    main()
