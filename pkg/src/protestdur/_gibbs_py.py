"""Pure-Python twin of the compiled Gibbs kernels in ``_gibbs.pyx``.

Arithmetic is ordered exactly as in the compiled version so both backends
agree bit for bit. Arrays are copied into lists for speed and written back.
"""


def gibbs_sweep(doc_ids, word_ids, z, ndk, nkw, nk, uniforms, alpha, beta):
    K = nk.shape[0]
    vbeta = nkw.shape[1] * beta
    docs = doc_ids.tolist()
    words = word_ids.tolist()
    us = uniforms.tolist()
    zl = z.tolist()
    ndk_l = ndk.tolist()
    nkw_l = nkw.tolist()
    nk_l = nk.tolist()
    topics = range(K)
    cum = [0.0] * K
    for i in range(len(words)):
        d = docs[i]
        w = words[i]
        old = zl[i]
        row = ndk_l[d]
        row[old] -= 1
        nkw_l[old][w] -= 1
        nk_l[old] -= 1

        total = 0.0
        for k in topics:
            total = total + (nkw_l[k][w] + beta) / (nk_l[k] + vbeta) * (row[k] + alpha)
            cum[k] = total
        target = us[i] * total
        k = 0
        while k < K - 1 and target >= cum[k]:
            k += 1

        zl[i] = k
        row[k] += 1
        nkw_l[k][w] += 1
        nk_l[k] += 1
    z[:] = zl
    ndk[:] = ndk_l
    nkw[:] = nkw_l
    nk[:] = nk_l


def foldin_doc(phi, word_ids, z, ndk, uniforms, alpha, burn_in, theta_sum):
    K = phi.shape[0]
    n = word_ids.shape[0]
    denom = n + K * alpha
    words = word_ids.tolist()
    cols = {w: phi[:, w].tolist() for w in set(words)}
    zl = z.tolist()
    counts = ndk.tolist()
    acc = theta_sum.tolist()
    topics = range(K)
    cum = [0.0] * K
    kept = 0
    for it, us in enumerate(uniforms.tolist()):
        for i in range(n):
            col = cols[words[i]]
            counts[zl[i]] -= 1
            total = 0.0
            for k in topics:
                total = total + col[k] * (counts[k] + alpha)
                cum[k] = total
            target = us[i] * total
            k = 0
            while k < K - 1 and target >= cum[k]:
                k += 1
            zl[i] = k
            counts[k] += 1
        if it >= burn_in:
            for k in topics:
                acc[k] = acc[k] + (counts[k] + alpha) / denom
            kept += 1
    z[:] = zl
    ndk[:] = counts
    theta_sum[:] = acc
    return kept
