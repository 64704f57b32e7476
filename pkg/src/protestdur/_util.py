import hashlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def derive_seed(seed, *keys):
    """Deterministic 63-bit child seed for ``(seed, *keys)`` via SeedSequence."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def content_seed(seed, *arrays):
    """Child seed keyed by the bytes of ``arrays`` (e.g. a document's counts)."""
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(a, dtype=np.int64).tobytes())
        h.update(b"|")
    return derive_seed(seed, int.from_bytes(h.digest()[:7], "little"))


def pmap(fn, items, jobs=1):
    """Ordered map, threaded when ``jobs > 1``. Results never depend on ``jobs``."""
    items = list(items)
    if jobs is None or jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))
