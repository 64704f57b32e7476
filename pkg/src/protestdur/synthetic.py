"""Synthetic data: planted-topic corpora, a protest-like CSV, and noisy
rule-labelled feature tables. Used by tests, benchmarks and the CLI's
``generate`` command when the original dataset is unavailable."""

import csv
from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from .corpus import CorpusMatrix


@dataclass
class PlantedCorpus:
    matrix: CorpusMatrix
    phi: np.ndarray  # true K x V
    theta: np.ndarray  # true M x K
    dominant: np.ndarray  # argmax of theta per document


def planted_corpus(n_topics=4, vocab_size=200, n_docs=400, doc_length=60, doc_alpha=0.1,
                   topic_beta=0.05, seed=0):
    """Corpus sampled from the LDA generative process with known topics."""
    rng = np.random.default_rng(seed)
    phi = rng.dirichlet(np.full(vocab_size, topic_beta), size=n_topics)
    theta = rng.dirichlet(np.full(n_topics, doc_alpha), size=n_docs)
    rows = []
    for d in range(n_docs):
        z = rng.choice(n_topics, size=doc_length, p=theta[d])
        words = np.array([rng.choice(vocab_size, p=phi[k]) for k in z])
        rows.append(np.bincount(words, minlength=vocab_size))
    matrix = CorpusMatrix.from_counts(rows, vocab_size)
    return PlantedCorpus(matrix, phi, theta, theta.argmax(axis=1))


def disjoint_corpus(n_docs=60, words_per_group=10, doc_length=40, seed=0):
    """Two document groups drawing uniformly from disjoint halves of the vocabulary."""
    rng = np.random.default_rng(seed)
    V = 2 * words_per_group
    phi = np.zeros((2, V))
    phi[0, :words_per_group] = 1.0 / words_per_group
    phi[1, words_per_group:] = 1.0 / words_per_group
    groups = np.arange(n_docs) % 2
    rows = [np.bincount(rng.choice(V, size=doc_length, p=phi[g]), minlength=V) for g in groups]
    theta = np.eye(2)[groups]
    return PlantedCorpus(CorpusMatrix.from_counts(rows, V), phi, theta, groups)


def cosine_matrix(a, b):
    a = a / np.linalg.norm(a, axis=1, keepdims=True)
    b = b / np.linalg.norm(b, axis=1, keepdims=True)
    return a @ b.T


def greedy_align(learned, true):
    """Greedily pair rows of ``learned`` with rows of ``true`` by cosine.

    Returns ``(pairs, cosines)`` where ``pairs[j] = (learned_row, true_row)``.
    """
    sim = cosine_matrix(learned, true)
    pairs, cosines = [], []
    used_l, used_t = set(), set()
    for _ in range(min(sim.shape)):
        best = None
        for i in range(sim.shape[0]):
            if i in used_l:
                continue
            for j in range(sim.shape[1]):
                if j in used_t:
                    continue
                if best is None or sim[i, j] > sim[best]:
                    best = (i, j)
        used_l.add(best[0])
        used_t.add(best[1])
        pairs.append(best)
        cosines.append(float(sim[best]))
    return pairs, cosines


# ----------------------------------------------------------------------
# protest-like CSV

_THEMES = {
    "service delivery": "residents water electricity housing toilets roads sanitation municipality councillor "
                        "services delivery informal settlement ward",
    "labour": "workers strike wages salary union mine employees demand increase cosatu dismissed contract",
    "crime": "police arrested suspect murder crime community station killed accused court justice",
    "education": "students learners school university fees teachers classes campus education principal",
    "political": "anc party members leaders march election supporters candidate memorandum political",
    "transport": "taxi drivers bus route commuters train blockade highway transport operators",
}
_FILLER = ("gathered protest protested burning tyres blocked road memorandum handed demanded "
           "angry dispersed rubber bullets marched offices violent peaceful residents")
_PROVINCES = ["Gauteng", "Western Cape", "Kwazulu Natal", "Eastern Cape", "North West",
              "Limpopo", "Mpumalanga", "Free State", "Northern Cape"]
_PROVINCE_P = [37, 18, 14, 9, 6, 6, 5, 3, 2]
# themes that tend to run longer (labour disputes and campus protests)
_LONG_THEMES = {"labour": 0.55, "education": 0.5, "service delivery": 0.2, "crime": 0.08,
                "political": 0.1, "transport": 0.15}


def protest_csv(path, n_rows=876, n_incomplete=3, seed=0):
    """Write a CSV with the column layout of the protest dataset.

    Columns: ``id, province, issue, state, start_date, end_date, reason``.
    Durations depend on the (hidden) theme so text carries signal.
    """
    rng = np.random.default_rng(seed)
    themes = list(_THEMES)
    vocab = {t: _THEMES[t].split() for t in themes}
    filler = _FILLER.split()
    province_p = np.array(_PROVINCE_P, float) / sum(_PROVINCE_P)
    incomplete = set(rng.choice(n_rows, size=n_incomplete, replace=False).tolist()) if n_incomplete else set()
    base = date(2013, 2, 1)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "province", "issue", "state", "start_date", "end_date", "reason"])
        for i in range(n_rows):
            main = themes[rng.integers(len(themes))]
            second = themes[rng.integers(len(themes))]
            n_words = int(rng.integers(12, 40))
            words = []
            for _ in range(n_words):
                r = rng.random()
                pool = vocab[main] if r < 0.6 else vocab[second] if r < 0.8 else filler
                words.append(pool[rng.integers(len(pool))])
            text = "The " + " ".join(words) + "."
            start = base + timedelta(days=int(rng.integers(0, 395)))
            if rng.random() < _LONG_THEMES[main]:
                days = int(min(rng.geometric(0.45), 65))
            else:
                days = 0
            end = start + timedelta(days=days)
            state = "Violent" if rng.random() < 0.45 else "Peaceful"
            province = _PROVINCES[rng.choice(len(_PROVINCES), p=province_p)]
            row = [i + 1, province, main.title(), state, start.isoformat(), end.isoformat(), text]
            if i in incomplete:
                row[6 if rng.random() < 0.5 else 5] = ""
            w.writerow(row)
    return path


# ----------------------------------------------------------------------
# rule-labelled categorical tables


def rule_table(n_rows=1300, n_values=24, noise=0.1, seed=0):
    """Four categorical topic-id columns with a planted label rule plus noise.

    The label is 1 when the first column falls in a "long" topic set, or the
    second column does and the third does not. A fraction ``noise`` of labels
    is flipped. Returns ``(X, y)``.
    """
    rng = np.random.default_rng(seed)
    X = rng.integers(0, n_values, size=(n_rows, 4))
    long_a = np.arange(n_values) % 4 == 0
    long_b = np.arange(n_values) % 3 == 0
    block_c = np.arange(n_values) < n_values // 3
    y = long_a[X[:, 0]] | (long_b[X[:, 1]] & ~block_c[X[:, 2]])
    flip = rng.random(n_rows) < noise
    y = (y ^ flip).astype(np.int64)
    return X, y
