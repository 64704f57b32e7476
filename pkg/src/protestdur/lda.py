"""Latent Dirichlet allocation fitted by collapsed Gibbs sampling.

Randomness comes from numpy's PCG64 generator (``np.random.default_rng``),
so a given seed reproduces the same model on any platform. Each sweep draws
one uniform per token up front and hands them to the kernel, which keeps the
compiled and pure-Python backends in lockstep.
"""

import logging
from dataclasses import asdict, dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import gammaln

from . import kernels
from ._util import content_seed, pmap
from .corpus import CorpusMatrix, Vocabulary
from .errors import ConfigError, DataError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass(frozen=True)
class LdaHyperparams:
    K: int
    alpha: float = None
    beta: float = 0.1
    train_iterations: int = 1000
    burn_in: int = None
    seed: int = 0

    def __post_init__(self):
        if self.alpha is None:
            object.__setattr__(self, "alpha", 50.0 / self.K if self.K > 0 else 0.0)
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", min(200, self.train_iterations // 5))
        if self.K < 1:
            raise ConfigError(f"K must be >= 1, got {self.K}")
        if not self.alpha > 0 or not self.beta > 0:
            raise ConfigError("alpha and beta must be positive")
        if not self.train_iterations > self.burn_in >= 0:
            raise ConfigError("need train_iterations > burn_in >= 0")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    def replace(self, **changes):
        d = asdict(self)
        if "K" in changes and "alpha" not in changes:
            d["alpha"] = None
        d.update(changes)
        return LdaHyperparams(**d)


@dataclass
class GibbsState:
    """Sampler state exposed to per-sweep callbacks. Do not mutate."""

    doc_ids: np.ndarray
    word_ids: np.ndarray
    z: np.ndarray
    doc_topic: np.ndarray  # M x K
    topic_word: np.ndarray  # K x V
    topic_totals: np.ndarray  # K
    doc_lengths: np.ndarray  # M


@dataclass(frozen=True)
class DocTopicMixture:
    theta: np.ndarray
    empty: bool = False


@dataclass(frozen=True)
class TopicSummary:
    topic_id: int
    top_words: list
    name: str


@dataclass(eq=False)
class LdaModel:
    hyper: LdaHyperparams
    topic_word_counts: np.ndarray
    vocab: Vocabulary = None
    iterations: int = 0
    log_likelihood: list = field(default_factory=list)

    def __post_init__(self):
        self.topic_word_counts = np.ascontiguousarray(self.topic_word_counts, dtype=np.int64)
        self.topic_word_counts.setflags(write=False)
        if self.topic_word_counts.shape[0] != self.hyper.K:
            raise ValueError("count matrix rows must equal K")

    @property
    def K(self):
        return self.hyper.K

    @property
    def vocab_size(self):
        return self.topic_word_counts.shape[1]

    @property
    def topic_totals(self):
        return self.topic_word_counts.sum(axis=1)

    @cached_property
    def phi(self):
        """K x V topic-word distributions, ``(count + beta) / (total + V*beta)``."""
        vbeta = self.vocab_size * self.hyper.beta
        phi = (self.topic_word_counts + self.hyper.beta) / (self.topic_totals[:, None] + vbeta)
        phi.setflags(write=False)
        return phi

    @cached_property
    def canonical_order(self):
        """Topic ids sorted by their count rows; independent of topic labels."""
        return np.lexsort(self.topic_word_counts.T[::-1])

    @cached_property
    def _phi_canonical(self):
        return np.ascontiguousarray(self.phi[self.canonical_order])

    def permuted(self, perm):
        """Model whose topic ``i`` is this model's topic ``perm[i]``."""
        return LdaModel(
            self.hyper,
            self.topic_word_counts[np.asarray(perm)],
            self.vocab,
            self.iterations,
            list(self.log_likelihood),
        )

    def to_dict(self):
        return {
            "format_version": FORMAT_VERSION,
            "kind": "lda_model",
            "hyperparams": asdict(self.hyper),
            "vocabulary": list(self.vocab.id_to_token) if self.vocab is not None else None,
            "vocab_size": self.vocab_size,
            "topic_word_counts": self.topic_word_counts.tolist(),
            "iterations": self.iterations,
            "log_likelihood": list(self.log_likelihood),
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("kind") != "lda_model" or d.get("format_version") != FORMAT_VERSION:
            raise DataError("not a version-1 lda_model document")
        vocab = Vocabulary(d["vocabulary"]) if d.get("vocabulary") is not None else None
        counts = np.array(d["topic_word_counts"], dtype=np.int64).reshape(d["hyperparams"]["K"], d["vocab_size"])
        return cls(LdaHyperparams(**d["hyperparams"]), counts, vocab, d["iterations"], list(d["log_likelihood"]))


def collapsed_log_likelihood(topic_word, topic_totals, beta):
    """log p(w | z) with phi integrated out."""
    K, V = topic_word.shape
    return float(
        K * (gammaln(V * beta) - V * gammaln(beta))
        + gammaln(topic_word + beta).sum()
        - gammaln(topic_totals + V * beta).sum()
    )


def training_perplexity(state, hyper):
    """Plug-in perplexity of the training tokens under the current state."""
    K = state.topic_word.shape[0]
    V = state.topic_word.shape[1]
    theta = (state.doc_topic + hyper.alpha) / (state.doc_lengths[:, None] + K * hyper.alpha)
    phi = (state.topic_word + hyper.beta) / (state.topic_totals[:, None] + V * hyper.beta)
    p = np.einsum("ik,ki->i", theta[state.doc_ids], phi[:, state.word_ids])
    return float(np.exp(-np.log(p).sum() / len(state.word_ids)))


def fit_gibbs(matrix, hyper, vocab=None, callback=None, track_likelihood=True):
    """Fit LDA to ``matrix`` by collapsed Gibbs sampling.

    ``callback(iteration, state)`` runs after every sweep (1-based iteration).
    The returned model holds the final sweep's topic-word counts.
    """
    V = matrix.vocab_size
    if matrix.n_docs == 0:
        raise DataError("cannot fit LDA to an empty corpus")
    if V < 2:
        raise DataError("LDA needs a vocabulary of at least 2 words")
    doc_ids, word_ids = matrix.token_arrays()
    n = len(word_ids)
    K = hyper.K
    if K > n:
        raise DataError(f"K={K} exceeds the number of training tokens ({n})")

    rng = np.random.default_rng(hyper.seed)
    z = rng.integers(0, K, size=n, dtype=np.int32)
    ndk = np.zeros((matrix.n_docs, K), dtype=np.int32)
    nkw = np.zeros((K, V), dtype=np.int32)
    np.add.at(ndk, (doc_ids, z), 1)
    np.add.at(nkw, (z, word_ids), 1)
    nk = nkw.sum(axis=1).astype(np.int32)
    state = GibbsState(doc_ids, word_ids, z, ndk, nkw, nk, matrix.doc_lengths)

    trace = []
    for it in range(1, hyper.train_iterations + 1):
        u = rng.random(n)
        kernels.gibbs_sweep(doc_ids, word_ids, z, ndk, nkw, nk, u, hyper.alpha, hyper.beta)
        if track_likelihood:
            trace.append(collapsed_log_likelihood(nkw, nk, hyper.beta))
        if callback is not None:
            callback(it, state)
    if track_likelihood and len(trace) > hyper.burn_in:
        tail = trace[hyper.burn_in:]
        logger.debug("K=%d: mean post-burn-in log-likelihood %.3f", K, sum(tail) / len(tail))
    return LdaModel(hyper, nkw.astype(np.int64), vocab, hyper.train_iterations, trace)


def _doc_word_ids(doc):
    if isinstance(doc, tuple):
        w, c = doc
        return np.repeat(np.asarray(w, dtype=np.int32), np.asarray(c, dtype=np.int64))
    return np.asarray(doc, dtype=np.int32)


def _infer_canonical(model, word_ids, fold_in_iterations, seed, burn_in):
    K = model.K
    n = len(word_ids)
    if n == 0:
        return np.full(K, 1.0 / K), True
    if burn_in is None:
        burn_in = fold_in_iterations // 2
    if not fold_in_iterations > burn_in >= 0:
        raise ConfigError("need fold_in_iterations > burn_in >= 0")
    if word_ids.max() >= model.vocab_size or word_ids.min() < 0:
        raise DataError("document contains word ids outside the model vocabulary")
    rng = np.random.default_rng(seed)
    z = rng.integers(0, K, size=n, dtype=np.int32)
    ndk = np.bincount(z, minlength=K).astype(np.int32)
    u = rng.random((fold_in_iterations, n))
    acc = np.zeros(K)
    kept = kernels.foldin_doc(model._phi_canonical, word_ids, z, ndk, u, model.hyper.alpha, burn_in, acc)
    return acc / kept, False


def infer_theta(model, doc, fold_in_iterations=100, seed=0, burn_in=None):
    """Topic mixture of ``doc`` by fold-in Gibbs against the frozen model.

    ``doc`` is a ``(word_ids, counts)`` pair or a flat array of word ids.
    theta is averaged over the sweeps after ``burn_in`` (default: half).
    An empty document gets the uniform mixture with ``empty=True``.
    """
    theta_c, empty = _infer_canonical(model, _doc_word_ids(doc), fold_in_iterations, seed, burn_in)
    theta = np.empty(model.K)
    theta[model.canonical_order] = theta_c
    return DocTopicMixture(theta, empty)


def doc_seed(seed, doc):
    """Per-document fold-in seed keyed by the document's contents."""
    w, c = doc
    return content_seed(seed, w, c)


def _infer_rows_canonical(model, matrix, fold_in_iterations, seed, jobs, burn_in=None):
    def one(row):
        return _infer_canonical(model, _doc_word_ids(row), fold_in_iterations, doc_seed(seed, row), burn_in)

    return pmap(one, matrix.rows, jobs)


def infer_matrix(model, matrix, fold_in_iterations=100, seed=0, jobs=1, burn_in=None):
    """Fold-in every row; returns ``(theta M x K, empty flags)``."""
    res = _infer_rows_canonical(model, matrix, fold_in_iterations, seed, jobs, burn_in)
    theta = np.empty((matrix.n_docs, model.K))
    if res:
        theta[:, model.canonical_order] = np.array([t for t, _ in res])
    return theta, np.array([e for _, e in res], dtype=bool)


def log_likelihood_plugin(theta, phi, matrix):
    """Per-document ``sum_n log sum_k theta_dk phi_k,w_dn``."""
    out = np.zeros(matrix.n_docs)
    for d, (w, c) in enumerate(matrix.rows):
        if len(w):
            p = theta[d] @ phi[:, w]
            out[d] = float(np.dot(c, np.log(p)))
    return out


def split_for_completion(matrix):
    """Split each document's tokens alternately into an estimation half and an
    evaluation half (positions 0, 2, 4, ... estimate; 1, 3, 5, ... evaluate)."""
    est_rows, eval_rows = [], []
    for w, c in matrix.rows:
        tokens = np.repeat(w, c)
        for rows, part in ((est_rows, tokens[0::2]), (eval_rows, tokens[1::2])):
            ids, counts = np.unique(part, return_counts=True)
            rows.append((ids.astype(np.int32), counts.astype(np.int32)))
    return CorpusMatrix(est_rows, matrix.vocab_size), CorpusMatrix(eval_rows, matrix.vocab_size)


def perplexity(model, heldout, fold_in_iterations=100, seed=0, jobs=1, burn_in=None, completion=True):
    """exp(-sum_d log p(w_d) / sum_d N_d) with fold-in plug-in estimates.

    With ``completion`` (the default) theta is folded in on every other token
    of each document and the remaining tokens are scored, so theta is never
    fit to the words it is judged on. ``completion=False`` folds in and
    scores the same tokens. Empty documents contribute to neither sum.
    """
    if heldout.vocab_size != model.vocab_size:
        raise DataError("held-out matrix and model disagree on vocabulary size")
    if completion:
        estimate, scored = split_for_completion(heldout)
    else:
        estimate, scored = heldout, heldout
    total = scored.total_tokens
    if total == 0:
        raise DataError("no held-out tokens to score; perplexity undefined")
    res = _infer_rows_canonical(model, estimate, fold_in_iterations, seed, jobs, burn_in)
    theta_c = np.array([t for t, _ in res])
    ll = log_likelihood_plugin(theta_c, model._phi_canonical, scored)
    return float(np.exp(-ll.sum() / total))


def summarize_topics(model, top_n=10):
    """Top words per topic; each topic is named by its most probable token."""
    if top_n > model.vocab_size:
        raise ConfigError(f"top_n={top_n} exceeds vocabulary size {model.vocab_size}")
    ids = np.arange(model.vocab_size)
    out = []
    for k in range(model.K):
        row = model.phi[k]
        order = np.lexsort((ids, -row))[:top_n]
        tokens = [model.vocab.id_to_token[i] if model.vocab is not None else str(i) for i in order.tolist()]
        words = [(t, float(row[i])) for t, i in zip(tokens, order.tolist())]
        out.append(TopicSummary(k, words, tokens[0]))
    return out
