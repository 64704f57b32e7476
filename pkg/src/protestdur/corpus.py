"""Protest CSV ingestion, duration labels, text preprocessing and the
document-term matrix."""

import csv
import enum
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import date, datetime
from functools import lru_cache
from importlib import resources

import numpy as np

from .errors import DataError
from .porter import stem as porter_stem

logger = logging.getLogger(__name__)


class DurationClass(enum.IntEnum):
    SHORT_LIVED = 0  # under one calendar day
    EXTENDED = 1  # one day or more


@dataclass(frozen=True)
class RawRecord:
    id: int
    text: str
    start_date: date
    end_date: date
    extra: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class DurationLabel:
    days: int
    cls: DurationClass


@lru_cache(maxsize=1)
def smart_stopwords():
    """The embedded SMART stopword list as a frozenset."""
    text = resources.files("protestdur").joinpath("data/smart_stopwords.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


def load_stopwords(path):
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip().lower() for line in fh if line.strip() and not line.startswith("#"))


@dataclass(frozen=True)
class PreprocessConfig:
    lowercase: bool = True
    strip_punctuation: bool = True
    strip_numbers: bool = True
    stopword_list: frozenset = field(default_factory=smart_stopwords)
    stem: bool = True
    min_token_length: int = 3
    min_corpus_frequency: int = 5

    def __post_init__(self):
        if self.min_token_length < 1:
            raise ValueError("min_token_length must be >= 1")
        if self.min_corpus_frequency < 1:
            raise ValueError("min_corpus_frequency must be >= 1")
        object.__setattr__(self, "stopword_list", frozenset(self.stopword_list))

    def manifest(self):
        """JSON-friendly description; the stopword list is summarized by size and digest."""
        import hashlib

        digest = hashlib.sha256("\n".join(sorted(self.stopword_list)).encode("utf-8")).hexdigest()
        return {
            "lowercase": self.lowercase,
            "strip_punctuation": self.strip_punctuation,
            "strip_numbers": self.strip_numbers,
            "stopwords": {"count": len(self.stopword_list), "sha256": digest},
            "stem": self.stem,
            "stemmer": "porter-1980" if self.stem else None,
            "min_token_length": self.min_token_length,
            "min_corpus_frequency": self.min_corpus_frequency,
        }


# ----------------------------------------------------------------------
# ingestion


def _parse_date(value, date_format):
    value = value.strip()
    if date_format:
        return datetime.strptime(value, date_format).date()
    try:
        return date.fromisoformat(value)
    except ValueError:
        # ISO datetimes such as 2013-02-01T10:00 or "2013-02-01 10:00:00"
        return datetime.fromisoformat(value).date()


def ingest_csv(path, schema, date_format=None):
    """Read protest rows from a UTF-8 CSV.

    ``schema`` maps the logical names ``text``, ``start``, ``end`` (and
    optionally ``id``) to column headers. Rows with a missing selected field,
    an unparseable date, or ``end < start`` are dropped.

    Returns ``(records, drop_count)``.
    """
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for key in ("text", "start", "end"):
            col = schema.get(key)
            if col is None:
                raise DataError(f"schema does not name the '{key}' column")
            if col not in header:
                raise DataError(f"missing column '{col}' in {path}")
        id_col = schema.get("id")
        if id_col is not None and id_col not in header:
            raise DataError(f"missing column '{id_col}' in {path}")
        selected = {schema["text"], schema["start"], schema["end"]}

        records = []
        dropped = 0
        for rownum, row in enumerate(reader):
            text = (row.get(schema["text"]) or "").strip()
            start_raw = row.get(schema["start"]) or ""
            end_raw = row.get(schema["end"]) or ""
            if not text or not start_raw.strip() or not end_raw.strip():
                dropped += 1
                continue
            try:
                start = _parse_date(start_raw, date_format)
                end = _parse_date(end_raw, date_format)
            except ValueError:
                dropped += 1
                continue
            if end < start:
                dropped += 1
                continue
            if id_col is not None:
                try:
                    rid = int(row[id_col])
                except (TypeError, ValueError):
                    dropped += 1
                    continue
            else:
                rid = rownum
            extra = {k: v for k, v in row.items() if k not in selected and k is not None}
            records.append(RawRecord(rid, text, start, end, extra))
    if dropped:
        logger.info("dropped %d incomplete or invalid rows from %s", dropped, path)
    return records, dropped


def duration_days(record):
    days = (record.end_date - record.start_date).days
    cls = DurationClass.SHORT_LIVED if days == 0 else DurationClass.EXTENDED
    return DurationLabel(days, cls)


def binarize_label(days):
    return DurationClass.SHORT_LIVED if days == 0 else DurationClass.EXTENDED


# ----------------------------------------------------------------------
# text

_PUNCT_RE = re.compile(r"[^\w\s]|_")
_DIGIT_RE = re.compile(r"\d+")
_ALPHA_RUN_RE = re.compile(r"[^\W\d_]+")


def preprocess(text, cfg=None):
    """Turn free text into a list of (stemmed) tokens, order preserved.

    Steps: lowercase, delete punctuation, delete digits, take maximal
    alphabetic runs, drop stopwords and tokens shorter than
    ``min_token_length``, then stem.
    """
    cfg = cfg or PreprocessConfig()
    if cfg.lowercase:
        text = text.lower()
    if cfg.strip_punctuation:
        text = _PUNCT_RE.sub("", text)
    if cfg.strip_numbers:
        text = _DIGIT_RE.sub("", text)
    tokens = [
        t
        for t in _ALPHA_RUN_RE.findall(text)
        if len(t) >= cfg.min_token_length and t not in cfg.stopword_list
    ]
    if cfg.stem:
        tokens = [porter_stem(t) for t in tokens]
    return tokens


@dataclass
class Vocabulary:
    id_to_token: list

    def __post_init__(self):
        self.token_to_id = {t: i for i, t in enumerate(self.id_to_token)}
        if len(self.token_to_id) != len(self.id_to_token):
            raise ValueError("vocabulary tokens must be unique")

    @property
    def size(self):
        return len(self.id_to_token)

    def __len__(self):
        return len(self.id_to_token)

    def __contains__(self, token):
        return token in self.token_to_id


def build_vocabulary(docs, cfg=None, min_frequency=None):
    """Vocabulary of tokens reaching the corpus-frequency floor.

    Ids follow first appearance in ``docs``. ``min_frequency`` overrides
    ``cfg.min_corpus_frequency``.
    """
    if min_frequency is None:
        min_frequency = (cfg or PreprocessConfig()).min_corpus_frequency
    if not any(docs):
        raise DataError("cannot build a vocabulary: every document is empty")
    counts = Counter()
    order = {}
    for doc in docs:
        for tok in doc:
            counts[tok] += 1
            order.setdefault(tok, len(order))
    kept = sorted((t for t, c in counts.items() if c >= min_frequency), key=order.__getitem__)
    if not kept:
        top = counts.most_common(1)[0]
        raise DataError(
            f"vocabulary is empty after applying frequency floor {min_frequency} "
            f"(most frequent token '{top[0]}' occurs {top[1]} times)"
        )
    return Vocabulary(kept)


@dataclass
class CorpusMatrix:
    """Sparse document-term counts.

    ``rows[d]`` is a pair of int32 arrays ``(word_ids, counts)`` sorted by
    word id; documents with no in-vocabulary tokens have empty arrays.
    """

    rows: list
    vocab_size: int

    @property
    def n_docs(self):
        return len(self.rows)

    @property
    def doc_lengths(self):
        return np.array([int(c.sum()) for _, c in self.rows], dtype=np.int64)

    @property
    def empty_docs(self):
        return np.array([len(w) == 0 for w, _ in self.rows], dtype=bool)

    @property
    def total_tokens(self):
        return int(sum(int(c.sum()) for _, c in self.rows))

    def subset(self, indices):
        return CorpusMatrix([self.rows[i] for i in indices], self.vocab_size)

    def token_arrays(self):
        """Flatten to per-token ``(doc_ids, word_ids)`` int32 arrays."""
        doc_parts, word_parts = [], []
        for d, (w, c) in enumerate(self.rows):
            if len(w):
                word_parts.append(np.repeat(w, c))
                doc_parts.append(np.full(int(c.sum()), d, dtype=np.int32))
        if not word_parts:
            return np.zeros(0, np.int32), np.zeros(0, np.int32)
        return (
            np.concatenate(doc_parts).astype(np.int32),
            np.concatenate(word_parts).astype(np.int32),
        )

    @classmethod
    def from_counts(cls, rows, vocab_size):
        """Build from per-document ``{word_id: count}`` mappings or dense vectors."""
        out = []
        for row in rows:
            if isinstance(row, dict):
                items = sorted((w, c) for w, c in row.items() if c > 0)
            else:
                arr = np.asarray(row)
                nz = np.flatnonzero(arr)
                items = [(int(w), int(arr[w])) for w in nz]
            w = np.array([i for i, _ in items], dtype=np.int32)
            c = np.array([n for _, n in items], dtype=np.int32)
            out.append((w, c))
        return cls(out, vocab_size)


def to_matrix(docs, vocab):
    """Count in-vocabulary tokens per document; OOV tokens are dropped.

    Documents left empty are kept (see ``CorpusMatrix.empty_docs``).
    """
    lookup = vocab.token_to_id
    rows = []
    for doc in docs:
        counts = Counter(lookup[t] for t in doc if t in lookup)
        ids = np.array(sorted(counts), dtype=np.int32)
        rows.append((ids, np.array([counts[i] for i in ids.tolist()], dtype=np.int32)))
    matrix = CorpusMatrix(rows, vocab.size)
    n_empty = int(matrix.empty_docs.sum())
    if n_empty:
        logger.info("%d documents have no in-vocabulary tokens", n_empty)
    return matrix


def word_frequencies(docs, min_count=25, top=75):
    """``(token, count)`` pairs with count >= min_count, most frequent first,
    ties broken lexicographically, truncated to ``top``."""
    counts = Counter(t for doc in docs for t in doc)
    ranked = sorted(((t, c) for t, c in counts.items() if c >= min_count), key=lambda tc: (-tc[1], tc[0]))
    return ranked[:top]
