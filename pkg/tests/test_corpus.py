from collections import Counter
from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from protestdur.corpus import (
    CorpusMatrix,
    DurationClass,
    PreprocessConfig,
    RawRecord,
    Vocabulary,
    build_vocabulary,
    duration_days,
    ingest_csv,
    preprocess,
    smart_stopwords,
    to_matrix,
    word_frequencies,
)
from protestdur.errors import DataError

SCHEMA = {"text": "reason", "start": "start_date", "end": "end_date"}


def _rows(n, bad=()):
    lines = ["id,reason,start_date,end_date,province"]
    for i in range(n):
        text = "" if i in bad else f"residents protest number {i}"
        lines.append(f"{i},{text},2013-02-01,2013-02-0{1 + i % 3},Gauteng")
    return "\n".join(lines) + "\n"


def test_ingest_drops_incomplete_rows(write_csv):
    path = write_csv(_rows(876, bad={5, 400, 870}))
    records, dropped = ingest_csv(path, SCHEMA)
    assert len(records) == 873
    assert dropped == 3
    assert records[0].extra == {"id": "0", "province": "Gauteng"}


def test_ingest_header_only(write_csv):
    records, dropped = ingest_csv(write_csv("reason,start_date,end_date\n"), SCHEMA)
    assert records == [] and dropped == 0


def test_ingest_rejects_end_before_start(write_csv):
    path = write_csv("reason,start_date,end_date\nstrike at the mine,2013-02-05,2013-02-01\n")
    records, dropped = ingest_csv(path, SCHEMA)
    assert records == [] and dropped == 1


def test_ingest_missing_column_is_named(write_csv):
    path = write_csv("reason,start_date\nx,2013-01-01\n")
    with pytest.raises(DataError, match="end_date"):
        ingest_csv(path, SCHEMA)


def test_ingest_unreadable_file(tmp_path):
    with pytest.raises(DataError):
        ingest_csv(tmp_path / "nope.csv", SCHEMA)


def test_ingest_date_format_and_ids(write_csv):
    path = write_csv("rid,reason,s,e\n17,march,01/02/2013,03/02/2013\n")
    records, _ = ingest_csv(path, {"text": "reason", "start": "s", "end": "e", "id": "rid"}, "%d/%m/%Y")
    assert records[0].id == 17
    assert duration_days(records[0]).days == 2


def _rec(start, end):
    return RawRecord(0, "x", start, end)


@pytest.mark.parametrize(
    "start, end, days, cls",
    [
        (date(2013, 2, 1), date(2013, 2, 1), 0, DurationClass.SHORT_LIVED),
        (date(2013, 2, 1), date(2013, 2, 2), 1, DurationClass.EXTENDED),
        (date(2013, 2, 1), date(2013, 4, 7), 65, DurationClass.EXTENDED),
    ],
)
def test_duration_days(start, end, days, cls):
    label = duration_days(_rec(start, end))
    assert label.days == days and label.cls == cls


@given(st.dates(min_value=date(1990, 1, 1), max_value=date(2030, 1, 1)),
       st.integers(0, 100), st.integers(-3000, 3000))
def test_duration_translation_invariant(start, length, shift):
    a = duration_days(_rec(start, start + timedelta(days=length)))
    b = duration_days(_rec(start + timedelta(days=shift), start + timedelta(days=shift + length)))
    assert a == b
    assert (a.cls == DurationClass.SHORT_LIVED) == (a.days == 0)


def test_preprocess_examples():
    assert preprocess("residence and residing") == ["resid", "resid"]
    assert preprocess("") == []
    # "the"/"between" are stopwords; "R-47" loses punctuation and digits, leaving "r" (too short)
    assert preprocess("blockaded the R-47 between") == ["blockad"]


def test_preprocess_options():
    cfg = PreprocessConfig(stem=False, stopword_list=frozenset(), min_token_length=1)
    assert preprocess("Don't stop, 2 go!", cfg) == ["dont", "stop", "go"]
    cfg = PreprocessConfig(lowercase=False, stem=False, stopword_list=frozenset())
    assert preprocess("ANC members", cfg) == ["ANC", "members"]


def test_smart_list_contents():
    stop = smart_stopwords()
    assert {"the", "and", "between", "a"} <= stop
    assert len(stop) == 570


def test_config_validation():
    with pytest.raises(ValueError):
        PreprocessConfig(min_token_length=0)
    with pytest.raises(ValueError):
        PreprocessConfig(min_corpus_frequency=0)


_words = st.text(alphabet="abcdefghijklmnopqrstuvwxyz -,.0123!", max_size=80)


@settings(max_examples=200)
@given(_words)
def test_preprocess_idempotent_without_stemming(text):
    # Porter stemming is not idempotent (agreed -> agre -> agr); every other stage is
    cfg = PreprocessConfig(stem=False)
    tokens = preprocess(text, cfg)
    assert preprocess(" ".join(tokens), cfg) == tokens


def test_stemming_breaks_idempotence():
    once = preprocess("agreed")
    assert once == ["agre"]
    assert preprocess(" ".join(once)) == ["agr"]


def test_build_vocabulary_floor():
    docs = [["a", "b"], ["a"]]
    v = build_vocabulary(docs, min_frequency=2)
    assert v.size == 1 and v.token_to_id == {"a": 0}
    assert build_vocabulary(docs, min_frequency=1).size == 2


def test_build_vocabulary_first_appearance_order():
    v = build_vocabulary([["c", "a"], ["b", "a", "c"]], min_frequency=1)
    assert v.id_to_token == ["c", "a", "b"]


def test_build_vocabulary_errors():
    with pytest.raises(DataError):
        build_vocabulary([[], []], min_frequency=1)
    with pytest.raises(DataError, match="frequency floor"):
        build_vocabulary([["a"]], min_frequency=2)


@given(st.lists(st.lists(st.sampled_from("abcdefgh"), max_size=10), min_size=1, max_size=10))
def test_vocabulary_bijective(docs):
    if not any(docs):
        return
    v = build_vocabulary(docs, min_frequency=1)
    for i in range(v.size):
        assert v.token_to_id[v.id_to_token[i]] == i
    assert sorted(v.token_to_id.values()) == list(range(v.size))


def test_to_matrix_counts():
    vocab = Vocabulary(["a", "b"])
    m = to_matrix([["a", "a", "b"], ["zzz", "q"]], vocab)
    w, c = m.rows[0]
    assert w.tolist() == [0, 1] and c.tolist() == [2, 1]
    assert m.doc_lengths.tolist() == [3, 0]
    assert m.empty_docs.tolist() == [False, True]


def test_to_matrix_keeps_every_document(write_csv):
    path = write_csv(_rows(876, bad={5, 400, 870}))
    records, _ = ingest_csv(path, SCHEMA)
    docs = [preprocess(r.text) for r in records]
    m = to_matrix(docs, build_vocabulary(docs, min_frequency=1))
    assert m.n_docs == 873


@given(st.lists(st.lists(st.sampled_from("abcdefgh"), max_size=12), min_size=1, max_size=8),
       st.integers(1, 3))
def test_matrix_totals_match_single_pass_count(docs, floor):
    counts = Counter(t for d in docs for t in d)
    if not any(c >= floor for c in counts.values()):
        return
    vocab = build_vocabulary(docs, min_frequency=floor)
    m = to_matrix(docs, vocab)
    surviving = sum(1 for d in docs for t in d if counts[t] >= floor)
    assert m.total_tokens == surviving
    for w, c in m.rows:
        assert (c >= 1).all() and (w < vocab.size).all()


def test_token_arrays_round_trip():
    m = CorpusMatrix.from_counts([{0: 2, 3: 1}, {}, {1: 1}], 4)
    d, w = m.token_arrays()
    assert d.tolist() == [0, 0, 0, 2]
    assert w.tolist() == [0, 0, 3, 1]
    assert np.array_equal(m.doc_lengths, [3, 0, 1])


def test_word_frequencies_order_and_truncation():
    docs = [["b"] * 3 + ["a"] * 3 + ["c"] * 5 + ["d"]]
    assert word_frequencies(docs, min_count=3, top=2) == [("c", 5), ("a", 3)]
    assert word_frequencies(docs, min_count=10, top=75) == []
