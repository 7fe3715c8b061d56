import json

import pytest
from hypothesis import given, strategies as st

from abdico.corpus import (
    CorpusError,
    InstitutionalStatement,
    build_corpus,
    load_corpus,
    load_gold,
    segment_statements,
    write_corpus,
    write_gold,
)
from abdico.labels import ComponentLabel
from abdico.synthetic import GUIDE_DOCUMENTS, asf_like


def _write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")


def test_fixture_manifest_counts(fixtures_dir):
    corpus = load_corpus(fixtures_dir / "asf_like.jsonl")
    assert len(corpus.documents) == 8
    assert list(corpus.counts().values()) == [45, 28, 61, 58, 36, 51, 22, 26]
    assert [d.title for d in corpus.documents][0] == "Apache Incubator Policy"


def test_bundled_fixture_matches_generator(fixtures_dir):
    corpus, gold = asf_like()
    loaded = load_corpus(fixtures_dir / "asf_like.jsonl")
    assert [s.text for s in loaded.statements] == [s.text for s in corpus.statements]
    assert load_gold(fixtures_dir / "gold.jsonl", loaded) == gold


def test_empty_file_gives_empty_corpus(tmp_path):
    p = tmp_path / "empty.jsonl"
    p.write_text("")
    corpus = load_corpus(p)
    assert len(corpus.documents) == 0 and len(corpus) == 0
    c = tmp_path / "empty.csv"
    c.write_text("")
    assert len(load_corpus(c)) == 0


def test_duplicate_statement_id_rejected(tmp_path):
    p = tmp_path / "dup.jsonl"
    _write_jsonl(p, [{"doc_id": "d", "statement_id": "s1", "text": "A must vote."},
                     {"doc_id": "d", "statement_id": "s1", "text": "B may vote."}])
    with pytest.raises(CorpusError, match="'s1'"):
        load_corpus(p)


def test_malformed_record_names_line(tmp_path):
    p = tmp_path / "bad.jsonl"
    p.write_text('{"doc_id": "d", "statement_id": "s1", "text": "ok."}\n{not json\n')
    with pytest.raises(CorpusError, match=":2:"):
        load_corpus(p)
    p.write_text('{"doc_id": "d", "text": "ok."}\n')
    with pytest.raises(CorpusError, match=":1: missing field.*statement_id"):
        load_corpus(p)


def test_csv_loading(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text('doc_id,statement_id,text\nd,s1,"Podlings, in turn, must report."\nd,s2,Mentors may help.\n')
    corpus = load_corpus(p)
    assert [s.statement_id for s in corpus.statements] == ["s1", "s2"]
    assert corpus["s1"].tokens[1] == ","
    p.write_text("doc_id,statement_id\nd,s1\n")
    with pytest.raises(CorpusError, match="text"):
        load_corpus(p)


@pytest.mark.parametrize("fmt", ["jsonl", "csv"])
def test_round_trip(tmp_path, fmt):
    corpus, gold = asf_like()
    p = tmp_path / f"c.{fmt}"
    write_corpus(corpus, p)
    again = load_corpus(p)
    assert [(s.statement_id, s.doc_id, s.text) for s in again.statements] == [
        (s.statement_id, s.doc_id, s.text) for s in corpus.statements
    ]
    assert [d.title for d in again.documents] == [t for _, t, _ in GUIDE_DOCUMENTS]
    g = tmp_path / f"g.{fmt}"
    write_gold(gold, g)
    assert load_gold(g, again) == gold


SEGMENTATION_CASES = [
    ("A must vote. B may abstain.", ["A must vote.", "B may abstain."]),
    ("", []),
    ("Podlings (i.e. new projects) must report.", ["Podlings (i.e. new projects) must report."]),
    ("No terminal", ["No terminal"]),
    ("Version 1.5 is out. Next.", ["Version 1.5 is out.", "Next."]),
    ("Why? Because!", ["Why?", "Because!"]),
    ("Mentors (see the guide. It helps) must act. Done.", ["Mentors (see the guide. It helps) must act.", "Done."]),
    ("One.\nTwo.", ["One.", "Two."]),
    ("  lead.  ", ["lead."]),
    ("Unbalanced) close. Next.", ["Unbalanced) close.", "Next."]),
    ("Nested ((a. b) c. d) e. f", ["Nested ((a. b) c. d) e.", "f"]),
]


@pytest.mark.parametrize("raw,expected", SEGMENTATION_CASES)
def test_segment_statements(raw, expected):
    out = segment_statements(raw, "doc")
    assert [s.text for s in out] == expected
    assert [s.statement_id for s in out] == [f"doc#{k}" for k in range(len(expected))]


@given(st.text(alphabet="ab .?!()\n", max_size=60))
def test_segmentation_idempotent(raw):
    for statement in segment_statements(raw, "d"):
        again = segment_statements(statement.text, "d")
        assert [s.text for s in again] == [statement.text]


def test_load_gold_alignment(tmp_path):
    corpus = build_corpus([InstitutionalStatement("s1", "d", "The mentor must notify the community.").tokenized()])
    g = tmp_path / "g.jsonl"
    _write_jsonl(g, [{"statement_id": "s1", "labels": ["A", "A", "D", "I", "B", "B", "NONE"]}])
    (ann,) = load_gold(g, corpus)
    assert ann.labels[2] is ComponentLabel.D

    _write_jsonl(g, [{"statement_id": "s1", "labels": ["A", "A", "D", "I", "B", "B"]}])
    with pytest.raises(CorpusError, match="'s1'"):
        load_gold(g, corpus)

    _write_jsonl(g, [{"statement_id": "s1", "labels": ["Z", "A", "D", "I", "B", "B", "NONE"]}])
    with pytest.raises(CorpusError) as err:
        load_gold(g, corpus)
    for name in ("A", "B", "D", "I", "C", "O", "NONE"):
        assert name in str(err.value)

    _write_jsonl(g, [{"statement_id": "nope", "labels": []}])
    with pytest.raises(CorpusError, match="unknown statement_id"):
        load_gold(g, corpus)


def test_statement_text_must_be_non_empty():
    with pytest.raises(CorpusError):
        InstitutionalStatement("s", "d", "   ")
