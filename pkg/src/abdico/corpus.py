"""Policy corpora: loading, writing, sentence segmentation and gold labels."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from abdico.labels import ComponentLabel
from abdico.syntax import tokenize

FORMATS = ("jsonl", "csv")
STATEMENT_FIELDS = ("doc_id", "statement_id", "text")


class CorpusError(ValueError):
    """Raised for malformed corpus or annotation input."""


@dataclass(frozen=True)
class InstitutionalStatement:
    statement_id: str
    doc_id: str
    text: str
    tokens: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise CorpusError(f"statement {self.statement_id!r} has empty text")

    def tokenized(self) -> "InstitutionalStatement":
        if self.tokens:
            return self
        return replace(self, tokens=tuple(tokenize(self.text)))


@dataclass(frozen=True)
class PolicyDocument:
    doc_id: str
    title: str
    statements: tuple[InstitutionalStatement, ...]


@dataclass(frozen=True)
class GoldAnnotation:
    statement_id: str
    labels: tuple[ComponentLabel, ...]


@dataclass(frozen=True)
class Corpus:
    documents: tuple[PolicyDocument, ...] = ()
    _index: dict[str, InstitutionalStatement] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        seen_docs: set[str] = set()
        for doc in self.documents:
            if doc.doc_id in seen_docs:
                raise CorpusError(f"duplicate doc_id {doc.doc_id!r}")
            seen_docs.add(doc.doc_id)
            for st in doc.statements:
                if st.statement_id in self._index:
                    raise CorpusError(f"duplicate statement_id {st.statement_id!r}")
                self._index[st.statement_id] = st

    @property
    def statements(self) -> list[InstitutionalStatement]:
        return [st for doc in self.documents for st in doc.statements]

    def __len__(self) -> int:
        return len(self._index)

    def __getitem__(self, statement_id: str) -> InstitutionalStatement:
        return self._index[statement_id]

    def __contains__(self, statement_id: object) -> bool:
        return statement_id in self._index

    def counts(self) -> dict[str, int]:
        return {doc.doc_id: len(doc.statements) for doc in self.documents}

    def digest(self) -> str:
        h = hashlib.sha256()
        for st in self.statements:
            h.update(json.dumps([st.doc_id, st.statement_id, st.text]).encode("utf-8"))
            h.update(b"\n")
        return h.hexdigest()


def _infer_format(path: Path, fmt: str | None) -> str:
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    if fmt not in FORMATS:
        raise CorpusError(f"unsupported format {fmt!r}; expected one of {FORMATS}")
    return fmt


def _read_records(path: Path, fmt: str, required: Sequence[str]) -> Iterator[tuple[int, dict]]:
    """Yield ``(line_number, record)`` pairs, validating required fields."""
    text = path.read_text(encoding="utf-8")
    if fmt == "jsonl":
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from None
            if not isinstance(rec, dict):
                raise CorpusError(f"{path}:{lineno}: record is not an object")
            missing = [k for k in required if k not in rec]
            if missing:
                raise CorpusError(f"{path}:{lineno}: missing field(s) {', '.join(missing)}")
            yield lineno, rec
    else:
        reader = csv.DictReader(io.StringIO(text, newline=""))
        if reader.fieldnames is None:
            return
        missing = [k for k in required if k not in reader.fieldnames]
        if missing:
            raise CorpusError(f"{path}:1: CSV header missing field(s) {', '.join(missing)}")
        for rec in reader:
            lineno = reader.line_num
            if None in rec or any(rec[k] is None for k in required):
                raise CorpusError(f"{path}:{lineno}: wrong number of CSV fields")
            yield lineno, rec


def build_corpus(statements: Iterable[InstitutionalStatement], titles: dict[str, str] | None = None) -> Corpus:
    """Group statements into documents in order of first appearance."""
    titles = titles or {}
    grouped: dict[str, list[InstitutionalStatement]] = {}
    for st in statements:
        grouped.setdefault(st.doc_id, []).append(st)
    docs = tuple(
        PolicyDocument(doc_id, titles.get(doc_id, doc_id), tuple(sts)) for doc_id, sts in grouped.items()
    )
    return Corpus(docs)


def load_corpus(path: str | Path, format: str | None = None) -> Corpus:
    """Load statements from JSONL or CSV, preserving file order.

    Each record needs ``doc_id``, ``statement_id`` and ``text``; an optional
    ``title`` names the parent document.  Statements come back tokenized.
    """
    path = Path(path)
    fmt = _infer_format(path, format)
    seen: dict[str, int] = {}
    statements: list[InstitutionalStatement] = []
    titles: dict[str, str] = {}
    for lineno, rec in _read_records(path, fmt, STATEMENT_FIELDS):
        sid = str(rec["statement_id"])
        if sid in seen:
            raise CorpusError(f"{path}:{lineno}: duplicate statement_id {sid!r} (first seen on line {seen[sid]})")
        seen[sid] = lineno
        text = str(rec["text"])
        if not text.strip():
            raise CorpusError(f"{path}:{lineno}: empty text for statement_id {sid!r}")
        doc_id = str(rec["doc_id"])
        if rec.get("title"):
            titles.setdefault(doc_id, str(rec["title"]))
        statements.append(InstitutionalStatement(sid, doc_id, text).tokenized())
    return build_corpus(statements, titles)


def write_corpus(corpus: Corpus, path: str | Path, format: str | None = None) -> None:
    path = Path(path)
    fmt = _infer_format(path, format)
    rows = [
        {"doc_id": st.doc_id, "statement_id": st.statement_id, "text": st.text, "title": doc.title}
        for doc in corpus.documents
        for st in doc.statements
    ]
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "jsonl":
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            for row in rows:
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    else:
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=[*STATEMENT_FIELDS, "title"], lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)


_TERMINALS = ".!?"


def segment_statements(raw_text: str, doc_id: str) -> list[InstitutionalStatement]:
    """Split raw policy text into statements with ids ``doc_id#k``.

    A boundary is a ``.``, ``!`` or ``?`` followed by whitespace (or the end
    of the text), outside any parentheses.
    """
    pieces: list[str] = []
    depth = 0
    start = 0
    n = len(raw_text)
    for i, ch in enumerate(raw_text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth = max(0, depth - 1)
        elif ch in _TERMINALS and depth == 0 and (i + 1 == n or raw_text[i + 1].isspace()):
            pieces.append(raw_text[start : i + 1])
            start = i + 1
    pieces.append(raw_text[start:])
    texts = [p.strip() for p in pieces if p.strip()]
    return [InstitutionalStatement(f"{doc_id}#{k}", doc_id, t).tokenized() for k, t in enumerate(texts)]


def load_gold(path: str | Path, corpus: Corpus, format: str | None = None) -> list[GoldAnnotation]:
    """Load per-token gold labels and check them against the corpus tokenization.

    In CSV files the ``labels`` column holds space-separated label strings.
    """
    path = Path(path)
    fmt = _infer_format(path, format)
    out: list[GoldAnnotation] = []
    seen: set[str] = set()
    for lineno, rec in _read_records(path, fmt, ("statement_id", "labels")):
        sid = str(rec["statement_id"])
        if sid not in corpus:
            raise CorpusError(f"{path}:{lineno}: unknown statement_id {sid!r}")
        if sid in seen:
            raise CorpusError(f"{path}:{lineno}: duplicate annotation for statement_id {sid!r}")
        seen.add(sid)
        raw = rec["labels"]
        if isinstance(raw, str):
            raw = raw.split()
        if not isinstance(raw, list):
            raise CorpusError(f"{path}:{lineno}: labels must be a list")
        try:
            labels = tuple(ComponentLabel.parse(str(x)) for x in raw)
        except ValueError as exc:
            raise CorpusError(f"{path}:{lineno}: {exc}") from None
        ntok = len(corpus[sid].tokenized().tokens)
        if len(labels) != ntok:
            raise CorpusError(
                f"{path}:{lineno}: statement_id {sid!r} has {len(labels)} labels for {ntok} tokens"
            )
        out.append(GoldAnnotation(sid, labels))
    return out


def write_gold(gold: Iterable[GoldAnnotation], path: str | Path, format: str | None = None) -> None:
    path = Path(path)
    fmt = _infer_format(path, format)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "jsonl":
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            for g in gold:
                fh.write(json.dumps({"statement_id": g.statement_id, "labels": [str(x) for x in g.labels]}) + "\n")
    else:
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["statement_id", "labels"])
            for g in gold:
                writer.writerow([g.statement_id, " ".join(str(x) for x in g.labels)])
