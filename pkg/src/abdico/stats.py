"""Histograms, crosstabs and Pearson chi-square tests over analysis records."""

from __future__ import annotations

import csv
import io
import logging
import math
from collections import Counter
from dataclasses import dataclass, fields
from typing import Callable, Iterable, Optional, Sequence, Union

log = logging.getLogger(__name__)

Key = Union[str, Callable[["AnalysisRecord"], Optional[str]]]

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


class ChiSquareError(ValueError):
    pass


@dataclass(frozen=True)
class AnalysisRecord:
    statement_id: str
    doc_id: Optional[str] = None
    agent_category: Optional[str] = None
    object_category: Optional[str] = None
    deontic_class: Optional[str] = None
    deontic_text: Optional[str] = None

    def __post_init__(self) -> None:
        if all(getattr(self, f.name) is None for f in fields(self) if f.name != "statement_id"):
            raise ValueError(f"record {self.statement_id!r} carries no fields")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


RECORD_KEYS = tuple(f.name for f in fields(AnalysisRecord) if f.name != "statement_id")


def _selector(key: Key) -> Callable[[AnalysisRecord], Optional[str]]:
    if callable(key):
        return key
    if key not in RECORD_KEYS:
        raise KeyError(f"unknown record key {key!r}; expected one of {RECORD_KEYS}")
    return lambda rec: getattr(rec, key)


def histogram(records: Iterable[AnalysisRecord], key: Key) -> list[tuple[str, int]]:
    """Counts of present values, largest first, ties alphabetical."""
    get = _selector(key)
    counts = Counter(str(v) for v in map(get, records) if v is not None)
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


@dataclass(frozen=True)
class ContingencyTable:
    rows: tuple[str, ...]
    cols: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if len(self.counts) != len(self.rows) or any(len(r) != len(self.cols) for r in self.counts):
            raise ValueError("counts shape does not match labels")
        if any(c < 0 for r in self.counts for c in r):
            raise ValueError("negative cell count")

    @property
    def n(self) -> int:
        return sum(sum(r) for r in self.counts)

    def row_totals(self) -> list[int]:
        return [sum(r) for r in self.counts]

    def col_totals(self) -> list[int]:
        return [sum(r[j] for r in self.counts) for j in range(len(self.cols))]

    def cell(self, row: str, col: str) -> int:
        return self.counts[self.rows.index(row)][self.cols.index(col)]

    def select(self, rows: Sequence[str] | None = None, cols: Sequence[str] | None = None) -> "ContingencyTable":
        """Sub-table restricted to the given labels (unknown labels are ignored), order preserved."""
        ri = [i for i, r in enumerate(self.rows) if rows is None or r in rows]
        ci = [j for j, c in enumerate(self.cols) if cols is None or c in cols]
        return ContingencyTable(
            tuple(self.rows[i] for i in ri),
            tuple(self.cols[j] for j in ci),
            tuple(tuple(self.counts[i][j] for j in ci) for i in ri),
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["", *self.cols])
        for label, row in zip(self.rows, self.counts):
            writer.writerow([label, *row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ContingencyTable":
        reader = list(csv.reader(io.StringIO(text)))
        if not reader:
            return cls((), (), ())
        header, body = reader[0], reader[1:]
        return cls(
            tuple(r[0] for r in body),
            tuple(header[1:]),
            tuple(tuple(int(x) for x in r[1:]) for r in body),
        )


def crosstab(records: Iterable[AnalysisRecord], row_key: Key, col_key: Key) -> ContingencyTable:
    """Count records where both fields are present; labels sorted."""
    get_r, get_c = _selector(row_key), _selector(col_key)
    pairs = Counter()
    for rec in records:
        r, c = get_r(rec), get_c(rec)
        if r is not None and c is not None:
            pairs[(str(r), str(c))] += 1
    rows = tuple(sorted({r for r, _ in pairs}))
    cols = tuple(sorted({c for _, c in pairs}))
    counts = tuple(tuple(pairs.get((r, c), 0) for c in cols) for r in rows)
    return ContingencyTable(rows, cols, counts)


def top_k_filter(table: ContingencyTable, axis: str, k: int) -> ContingencyTable:
    """Keep the ``k`` labels with the largest marginals on ``axis`` (ties alphabetical)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if axis not in ("rows", "cols"):
        raise ValueError(f"axis must be 'rows' or 'cols', got {axis!r}")
    labels = table.rows if axis == "rows" else table.cols
    if k >= len(labels):
        return table
    totals = table.row_totals() if axis == "rows" else table.col_totals()
    ranked = sorted(zip(labels, totals), key=lambda lt: (-lt[1], lt[0]))
    keep = {label for label, _ in ranked[:k]}
    return table.select(rows=keep) if axis == "rows" else table.select(cols=keep)


# Regularized incomplete gamma


def _lower_series(a: float, x: float) -> float:
    """P(a, x) by its power series; converges fast for x < a + 1."""
    ap = a
    term = total = 1.0 / a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_continued_fraction(a: float, x: float) -> float:
    """Q(a, x) by modified Lentz evaluation of the continued fraction; for x >= a + 1."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammaincc(a: float, x: float) -> float:
    """Upper regularized incomplete gamma function Q(a, x)."""
    if a <= 0:
        raise ValueError(f"shape must be positive, got {a}")
    if x < 0:
        raise ValueError(f"x must be non-negative, got {x}")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return min(1.0, max(0.0, 1.0 - _lower_series(a, x)))
    return min(1.0, max(0.0, _upper_continued_fraction(a, x)))


def chi2_sf(statistic: float, df: int) -> float:
    """Upper-tail probability of the chi-square distribution."""
    if df < 1:
        raise ValueError(f"df must be positive, got {df}")
    return gammaincc(df / 2.0, statistic / 2.0)


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    df: int
    p_value: float
    n: int

    def line(self) -> str:
        return f"chi2={self.statistic:.6g} df={self.df} p={self.p_value:.6g} N={self.n}"

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "df": self.df, "p_value": self.p_value, "n": self.n}


def drop_empty(table: ContingencyTable) -> ContingencyTable:
    rows = [r for r, t in zip(table.rows, table.row_totals()) if t > 0]
    cols = [c for c, t in zip(table.cols, table.col_totals()) if t > 0]
    dropped_r = len(table.rows) - len(rows)
    dropped_c = len(table.cols) - len(cols)
    if dropped_r or dropped_c:
        log.warning("dropping %d zero-marginal row(s) and %d column(s) before chi-square", dropped_r, dropped_c)
    return table.select(rows=rows, cols=cols)


def chi_square(table: ContingencyTable) -> ChiSquareResult:
    """Pearson chi-square independence test, without continuity correction."""
    table = drop_empty(table)
    r, c = len(table.rows), len(table.cols)
    if r < 2 or c < 2:
        raise ChiSquareError(f"degenerate table ({r}x{c} after dropping empty margins); need at least 2x2")
    n = table.n
    row_t, col_t = table.row_totals(), table.col_totals()
    stat = 0.0
    for i in range(r):
        for j in range(c):
            expected = row_t[i] * col_t[j] / n
            stat += (table.counts[i][j] - expected) ** 2 / expected
    df = (r - 1) * (c - 1)
    return ChiSquareResult(stat, df, chi2_sf(stat, df), n)
