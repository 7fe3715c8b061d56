"""SVG bar charts, crosstab rendering and the consolidated run report."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from abdico.stats import ChiSquareResult, ContingencyTable

SVG_WIDTH = 640
SVG_HEIGHT = 420
_PLOT_TOP = 40
_PLOT_HEIGHT = 300
_PLOT_LEFT = 60
_PLOT_RIGHT = 20


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def render_histogram(histogram: Sequence[tuple[str, int]], title: str) -> str:
    """Bar chart as a standalone SVG document; the tallest bar fills the plot height."""
    if not histogram:
        raise ValueError("cannot render an empty histogram")
    peak = max(count for _, count in histogram) or 1
    plot_w = SVG_WIDTH - _PLOT_LEFT - _PLOT_RIGHT
    slot = plot_w / len(histogram)
    bar_w = slot * 0.7
    base = _PLOT_TOP + _PLOT_HEIGHT
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" '
        f'viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">',
        f'<title>{escape(title)}</title>',
        f'<text x="{SVG_WIDTH / 2:.1f}" y="24" text-anchor="middle" font-size="16">{escape(title)}</text>',
        f'<line class="axis" x1="{_PLOT_LEFT}" y1="{base}" x2="{SVG_WIDTH - _PLOT_RIGHT}" y2="{base}" stroke="black"/>',
        f'<line class="axis" x1="{_PLOT_LEFT}" y1="{_PLOT_TOP}" x2="{_PLOT_LEFT}" y2="{base}" stroke="black"/>',
        f'<text x="16" y="{_PLOT_TOP + _PLOT_HEIGHT / 2:.1f}" transform="rotate(-90 16 {_PLOT_TOP + _PLOT_HEIGHT / 2:.1f})" '
        f'text-anchor="middle" font-size="12">count</text>',
        f'<text x="{_PLOT_LEFT - 6}" y="{_PLOT_TOP + 4}" text-anchor="end" font-size="10">{peak}</text>',
        f'<text x="{_PLOT_LEFT - 6}" y="{base + 4}" text-anchor="end" font-size="10">0</text>',
    ]
    for i, (label, count) in enumerate(histogram):
        h = _PLOT_HEIGHT * count / peak
        x = _PLOT_LEFT + i * slot + (slot - bar_w) / 2
        lines.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(base - h)}" width="{_fmt(bar_w)}" height="{_fmt(h)}" '
            f'fill="#4c72b0" data-label="{escape(str(label), {chr(34): "&quot;"})}" data-count="{count}"/>'
        )
        cx = x + bar_w / 2
        lines.append(
            f'<text x="{_fmt(cx)}" y="{base + 16}" text-anchor="middle" font-size="11">{escape(str(label))}</text>'
        )
        lines.append(f'<text x="{_fmt(cx)}" y="{_fmt(base - h - 4)}" text-anchor="middle" font-size="10">{count}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_crosstab(table: ContingencyTable) -> tuple[str, str]:
    """Plain-text table with row/column totals, plus the bare counts as CSV."""
    csv_text = table.to_csv()
    header = ["", *table.cols]
    if not table.rows and not table.cols:
        return " | ".join(header).strip() + "\n", csv_text
    header.append("Total")
    body = [[r, *map(str, counts), str(sum(counts))] for r, counts in zip(table.rows, table.counts)]
    body.append(["Total", *map(str, table.col_totals()), str(table.n)])
    grid = [header, *body]
    widths = [max(len(row[j]) for row in grid) for j in range(len(header))]
    out = []
    for k, row in enumerate(grid):
        out.append(" | ".join(cell.ljust(widths[j]) if j == 0 else cell.rjust(widths[j]) for j, cell in enumerate(row)))
        if k == 0:
            out.append("-+-".join("-" * w for w in widths))
    return "\n".join(out) + "\n", csv_text


@dataclass
class RunReport:
    corpus_digest: str
    statements: int
    label_counts: dict[str, int]
    histograms: dict[str, list[tuple[str, int]]]
    crosstabs: dict[str, ContingencyTable]
    tests: dict[str, ChiSquareResult | None]
    skipped: dict[str, str] = field(default_factory=dict)
    exclusions: dict[str, int] = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "corpus_digest": self.corpus_digest,
            "statements": self.statements,
            "label_counts": self.label_counts,
            "histograms": {k: [list(x) for x in v] for k, v in self.histograms.items()},
            "crosstabs": {k: asdict(t) for k, t in self.crosstabs.items()},
            "tests": {k: (v.to_dict() if v else None) for k, v in self.tests.items()},
            "skipped": self.skipped,
            "exclusions": self.exclusions,
            "config": self.config,
            "inputs": self.inputs,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        data = json.loads(text)
        return cls(
            corpus_digest=data["corpus_digest"],
            statements=data["statements"],
            label_counts=data["label_counts"],
            histograms={k: [(a, b) for a, b in v] for k, v in data["histograms"].items()},
            crosstabs={
                k: ContingencyTable(tuple(t["rows"]), tuple(t["cols"]), tuple(tuple(r) for r in t["counts"]))
                for k, t in data["crosstabs"].items()
            },
            tests={k: (ChiSquareResult(v["statistic"], v["df"], v["p_value"], v["n"]) if v else None) for k, v in data["tests"].items()},
            skipped=data.get("skipped", {}),
            exclusions=data.get("exclusions", {}),
            config=data.get("config", {}),
            inputs=data.get("inputs", {}),
        )


HISTOGRAM_TITLES = {
    "agent_category": "Institutional statements by agent category",
    "object_category": "Institutional statements by object category",
    "deontic_class": "Deontic strength",
    "doc_id": "Statements per policy document",
    "labels": "Extracted components per ABDICO label",
}
TEST_TITLES = {
    "agent_deontic": "Agent category x deontic (top-k deontics)",
    "object_deontic": "Object category (authority vs participants) x deontic (top-k deontics)",
}


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _md_histogram(hist: Sequence[tuple[str, int]]) -> list[str]:
    if not hist:
        return ["(empty)", ""]
    lines = ["| label | count |", "|---|---:|"]
    lines += [f"| {label} | {count} |" for label, count in hist]
    return lines + [""]


def write_report(report: RunReport, out_dir: str | Path) -> RunReport:
    """Write report.md, tables/*.csv, charts/*.svg and run.json under ``out_dir``.

    Files are regenerated wholesale; identical reports give identical bytes.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc

    label_hist = sorted(report.label_counts.items(), key=lambda kv: (-kv[1], kv[0]))
    md = [
        "# Institutional grammar run report",
        "",
        f"- corpus digest: `{report.corpus_digest}`",
        f"- statements: {report.statements}",
        "",
        "## Components per ABDICO label",
        "",
        *_md_histogram(label_hist),
    ]
    if any(count for _, count in label_hist):
        _write(out / "charts" / "labels.svg", render_histogram(label_hist, HISTOGRAM_TITLES["labels"]))
        md += ["![labels](charts/labels.svg)", ""]

    for key, hist in report.histograms.items():
        md += [f"## {HISTOGRAM_TITLES.get(key, key)}", ""]
        md += _md_histogram(hist)
        if hist:
            _write(out / "charts" / f"{key}.svg", render_histogram(hist, HISTOGRAM_TITLES.get(key, key)))
            md += [f"![{key}](charts/{key}.svg)", ""]

    for name, table in report.crosstabs.items():
        text, csv_text = render_crosstab(table)
        _write(out / "tables" / f"{name}.csv", csv_text)
        md += [f"## Crosstab: {name}", "", "```", text.rstrip("\n"), "```", ""]

    md += ["## Chi-square tests", ""]
    for name, result in report.tests.items():
        title = TEST_TITLES.get(name, name)
        if result is None:
            md.append(f"- {title}: skipped ({report.skipped.get(name, 'not run')})")
        else:
            md.append(f"- {title}: `{result.line()}`")
    md.append("")

    md += ["## Exclusions", ""]
    md += [f"- {k}: {v}" for k, v in sorted(report.exclusions.items())]
    md.append("")

    _write(out / "report.md", "\n".join(md))
    _write(out / "run.json", report.to_json())
    return report
