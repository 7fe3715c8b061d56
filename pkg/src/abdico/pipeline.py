"""Pipeline stages: ingest, train, extract, cluster, analyze, report.

Every stage reads its inputs from the run directory (or the configured
input paths) and writes its outputs back there, so stages can be run one at
a time or chained.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from collections import Counter
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

from abdico.classifier import ComponentSpan, extract, load_model, save_model, train
from abdico.clustering import NOISE, ClusterAssignment, cluster_texts
from abdico.corpus import Corpus, load_corpus, load_gold, write_corpus
from abdico.labels import ComponentLabel
from abdico.report import RunReport, write_report
from abdico.stats import AnalysisRecord, ChiSquareError, chi_square, crosstab, histogram, top_k_filter
from abdico.taxonomy import OTHER, CategoryMap, categorize_component, classify_deontic, load_taxonomy

log = logging.getLogger(__name__)

STAGES = ("ingest", "train", "extract", "cluster", "analyze", "report")
OBJECT_TEST_ROWS = ("Authority", "Participants")

CORPUS_FILE = "corpus.jsonl"
SPANS_FILE = "spans.jsonl"
RECORDS_FILE = "records.jsonl"
ANALYSIS_FILE = "analysis.json"
CLUSTER_FILES = {
    "agent": ("clusters/agents.jsonl", "clusters/agent_topics.jsonl"),
    "object": ("clusters/objects.jsonl", "clusters/object_topics.jsonl"),
}
KIND_LABEL = {"agent": ComponentLabel.A, "object": ComponentLabel.B}


class StageError(RuntimeError):
    """A stage cannot run; the message names what is missing."""


@dataclass
class PipelineConfig:
    out: str = "runs/latest"
    corpus: str | None = None
    gold: str | None = None
    model: str | None = None
    taxonomy: str | None = None
    format: str | None = None
    seed: int = 42
    epochs: int = 10
    min_cluster_size: int = 2
    distance_threshold: float = 0.6
    embed_dim: int = 256
    top_k: int = 3

    @property
    def out_dir(self) -> Path:
        return Path(self.out)

    @property
    def model_path(self) -> Path:
        return Path(self.model) if self.model else self.out_dir / "model.tsv"

    def validate(self) -> None:
        if self.min_cluster_size < 2:
            raise StageError(f"--min-cluster-size must be >= 2, got {self.min_cluster_size}")
        if not 0.0 < self.distance_threshold < 2.0:
            raise StageError(f"--distance-threshold must lie in (0, 2), got {self.distance_threshold}")
        if self.embed_dim < 1:
            raise StageError(f"--embed-dim must be positive, got {self.embed_dim}")
        if self.top_k < 1:
            raise StageError(f"--top-k must be >= 1, got {self.top_k}")
        if self.epochs < 1:
            raise StageError(f"--epochs must be positive, got {self.epochs}")
        for name in ("corpus", "gold", "taxonomy"):
            value = getattr(self, name)
            if value is not None and not Path(value).is_file():
                raise StageError(f"--{name} file not found: {value}")

    def replayable(self) -> dict:
        """Config as recorded in run.json; the output directory itself is left out."""
        data = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "out"}
        model = self.model_path
        try:
            data["model"] = model.relative_to(self.out_dir).as_posix()
        except ValueError:
            data["model"] = str(model)
        return data


def _sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _require(path: Path, what: str, hint: str) -> Path:
    if not path.exists():
        raise StageError(f"missing {what}: {path} ({hint})")
    return path


def _write_jsonl(path: Path, rows: Iterable[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def _read_jsonl(path: Path) -> list[dict]:
    with path.open(encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def run_corpus(cfg: PipelineConfig) -> Corpus:
    ingested = cfg.out_dir / CORPUS_FILE
    if ingested.exists():
        return load_corpus(ingested, "jsonl")
    if cfg.corpus is None:
        raise StageError(f"missing corpus: {ingested} (run 'ingest' or pass --corpus)")
    return load_corpus(cfg.corpus, cfg.format)


def stage_ingest(cfg: PipelineConfig) -> Corpus:
    if cfg.corpus is None:
        raise StageError("ingest needs --corpus")
    corpus = load_corpus(cfg.corpus, cfg.format)
    write_corpus(corpus, cfg.out_dir / CORPUS_FILE, "jsonl")
    log.info("ingested %d statements from %d documents", len(corpus), len(corpus.documents))
    return corpus


def stage_train(cfg: PipelineConfig):
    if cfg.gold is None:
        raise StageError("train needs --gold")
    corpus = run_corpus(cfg)
    gold = load_gold(cfg.gold, corpus, cfg.format)
    model = train(gold, corpus, epochs=cfg.epochs, seed=cfg.seed)
    save_model(model, cfg.model_path)
    log.info("trained on %d statements; model written to %s", len(gold), cfg.model_path)
    return model


def stage_extract(cfg: PipelineConfig) -> list[ComponentSpan]:
    model_path = _require(cfg.model_path, "model file", "run 'train' first or pass --model")
    model = load_model(model_path)
    corpus = run_corpus(cfg)
    spans = extract(model, corpus.statements)
    _write_jsonl(cfg.out_dir / SPANS_FILE, (s.to_record() for s in spans))
    log.info("extracted %d component spans", len(spans))
    return spans


def read_spans(cfg: PipelineConfig) -> list[ComponentSpan]:
    path = _require(cfg.out_dir / SPANS_FILE, "extraction output", "run 'extract' first")
    return [ComponentSpan.from_record(r) for r in _read_jsonl(path)]


def stage_cluster(cfg: PipelineConfig) -> dict[str, ClusterAssignment | None]:
    spans = read_spans(cfg)
    out: dict[str, ClusterAssignment | None] = {}
    for kind, (assign_file, topic_file) in CLUSTER_FILES.items():
        members = [s for s in spans if s.label is KIND_LABEL[kind]]
        if members:
            assignment = cluster_texts(
                [s.text for s in members],
                refs=[s.ref for s in members],
                min_cluster_size=cfg.min_cluster_size,
                distance_threshold=cfg.distance_threshold,
                dim=cfg.embed_dim,
            )
        else:
            assignment = None
        out[kind] = assignment
        items = assignment.items if assignment else ()
        _write_jsonl(cfg.out_dir / assign_file, ({"component_ref": r, "cluster_id": c} for r, c in items))
        topics = sorted(assignment.topics.items()) if assignment else []
        _write_jsonl(
            cfg.out_dir / topic_file,
            ({"cluster_id": cid, "terms": [[t, s] for t, s in terms]} for cid, terms in topics),
        )
    return out


def read_assignment(cfg: PipelineConfig, kind: str) -> dict[str, object]:
    path = _require(cfg.out_dir / CLUSTER_FILES[kind][0], f"{kind} cluster output", "run 'cluster' first")
    return {r["component_ref"]: r["cluster_id"] for r in _read_jsonl(path)}


def build_records(
    corpus: Corpus,
    spans: Sequence[ComponentSpan],
    cmap: CategoryMap,
    assignments: dict[str, dict[str, object]],
) -> tuple[list[AnalysisRecord], Counter]:
    """One record per statement from its first agent, object and deontic span."""
    first: dict[tuple[str, ComponentLabel], ComponentSpan] = {}
    for s in spans:
        first.setdefault((s.statement_id, s.label), s)
    exclusions: Counter = Counter()
    for kind, assignment in assignments.items():
        exclusions[f"{kind}_noise"] = sum(1 for cid in assignment.values() if cid == NOISE)
    records = []
    for st in corpus.statements:
        cats: dict[str, str | None] = {}
        for kind, label in KIND_LABEL.items():
            span = first.get((st.statement_id, label))
            if span is None:
                exclusions[f"{kind}_missing"] += 1
                cats[kind] = None
                continue
            cat = categorize_component(span, assignments.get(kind, {}), cmap, kind)
            if cat == OTHER:
                exclusions[f"{kind}_other_bucket"] += 1
                cats[kind] = None
            else:
                cats[kind] = cat
        d_span = first.get((st.statement_id, ComponentLabel.D))
        if d_span is None:
            exclusions["deontic_missing"] += 1
        records.append(
            AnalysisRecord(
                statement_id=st.statement_id,
                doc_id=st.doc_id,
                agent_category=cats["agent"],
                object_category=cats["object"],
                deontic_class=classify_deontic(d_span.text).value if d_span else None,
                deontic_text=d_span.text.lower() if d_span else None,
            )
        )
    for key in ("agent_missing", "object_missing", "agent_other_bucket", "object_other_bucket", "deontic_missing"):
        exclusions.setdefault(key, 0)
    return records, exclusions


def analyze(
    corpus: Corpus,
    spans: Sequence[ComponentSpan],
    records: Sequence[AnalysisRecord],
    exclusions: Counter,
    top_k: int,
) -> RunReport:
    label_counts = {label.value: 0 for label in ComponentLabel if label is not ComponentLabel.NONE}
    for s in spans:
        label_counts[s.label.value] += 1
    hists = {key: histogram(records, key) for key in ("doc_id", "agent_category", "object_category", "deontic_class")}

    agent_deontic = crosstab(records, "agent_category", "deontic_class")
    object_deontic = crosstab(records, "object_category", "deontic_class")
    tables = {
        "agent_deontic": agent_deontic,
        "object_deontic": object_deontic,
        "agent_object": crosstab(records, "agent_category", "object_category"),
        "agent_deontic_topk": top_k_filter(agent_deontic, "cols", top_k) if agent_deontic.cols else agent_deontic,
    }
    obj_sub = object_deontic.select(rows=OBJECT_TEST_ROWS)
    tables["object_deontic_topk"] = top_k_filter(obj_sub, "cols", top_k) if obj_sub.cols else obj_sub

    tests = {}
    skipped = {}
    for name, table_name in (("agent_deontic", "agent_deontic_topk"), ("object_deontic", "object_deontic_topk")):
        if not any(r.deontic_class for r in records):
            tests[name] = None
            skipped[name] = "no deontic spans"
            continue
        try:
            tests[name] = chi_square(tables[table_name])
        except ChiSquareError as exc:
            tests[name] = None
            skipped[name] = str(exc)
    return RunReport(
        corpus_digest=corpus.digest(),
        statements=len(corpus),
        label_counts=label_counts,
        histograms=hists,
        crosstabs=tables,
        tests=tests,
        skipped=skipped,
        exclusions=dict(sorted(exclusions.items())),
    )


def stage_analyze(cfg: PipelineConfig) -> RunReport:
    if cfg.taxonomy is None:
        raise StageError("analyze needs --taxonomy")
    cmap = load_taxonomy(cfg.taxonomy)
    corpus = run_corpus(cfg)
    spans = read_spans(cfg)
    assignments = {kind: read_assignment(cfg, kind) for kind in CLUSTER_FILES}
    records, exclusions = build_records(corpus, spans, cmap, assignments)
    _write_jsonl(cfg.out_dir / RECORDS_FILE, (r.to_dict() for r in records))
    report = analyze(corpus, spans, records, exclusions, cfg.top_k)
    (cfg.out_dir / ANALYSIS_FILE).write_text(report.to_json(), encoding="utf-8", newline="\n")
    return report


def stage_report(cfg: PipelineConfig) -> RunReport:
    path = _require(cfg.out_dir / ANALYSIS_FILE, "analysis output", "run 'analyze' first")
    report = RunReport.from_json(path.read_text(encoding="utf-8"))
    report.config = cfg.replayable()
    report.inputs = {
        name: {"path": getattr(cfg, name), "sha256": _sha256(getattr(cfg, name))}
        for name in ("corpus", "gold", "taxonomy")
        if getattr(cfg, name) is not None
    }
    return write_report(report, cfg.out_dir)


STAGE_FUNCS = {
    "ingest": stage_ingest,
    "train": stage_train,
    "extract": stage_extract,
    "cluster": stage_cluster,
    "analyze": stage_analyze,
    "report": stage_report,
}


def run_stage(name: str, cfg: PipelineConfig) -> None:
    cfg.validate()
    if name == "all":
        missing = [f"--{n}" for n in ("corpus", "gold", "taxonomy") if getattr(cfg, n) is None]
        if cfg.gold is None and cfg.model_path.exists():
            missing.remove("--gold")
        if missing:
            raise StageError(f"'all' needs {', '.join(missing)}")
        for stage in STAGES:
            if stage == "train" and cfg.gold is None:
                continue
            STAGE_FUNCS[stage](cfg)
        return
    if name not in STAGE_FUNCS:
        raise StageError(f"unknown stage {name!r}")
    STAGE_FUNCS[name](cfg)


def config_from_sources(file_values: dict, flag_values: dict, environ: dict | None = None) -> PipelineConfig:
    """Merge config-file values, then flags; ``IG_SEED`` fills in a missing seed."""
    environ = os.environ if environ is None else environ
    known = {f.name for f in fields(PipelineConfig)}
    unknown = set(file_values) - known
    if unknown:
        raise StageError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    merged = {**file_values, **{k: v for k, v in flag_values.items() if v is not None}}
    if "seed" not in merged and environ.get("IG_SEED"):
        try:
            merged["seed"] = int(environ["IG_SEED"])
        except ValueError:
            raise StageError(f"IG_SEED must be an integer, got {environ['IG_SEED']!r}") from None
    return PipelineConfig(**merged)


def config_dict(cfg: PipelineConfig) -> dict:
    return asdict(cfg)
