"""Per-token ABDICO labeling with an averaged perceptron, and span grouping."""

from __future__ import annotations

import hashlib
import json
import random
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from abdico.corpus import Corpus, GoldAnnotation, InstitutionalStatement
from abdico.labels import LABELS, ComponentLabel
from abdico.syntax import FeatureVector, SyntacticToken, annotate_syntax, detokenize, featurize

__all__ = [
    "ComponentLabel",
    "ComponentSpan",
    "ModelError",
    "TokenClassifierModel",
    "evaluate",
    "extract",
    "group_spans",
    "load_model",
    "predict",
    "save_model",
    "train",
]

MODEL_MAGIC = "# abdico-token-model v1"


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class ComponentSpan:
    statement_id: str
    label: ComponentLabel
    start: int
    end: int
    text: str

    def to_record(self) -> dict:
        return {
            "statement_id": self.statement_id,
            "label": self.label.value,
            "start": self.start,
            "end": self.end,
            "text": self.text,
        }

    @classmethod
    def from_record(cls, rec: Mapping) -> "ComponentSpan":
        return cls(str(rec["statement_id"]), ComponentLabel.parse(rec["label"]), int(rec["start"]), int(rec["end"]), str(rec["text"]))

    @property
    def ref(self) -> str:
        """Stable reference used by the clustering outputs."""
        return f"{self.statement_id}:{self.start}-{self.end}"


@dataclass(frozen=True)
class TokenClassifierModel:
    weights: dict[tuple[str, ComponentLabel], float]
    labels: tuple[ComponentLabel, ...] = LABELS
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        by_feature: dict[str, list[tuple[ComponentLabel, float]]] = defaultdict(list)
        for (feat, label), w in self.weights.items():
            if w != w or w in (float("inf"), float("-inf")):
                raise ModelError(f"non-finite weight for ({feat!r}, {label})")
            by_feature[feat].append((label, w))
        object.__setattr__(self, "_by_feature", dict(by_feature))

    def scores(self, features: FeatureVector) -> dict[ComponentLabel, float]:
        out = dict.fromkeys(self.labels, 0.0)
        table = self._by_feature  # type: ignore[attr-defined]
        for feat in sorted(features):
            value = features[feat]
            for label, w in table.get(feat, ()):
                out[label] += w * value
        return out

    def best(self, features: FeatureVector) -> ComponentLabel:
        scores = self.scores(features)
        best_label = self.labels[0]
        for label in self.labels[1:]:
            if scores[label] > scores[best_label]:
                best_label = label
        return best_label


def _as_syntax(tokens: Sequence[SyntacticToken] | Sequence[str]) -> list[SyntacticToken]:
    if tokens and isinstance(tokens[0], str):
        return annotate_syntax(tokens)  # type: ignore[arg-type]
    return list(tokens)  # type: ignore[arg-type]


def predict(model: TokenClassifierModel, tokens: Sequence[SyntacticToken] | Sequence[str]) -> list[ComponentLabel]:
    """Label every token by argmax score; ties go to the earliest label in A B D I C O NONE."""
    if not tokens:
        return []
    annotated = _as_syntax(tokens)
    return [model.best(featurize(annotated, i)) for i in range(len(annotated))]


def _aligned_examples(gold: Sequence[GoldAnnotation], corpus: Corpus) -> list[tuple[str, list[FeatureVector], tuple[ComponentLabel, ...]]]:
    examples = []
    for g in gold:
        if g.statement_id not in corpus:
            raise ModelError(f"gold statement_id {g.statement_id!r} not found in corpus")
        tokens = corpus[g.statement_id].tokenized().tokens
        if len(tokens) != len(g.labels):
            raise ModelError(
                f"alignment failure for statement_id {g.statement_id!r}: "
                f"{len(g.labels)} labels for {len(tokens)} tokens"
            )
        annotated = annotate_syntax(tokens)
        feats = [featurize(annotated, i) for i in range(len(annotated))]
        examples.append((g.statement_id, feats, g.labels))
    return examples


def gold_digest(gold: Sequence[GoldAnnotation], corpus: Corpus) -> str:
    h = hashlib.sha256()
    for g in gold:
        payload = [g.statement_id, list(corpus[g.statement_id].tokenized().tokens), [x.value for x in g.labels]]
        h.update(json.dumps(payload).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


def train(gold: Sequence[GoldAnnotation], corpus: Corpus, epochs: int = 10, seed: int = 42) -> TokenClassifierModel:
    """Train an averaged perceptron over per-token features.

    Statement order is reshuffled every epoch by a ``random.Random(seed)``
    stream, so the result depends only on (gold, epochs, seed).
    """
    if not gold:
        raise ModelError("cannot train on an empty gold set")
    if epochs < 1:
        raise ModelError(f"epochs must be positive, got {epochs}")
    examples = _aligned_examples(gold, corpus)

    weights: dict[tuple[str, ComponentLabel], float] = defaultdict(float)
    totals: dict[tuple[str, ComponentLabel], float] = defaultdict(float)
    stamps: dict[tuple[str, ComponentLabel], int] = defaultdict(int)
    step = 0

    def update(key: tuple[str, ComponentLabel], delta: float) -> None:
        totals[key] += (step - stamps[key]) * weights[key]
        stamps[key] = step
        weights[key] += delta

    rng = random.Random(seed)
    order = list(range(len(examples)))
    for _ in range(epochs):
        rng.shuffle(order)
        for idx in order:
            _, feats, labels = examples[idx]
            for fv, truth in zip(feats, labels):
                step += 1
                scores = dict.fromkeys(LABELS, 0.0)
                for feat in sorted(fv):
                    for label in LABELS:
                        w = weights.get((feat, label))
                        if w:
                            scores[label] += w * fv[feat]
                guess = LABELS[0]
                for label in LABELS[1:]:
                    if scores[label] > scores[guess]:
                        guess = label
                if guess != truth:
                    for feat, value in fv.items():
                        update((feat, truth), value)
                        update((feat, guess), -value)

    averaged: dict[tuple[str, ComponentLabel], float] = {}
    for key in sorted(weights, key=lambda k: (k[0], LABELS.index(k[1]))):
        total = totals[key] + (step - stamps[key]) * weights[key]
        avg = total / step
        if avg != 0.0:
            averaged[key] = avg
    meta = {
        "seed": str(seed),
        "epochs": str(epochs),
        "corpus_digest": gold_digest(gold, corpus),
        "statements": str(len(gold)),
    }
    return TokenClassifierModel(averaged, LABELS, meta)


def save_model(model: TokenClassifierModel, path: str | Path) -> None:
    """Write ``feature<TAB>label<TAB>weight`` lines after a metadata header.

    Weights are written with ``repr`` so reloading is bit-exact.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [MODEL_MAGIC, "# labels=" + ",".join(x.value for x in model.labels)]
    lines += [f"# {k}={v}" for k, v in sorted(model.metadata.items())]
    for (feat, label), w in sorted(model.weights.items(), key=lambda kv: (kv[0][0], LABELS.index(kv[0][1]))):
        lines.append(f"{feat}\t{label.value}\t{w!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> TokenClassifierModel:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"model file not found: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != MODEL_MAGIC:
        raise ModelError(f"{path}: not a model file (missing header {MODEL_MAGIC!r})")
    meta: dict[str, str] = {}
    labels = LABELS
    weights: dict[tuple[str, ComponentLabel], float] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            if key == "labels":
                labels = tuple(ComponentLabel.parse(x) for x in value.split(","))
            else:
                meta[key] = value
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ModelError(f"{path}:{lineno}: expected 3 tab-separated fields")
        weights[(parts[0], ComponentLabel.parse(parts[1]))] = float(parts[2])
    return TokenClassifierModel(weights, labels, meta)


def evaluate(model: TokenClassifierModel, gold: Sequence[GoldAnnotation], corpus: Corpus) -> dict:
    """Token accuracy plus per-label precision, recall and F1."""
    if not gold:
        raise ModelError("evaluation requires a non-empty held-out set")
    pairs: list[tuple[ComponentLabel, ComponentLabel]] = []
    for g in gold:
        pred = predict(model, list(corpus[g.statement_id].tokenized().tokens))
        if len(pred) != len(g.labels):
            raise ModelError(f"alignment failure for statement_id {g.statement_id!r}")
        pairs.extend(zip(g.labels, pred))
    return metrics_from_pairs(pairs)


def metrics_from_pairs(pairs: Iterable[tuple[ComponentLabel, ComponentLabel]]) -> dict:
    tp: dict[ComponentLabel, int] = defaultdict(int)
    fp: dict[ComponentLabel, int] = defaultdict(int)
    fn: dict[ComponentLabel, int] = defaultdict(int)
    correct = total = 0
    for truth, pred in pairs:
        total += 1
        if truth == pred:
            correct += 1
            tp[truth] += 1
        else:
            fp[pred] += 1
            fn[truth] += 1
    per_label = {}
    for label in LABELS:
        p_den = tp[label] + fp[label]
        r_den = tp[label] + fn[label]
        precision = tp[label] / p_den if p_den else 0.0
        recall = tp[label] / r_den if r_den else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_label[label.value] = {"precision": precision, "recall": recall, "f1": f1, "support": r_den}
    return {"token_accuracy": correct / total if total else 0.0, "tokens": total, "per_label": per_label}


def group_spans(labels: Sequence[ComponentLabel], tokens: Sequence[str], statement_id: str) -> list[ComponentSpan]:
    """Turn maximal runs of equal labels into spans, dropping NONE runs.

    >>> [s.label.value for s in group_spans([ComponentLabel.A, ComponentLabel.A, ComponentLabel.D], ["The", "mentor", "must"], "s")]
    ['A', 'D']
    """
    if len(labels) != len(tokens):
        raise ValueError(f"{statement_id}: {len(labels)} labels for {len(tokens)} tokens")
    spans: list[ComponentSpan] = []
    start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i] != labels[start]:
            label = ComponentLabel(labels[start])
            if label is not ComponentLabel.NONE:
                spans.append(ComponentSpan(statement_id, label, start, i, detokenize(tokens[start:i])))
            start = i
    return spans


def labels_from_spans(spans: Sequence[ComponentSpan], n: int) -> list[ComponentLabel]:
    """Rebuild a label sequence of length ``n``, filling gaps with NONE."""
    out = [ComponentLabel.NONE] * n
    for span in spans:
        out[span.start : span.end] = [span.label] * (span.end - span.start)
    return out


def extract(model: TokenClassifierModel, statements: Iterable[InstitutionalStatement]) -> list[ComponentSpan]:
    spans: list[ComponentSpan] = []
    for st in statements:
        tokens = list(st.tokenized().tokens)
        spans.extend(group_spans(predict(model, tokens), tokens, st.statement_id))
    return spans
