"""Config-driven mapping of agent/object components to high-level categories,
and strength classes for deontic spans."""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping

from abdico.classifier import ComponentSpan
from abdico.clustering import NOISE, ClusterAssignment, ClusterId
from abdico.labels import ComponentLabel
from abdico.syntax import annotate_syntax, tokenize

OTHER = "Other"


class TaxonomyError(ValueError):
    pass


class UnmappedComponentError(LookupError):
    pass


class AgentCategory(str, Enum):
    Authority = "Authority"
    Participant = "Participant"


class ObjectCategory(str, Enum):
    ProductManagement = "ProductManagement"
    ProjectManagement = "ProjectManagement"
    Authority = "Authority"
    Product = "Product"
    Participants = "Participants"


class DeonticClass(str, Enum):
    Strong = "Strong"
    Weak = "Weak"
    Proscriptive = "Proscriptive"
    Stative = "Stative"
    Other = "Other"


class DefaultPolicy(str, Enum):
    ERROR = "error"
    OTHER = "other"


KINDS = {"agent": (AgentCategory, ComponentLabel.A), "object": (ObjectCategory, ComponentLabel.B)}


@dataclass(frozen=True)
class CategoryMap:
    agent_rules: Mapping[str, AgentCategory] = field(default_factory=dict)
    object_rules: Mapping[str, ObjectCategory] = field(default_factory=dict)
    default: DefaultPolicy = DefaultPolicy.OTHER

    def rules(self, kind: str) -> Mapping[str, Enum]:
        if kind == "agent":
            return self.agent_rules
        if kind == "object":
            return self.object_rules
        raise ValueError(f"kind must be 'agent' or 'object', got {kind!r}")


def _norm_category(name: str) -> str:
    return re.sub(r"[\s_-]+", "", name).lower()


def parse_category(kind: str, name: str) -> Enum:
    enum = KINDS[kind][0]
    wanted = _norm_category(name)
    for member in enum:
        if _norm_category(member.value) == wanted:
            return member
    valid = ", ".join(m.value for m in enum)
    raise TaxonomyError(f"unknown {kind} category {name!r}; expected one of {{{valid}}}")


def _parse_key(key: str) -> str:
    key = key.strip().lower()
    if key.startswith("cluster:"):
        ident = key.split(":", 1)[1].strip()
        if not ident.isdigit():
            raise TaxonomyError(f"cluster rule {key!r} needs a non-negative integer id")
        return f"cluster:{int(ident)}"
    return key


def load_taxonomy(path: str | Path) -> CategoryMap:
    """Read ``[agents]`` / ``[objects]`` sections of ``key = Category`` lines.

    Keys are ``cluster:<id>`` or a literal head noun.  An optional
    ``[settings]`` section may set ``default = error`` or ``default = other``.
    """
    parser = configparser.ConfigParser(delimiters=("=",), strict=True, interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise TaxonomyError(f"{path}: duplicate key: {exc}") from None
    except configparser.Error as exc:
        raise TaxonomyError(f"{path}: {exc}") from None

    unknown = set(parser.sections()) - {"agents", "objects", "settings"}
    if unknown:
        raise TaxonomyError(f"{path}: unknown section(s) {sorted(unknown)}")

    out: dict[str, dict[str, Enum]] = {"agent": {}, "object": {}}
    for section, kind in (("agents", "agent"), ("objects", "object")):
        if not parser.has_section(section):
            continue
        for raw_key, value in parser.items(section):
            key = _parse_key(raw_key)
            if key in out[kind]:
                raise TaxonomyError(f"{path}: duplicate key {key!r} in [{section}]")
            out[kind][key] = parse_category(kind, value)

    default = DefaultPolicy.OTHER
    if parser.has_option("settings", "default"):
        raw = parser.get("settings", "default").strip().lower()
        try:
            default = DefaultPolicy(raw)
        except ValueError:
            raise TaxonomyError(f"{path}: default policy must be 'error' or 'other', got {raw!r}") from None
    return CategoryMap(out["agent"], out["object"], default)  # type: ignore[arg-type]


def head_noun(text: str) -> str | None:
    """Lowercased head noun of a noun phrase: the last noun before any preposition."""
    tokens = tokenize(text) if text.strip() else []
    if not tokens:
        return None
    annotated = annotate_syntax(tokens)
    candidate = None
    for tok in annotated:
        if tok.pos in ("ADP", "OTHER") and candidate is not None:
            break
        if tok.pos in ("NOUN", "PRON"):
            candidate = tok.lower
    if candidate is None:
        words = [t.lower for t in annotated if any(ch.isalpha() for ch in t.form)]
        candidate = words[-1] if words else None
    return candidate


def _literal_candidates(text: str) -> list[str]:
    noun = head_noun(text)
    if noun is None:
        return []
    out = [noun]
    if noun.endswith("s") and len(noun) > 3:
        out.append(noun[:-1])
    return out


def categorize_component(
    span: ComponentSpan,
    assignment: ClusterAssignment | Mapping[str, ClusterId] | None,
    cmap: CategoryMap,
    kind: str,
) -> str:
    """Category for an agent (A) or object (B) span.

    Lookup order: ``cluster:<id>`` rule, then literal head-noun rule (with a
    naive plural fallback), then the map's default policy.  Returns the
    category value, or ``"Other"`` under the Other-bucket policy.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be 'agent' or 'object', got {kind!r}")
    expected = KINDS[kind][1]
    if span.label is not expected:
        raise ValueError(f"{kind} categorization needs a {expected.value} span, got {span.label.value}")
    rules = cmap.rules(kind)

    cid: ClusterId | None = None
    if assignment is not None:
        lookup = assignment.as_dict() if isinstance(assignment, ClusterAssignment) else assignment
        cid = lookup.get(span.ref)
    if cid is not None and cid != NOISE:
        hit = rules.get(f"cluster:{cid}")
        if hit is not None:
            return hit.value
    for literal in _literal_candidates(span.text):
        hit = rules.get(literal)
        if hit is not None:
            return hit.value
    if cmap.default is DefaultPolicy.ERROR:
        raise UnmappedComponentError(
            f"unmapped {kind} component {span.text!r} ({span.ref}, cluster {cid})"
        )
    return OTHER


_MODALS = ("must", "will", "shall", "may", "can", "should", "might", "could", "would")
_STRONG = frozenset({"must", "will", "shall"})
_WEAK = frozenset({"may", "can", "should", "might", "could"})
_STATIVE = frozenset({"is", "are", "be", "been"})
_NEGATORS = frozenset({"not", "never", "n't"})
_CONTRACTIONS = {"won't": ["will", "n't"], "can't": ["can", "n't"], "cannot": ["can", "not"], "shan't": ["shall", "n't"]}


def _deontic_words(text: str) -> list[str]:
    words: list[str] = []
    for w in re.findall(r"[a-z']+", text.lower()):
        w = w.strip("'") if w not in ("n't",) else w
        if w in _CONTRACTIONS:
            words.extend(_CONTRACTIONS[w])
        elif w.endswith("n't") and len(w) > 3:
            words.extend([w[:-3], "n't"])
        elif w:
            words.append(w)
    return words


def classify_deontic(text: str) -> DeonticClass:
    """Strength class of a deontic span.

    A negator next to a modal makes it Proscriptive; otherwise the first
    modal decides Strong or Weak; a bare form of *be* is Stative.
    """
    words = _deontic_words(text)
    modal_set = frozenset(_MODALS)
    for i, w in enumerate(words):
        if w in _NEGATORS:
            if (i > 0 and words[i - 1] in modal_set) or (i + 1 < len(words) and words[i + 1] in modal_set):
                return DeonticClass.Proscriptive
    head = next((w for w in words if w in modal_set), None)
    if head in _STRONG:
        return DeonticClass.Strong
    if head in _WEAK:
        return DeonticClass.Weak
    if head is None and any(w in _STATIVE for w in words):
        return DeonticClass.Stative
    return DeonticClass.Other
