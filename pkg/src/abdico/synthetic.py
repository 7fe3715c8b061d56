"""Deterministic synthetic policy statements with gold ABDICO labels.

The bundled fixtures are produced here.  Statements are assembled from
labeled phrase pools, so every generated statement carries its exact gold
label sequence.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

from abdico.corpus import GoldAnnotation, InstitutionalStatement, build_corpus, Corpus, write_corpus, write_gold
from abdico.labels import ComponentLabel
from abdico.syntax import detokenize, tokenize

L = ComponentLabel

# (doc_id, title, statement count) per policy guide
GUIDE_DOCUMENTS = (
    ("incubator-policy", "Apache Incubator Policy", 45),
    ("community-guide", "Community Guide", 28),
    ("ppmc-guide", "PPMC Guide", 61),
    ("cookbook", "Apache Cookbook", 58),
    ("mentor-guide", "Mentor Guide", 36),
    ("graduation-guide", "Graduation Guide", 51),
    ("retirement-guide", "Retirement Guide", 22),
    ("release-guide", "Release Management Guide", 26),
)

# (phrase, plural)
AGENTS = {
    "Authority": [
        ("The mentor", False), ("Mentors", True), ("Each mentor", False),
        ("The IPMC", False), ("The ASF", False),
    ],
    "Participant": [
        ("The podling", False), ("Podlings", True), ("Each podling", False), ("The PPMC", False),
        ("A committer", False), ("Committers", True), ("The release manager", False),
        ("Contributors", True),
    ],
}
OBJECTS = {
    "Participants": ["the podling", "the community", "new committers", "the PPMC"],
    "ProjectManagement": ["the vote", "the release", "the quarterly report", "the records", "the dev list"],
    "Product": ["the source code", "the software", "the artifacts"],
    "ProductManagement": ["the trademark", "the license headers", "the roadmap"],
    "Authority": ["the IPMC", "the mentors", "the board"],
}
AIMS = [
    "notify", "review", "approve", "vote on", "report to", "sign", "publish", "announce",
    "discuss", "maintain", "update", "verify", "guide", "monitor", "inform", "contact", "check",
]
STATIVE_AIMS = ["responsible for", "expected to review", "required to sign"]
DEONTICS = {
    "Strong": ["must", "will", "shall"],
    "Weak": ["may", "should", "can"],
    "Proscriptive": ["must not", "will not", "should not"],
}
CONTEXTS = [
    "before graduation", "within 72 hours", "on the dev list", "each quarter", "during incubation",
    "after a release vote", "in a timely manner", "at least once a month", "prior to the release",
]
OR_ELSE = ["or the podling will be retired", "or else the release is rejected", "or the IPMC may intervene"]

# 12 agent strings and their hand partition into three groups
AGENT_FIXTURE = (
    "mentor", "mentors", "the mentor", "Mentors",
    "committer", "committers", "the committers", "a committer",
    "podling", "podlings", "the podling", "each podling",
)
AGENT_ORACLE = (
    frozenset({"mentor", "mentors", "the mentor", "Mentors"}),
    frozenset({"committer", "committers", "the committers", "a committer"}),
    frozenset({"podling", "podlings", "the podling", "each podling"}),
)

TAXONOMY_CONF = """\
# Agent and object categories for the synthetic ASF-like corpus.
# Keys are literal head nouns or cluster:<id>; values are category names.

[settings]
default = other

[agents]
mentor = Authority
ipmc = Authority
asf = Authority
podling = Participant
ppmc = Participant
committer = Participant
manager = Participant
contributor = Participant

[objects]
podling = Participants
community = Participants
committer = Participants
ppmc = Participants
vote = ProjectManagement
release = ProjectManagement
report = ProjectManagement
record = ProjectManagement
list = ProjectManagement
code = Product
software = Product
artifact = Product
trademark = ProductManagement
header = ProductManagement
roadmap = ProductManagement
ipmc = Authority
mentor = Authority
board = Authority
"""


@dataclass(frozen=True)
class Planted:
    """Ground truth for one generated statement."""

    statement_id: str
    agent_category: str
    deontic_class: str


def _lower_first(phrase: str) -> str:
    first = phrase.split()[0]
    if sum(ch.isupper() for ch in first) >= 2:
        return phrase
    return phrase[0].lower() + phrase[1:]


def _upper_first(phrase: str) -> str:
    return phrase[0].upper() + phrase[1:]


def _assemble(parts: Sequence[tuple[str, ComponentLabel]]) -> tuple[str, tuple[ComponentLabel, ...]]:
    tokens: list[str] = []
    labels: list[ComponentLabel] = []
    for phrase, label in parts:
        toks = tokenize(phrase)
        tokens.extend(toks)
        labels.extend([label] * len(toks))
    return detokenize(tokens), tuple(labels)


def _pick_weighted(rng: random.Random, table: Sequence[tuple[str, float]]) -> str:
    r = rng.random()
    acc = 0.0
    for name, w in table:
        acc += w
        if r < acc:
            return name
    return table[-1][0]


_DEONTIC_MIX = (("Strong", 0.5), ("Weak", 0.25), ("Proscriptive", 0.1), ("Stative", 0.15))
_AGENT_MIX = (("Participant", 0.65), ("Authority", 0.35))
_TEMPLATE_MIX = (("ADIB", 0.3), ("ADIBC", 0.35), ("CADIB", 0.2), ("ADIBCO", 0.15))


def make_statement(
    rng: random.Random,
    agent_category: str | None = None,
    deontic_class: str | None = None,
    template: str | None = None,
) -> tuple[str, tuple[ComponentLabel, ...], str, str]:
    """One statement: (text, gold labels, agent category, deontic class)."""
    agent_category = agent_category or _pick_weighted(rng, _AGENT_MIX)
    deontic_class = deontic_class or _pick_weighted(rng, _DEONTIC_MIX)
    template = template or _pick_weighted(rng, _TEMPLATE_MIX)

    agent, plural = rng.choice(AGENTS[agent_category])
    obj = rng.choice(OBJECTS[rng.choice(sorted(OBJECTS))])
    if deontic_class == "Stative":
        deontic = "are" if plural else "is"
        aim = rng.choice(STATIVE_AIMS)
    else:
        deontic = rng.choice(DEONTICS[deontic_class])
        aim = rng.choice(AIMS)
    context = rng.choice(CONTEXTS)
    or_else = rng.choice(OR_ELSE)

    core = [(deontic, L.D), (aim, L.I), (obj, L.B)]
    if template == "ADIB":
        parts = [(agent, L.A), *core, (".", L.NONE)]
    elif template == "ADIBC":
        parts = [(agent, L.A), *core, (context, L.C), (".", L.NONE)]
    elif template == "CADIB":
        parts = [(_upper_first(context), L.C), (",", L.NONE), (_lower_first(agent), L.A), *core, (".", L.NONE)]
    elif template == "ADIBCO":
        parts = [(agent, L.A), *core, (context, L.C), (",", L.NONE), (or_else, L.O), (".", L.NONE)]
    else:
        raise ValueError(f"unknown template {template!r}")
    text, labels = _assemble(parts)
    return text, labels, agent_category, deontic_class


def asf_like(seed: int = 2021) -> tuple[Corpus, list[GoldAnnotation]]:
    """Eight documents with the per-guide statement counts of the studied ASF corpus (328 total)."""
    rng = random.Random(seed)
    statements: list[InstitutionalStatement] = []
    gold: list[GoldAnnotation] = []
    titles = {}
    for doc_id, title, count in GUIDE_DOCUMENTS:
        titles[doc_id] = title
        for k in range(count):
            text, labels, _, _ = make_statement(rng)
            sid = f"{doc_id}#{k}"
            statements.append(InstitutionalStatement(sid, doc_id, text).tokenized())
            gold.append(GoldAnnotation(sid, labels))
    return build_corpus(statements, titles), gold


def template_corpus(n: int = 100, seed: int = 7) -> tuple[Corpus, list[GoldAnnotation]]:
    rng = random.Random(seed)
    statements, gold = [], []
    for k in range(n):
        text, labels, _, _ = make_statement(rng)
        sid = f"templates#{k}"
        statements.append(InstitutionalStatement(sid, "templates", text).tokenized())
        gold.append(GoldAnnotation(sid, labels))
    return build_corpus(statements, {"templates": "Synthetic template statements"}), gold


def planted_corpus(
    cells: dict[tuple[str, str], int], seed: int = 11, doc_id: str = "planted"
) -> tuple[Corpus, list[GoldAnnotation], list[Planted]]:
    """Statements with a fixed count per (agent category, deontic class) cell, shuffled."""
    rng = random.Random(seed)
    plan = [key for key in sorted(cells) for _ in range(cells[key])]
    rng.shuffle(plan)
    statements, gold, truth = [], [], []
    for k, (agent_cat, deontic_cls) in enumerate(plan):
        text, labels, _, _ = make_statement(rng, agent_cat, deontic_cls, template="ADIBC")
        sid = f"{doc_id}#{k}"
        statements.append(InstitutionalStatement(sid, doc_id, text).tokenized())
        gold.append(GoldAnnotation(sid, labels))
        truth.append(Planted(sid, agent_cat, deontic_cls))
    return build_corpus(statements), gold, truth


def data_dir() -> Path:
    return Path(str(resources.files("abdico") / "data"))


def write_fixtures(out_dir: str | Path) -> list[Path]:
    """Write the bundled fixture set into ``out_dir`` and return the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus, gold = asf_like()
    tcorpus, tgold = template_corpus()
    paths = {
        "asf_like.jsonl": lambda p: write_corpus(corpus, p),
        "gold.jsonl": lambda p: write_gold(gold, p),
        "templates.jsonl": lambda p: write_corpus(tcorpus, p),
        "templates_gold.jsonl": lambda p: write_gold(tgold, p),
        "taxonomy.conf": lambda p: p.write_text(TAXONOMY_CONF, encoding="utf-8"),
        "agents.txt": lambda p: p.write_text("\n".join(AGENT_FIXTURE) + "\n", encoding="utf-8"),
    }
    written = []
    for name, writer in paths.items():
        path = out / name
        writer(path)
        written.append(path)
    return written
