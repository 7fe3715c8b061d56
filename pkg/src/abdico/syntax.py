"""Tokenization, a shallow rule-based syntactic annotator, and per-token features.

The annotator is deliberately simple: a lexicon + suffix part-of-speech tagger
and a fixed attachment heuristic.  It only has to produce stable categorical
features for the token classifier, not linguistically faithful parses.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterator, Sequence, Union

if TYPE_CHECKING:
    from abdico.corpus import InstitutionalStatement

PUNCTUATION = frozenset(".,;:!?\"'()")
_NO_SPACE_BEFORE = frozenset(".,;:!?)")
_NO_SPACE_AFTER = frozenset("(")

TAGSET = ("NOUN", "VERB", "MODAL", "ADJ", "ADV", "DET", "ADP", "PRON", "NUM", "PUNCT", "OTHER")
RELATIONS = ("root", "aux", "det", "amod", "obj", "other")

MODALS = frozenset({"must", "will", "shall", "may", "can", "should", "might", "would"})

_DETERMINERS = frozenset(
    {"the", "a", "an", "this", "that", "these", "those", "each", "every", "all", "any",
     "no", "some", "its", "their", "his", "her", "our", "your", "both", "either", "neither"}
)
_PRONOUNS = frozenset(
    {"it", "they", "he", "she", "we", "you", "i", "them", "him", "us", "who", "whom",
     "which", "what", "itself", "themselves", "one", "someone", "anyone", "everyone"}
)
_ADPOSITIONS = frozenset(
    {"of", "in", "on", "at", "by", "for", "with", "to", "from", "into", "about", "before",
     "after", "during", "under", "over", "through", "within", "without", "upon", "via",
     "as", "per", "across", "among", "between", "against", "until", "onto", "towards"}
)
_CONJUNCTIONS = frozenset({"and", "or", "but", "nor", "if", "unless", "when", "while", "once", "whether", "so"})
_ADVERBS = frozenset(
    {"not", "never", "also", "only", "always", "then", "there", "here", "still", "already",
     "just", "very", "n't", "again", "otherwise", "promptly", "soon", "together"}
)
_ADJECTIVES = frozenset(
    {"new", "other", "own", "public", "private", "official", "formal", "final", "binding",
     "active", "open", "full", "incubating", "top-level", "separate", "sufficient",
     "relevant", "initial", "current", "regular", "monthly", "quarterly", "clear"}
)
_VERBS = frozenset(
    {"be", "is", "are", "was", "were", "been", "being", "am", "have", "has", "had", "do",
     "does", "did", "vote", "votes", "notify", "review", "approve", "approves", "report",
     "reports", "submit", "submits", "release", "sign", "include", "includes", "ensure",
     "ensures", "provide", "provides", "maintain", "elect", "graduate", "retire", "request",
     "announce", "publish", "discuss", "follow", "help", "guide", "monitor", "appoint",
     "nominate", "resign", "call", "hold", "send", "make", "take", "become", "remain",
     "accept", "reject", "consider", "assist", "oversee", "recommend", "mentor", "manage",
     "delegate", "file", "tag", "check", "verify", "create", "update", "invite",
     "welcome", "need", "needs", "require", "requires", "gets", "get", "keep", "run"}
)
_VERB_SUFFIXES = ("ed", "ing", "ize", "ise", "ify")
_ADJ_SUFFIXES = ("able", "ible", "ful", "ous", "ive", "less", "ic")
_ADV_SUFFIXES = ("ly",)
_NUMERIC = re.compile(r"^[+-]?\d[\d,.]*$")


@dataclass(frozen=True)
class SyntacticToken:
    index: int
    form: str
    lower: str
    pos: str
    head: int
    relation: str
    shape: str


FeatureVector = dict[str, float]


def _punctuation_split(chunk: str, start: int) -> list[tuple[str, int, int]]:
    lead: list[tuple[str, int, int]] = []
    trail: list[tuple[str, int, int]] = []
    lo, hi = 0, len(chunk)
    while lo < hi and chunk[lo] in PUNCTUATION:
        lead.append((chunk[lo], start + lo, start + lo + 1))
        lo += 1
    while hi > lo and chunk[hi - 1] in PUNCTUATION:
        trail.append((chunk[hi - 1], start + hi - 1, start + hi))
        hi -= 1
    core = [(chunk[lo:hi], start + lo, start + hi)] if hi > lo else []
    return lead + core + trail[::-1]


def token_offsets(text: str) -> list[tuple[str, int, int]]:
    """Tokenize ``text`` and return ``(token, start, end)`` character offsets."""
    out: list[tuple[str, int, int]] = []
    for match in re.finditer(r"\S+", text):
        out.extend(_punctuation_split(match.group(), match.start()))
    return out


def tokenize(statement: Union["InstitutionalStatement", str]) -> list[str]:
    """Split on whitespace and detach leading/trailing ``. , ; : ! ? " ' ( )``.

    Internal hyphens, slashes and punctuation are kept; case is never altered.

    >>> tokenize("The mentor must notify the community.")
    ['The', 'mentor', 'must', 'notify', 'the', 'community', '.']
    """
    text = statement if isinstance(statement, str) else statement.text
    return [tok for tok, _, _ in token_offsets(text)]


def detokenize(tokens: Sequence[str]) -> str:
    """Join tokens back into canonically spaced text.

    No space is inserted before ``. , ; : ! ? )`` or after ``(``.  Double
    quotes alternate between opening and closing; a lone apostrophe attaches
    to the preceding token.
    """
    parts: list[str] = []
    quote_open = False
    glue_next = False
    for tok in tokens:
        glue = glue_next or not parts
        glue_next = False
        if tok in _NO_SPACE_BEFORE or tok == "'":
            glue = True
        elif tok == '"':
            if quote_open:
                glue = True
            else:
                glue_next = True
            quote_open = not quote_open
        if tok in _NO_SPACE_AFTER:
            glue_next = True
        parts.append(tok if glue else " " + tok)
    return "".join(parts)


def word_shape(form: str) -> str:
    """Collapsed capitalization/digit shape, e.g. ``PMC-level`` -> ``X-x``."""
    out: list[str] = []
    for ch in form:
        if ch.isupper():
            c = "X"
        elif ch.islower():
            c = "x"
        elif ch.isdigit():
            c = "d"
        else:
            c = ch
        if not out or out[-1] != c:
            out.append(c)
    return "".join(out)


def _lexical_pos(lower: str) -> str | None:
    if all(ch in PUNCTUATION or not ch.isalnum() for ch in lower):
        return "PUNCT"
    if _NUMERIC.match(lower):
        return "NUM"
    if lower in MODALS:
        return "MODAL"
    if lower in _DETERMINERS:
        return "DET"
    if lower in _PRONOUNS:
        return "PRON"
    if lower in _ADPOSITIONS:
        return "ADP"
    if lower in _CONJUNCTIONS:
        return "OTHER"
    if lower in _ADVERBS:
        return "ADV"
    return None


def _open_class_pos(lower: str, prev_pos: str | None, prev_lower: str | None) -> str:
    if prev_pos == "MODAL" or prev_lower == "to":
        return "VERB"
    if lower in _ADJECTIVES or lower.endswith(_ADJ_SUFFIXES):
        return "ADJ"
    if prev_pos in ("DET", "ADJ", "NUM", "ADP"):
        return "NOUN"
    if lower in _VERBS or (len(lower) > 4 and lower.endswith(_VERB_SUFFIXES)):
        return "VERB"
    if len(lower) > 4 and lower.endswith(_ADV_SUFFIXES):
        return "ADV"
    return "NOUN"


def tag(tokens: Sequence[str]) -> list[str]:
    """Coarse part-of-speech tags from the fixed tagset."""
    tags: list[str] = []
    lowers = [t.lower() for t in tokens]
    for i, lower in enumerate(lowers):
        pos = _lexical_pos(lower)
        if pos is None:
            # look back past adverbs so "must not vote" still tags "vote" as VERB
            j = i - 1
            while j >= 0 and tags[j] == "ADV":
                j -= 1
            prev_pos = tags[j] if j >= 0 else None
            prev_lower = lowers[j] if j >= 0 else None
            pos = _open_class_pos(lower, prev_pos, prev_lower)
        tags.append(pos)
    return tags


def _choose_root(tags: Sequence[str]) -> int:
    # main verb: the first verb governed by a modal, else the first verb
    for i, t in enumerate(tags):
        if t == "MODAL":
            for j in range(i + 1, len(tags)):
                if tags[j] == "VERB":
                    return j
            break
    for preference in ("VERB", "MODAL", "NOUN"):
        if preference in tags:
            return tags.index(preference)
    for i, t in enumerate(tags):
        if t != "PUNCT":
            return i
    return 0


def _next_with(tags: Sequence[str], start: int, wanted: str) -> int | None:
    for j in range(start + 1, len(tags)):
        if tags[j] == wanted:
            return j
    return None


def annotate_syntax(tokens: Sequence[str]) -> list[SyntacticToken]:
    """Assign pos, head and relation to each token.

    The main verb is the root.  Determiners and adjectives attach to the
    nearest following noun, modals to the nearest following verb, and every
    other token to the root.  Since nouns and verbs always attach to the
    root directly, the head graph has depth at most two.
    """
    if not tokens:
        raise ValueError("annotate_syntax requires at least one token")
    tags = tag(tokens)
    root = _choose_root(tags)
    out: list[SyntacticToken] = []
    for i, (form, pos) in enumerate(zip(tokens, tags)):
        if i == root:
            head, rel = -1, "root"
        else:
            head, rel = root, "other"
            if pos in ("DET", "ADJ"):
                noun = _next_with(tags, i, "NOUN")
                if noun is not None and noun != i:
                    head, rel = noun, "det" if pos == "DET" else "amod"
            elif pos == "MODAL":
                verb = _next_with(tags, i, "VERB")
                head, rel = (verb if verb is not None else root), "aux"
            elif pos in ("NOUN", "PRON") and i > root:
                rel = "obj"
        out.append(SyntacticToken(i, form, form.lower(), pos, head, rel, word_shape(form)))
    return out


def iter_heads_to_root(tokens: Sequence[SyntacticToken], index: int) -> Iterator[int]:
    """Yield the chain of heads from ``index`` up to the root.

    Raises ``ValueError`` on a cycle.
    """
    seen = {index}
    cur = tokens[index].head
    while cur != -1:
        if cur in seen:
            raise ValueError(f"cycle in head graph at token {cur}")
        seen.add(cur)
        yield cur
        cur = tokens[cur].head


def featurize(tokens: Sequence[SyntacticToken], index: int) -> FeatureVector:
    """Sparse indicator features for the token at ``index``."""
    n = len(tokens)
    if not 0 <= index < n:
        raise IndexError(f"token index {index} out of range for {n} tokens")
    tok = tokens[index]
    feats: FeatureVector = {}

    def add(name: str, value: object) -> None:
        feats[f"{name}={value}"] = 1.0

    add("bias", "")
    add("w", tok.lower)
    add("suf3", tok.lower[-3:])
    add("pos", tok.pos)
    add("shape", tok.shape)
    add("rel", tok.relation)
    if tok.head == -1:
        add("headw", "<ROOT>")
        add("headpos", "<ROOT>")
        add("side", "root")
    else:
        head = tokens[tok.head]
        add("headw", head.lower)
        add("headpos", head.pos)
        root = next(t.index for t in tokens if t.head == -1)
        add("side", "left" if index < root else "right")
    for off in (1, 2):
        j = index - off
        add(f"prev{off}", tokens[j].lower if j >= 0 else "<S>")
        add(f"prev{off}pos", tokens[j].pos if j >= 0 else "<S>")
        j = index + off
        add(f"next{off}", tokens[j].lower if j < n else "</S>")
        add(f"next{off}pos", tokens[j].pos if j < n else "</S>")
    add("prev1pos+pos", f"{tokens[index - 1].pos if index else '<S>'}+{tok.pos}")
    add("ismodal", int(tok.lower in MODALS))
    if index == 0:
        add("posbucket", "first")
    elif index == n - 1:
        add("posbucket", "last")
    else:
        add("posbucket", "interior")
    return feats
