"""Embed component texts, group them into topics with a noise bucket, and name the topics.

The default backend is deterministic: hashed character trigrams for the
embedding and average-linkage agglomeration on cosine distance for the
grouping.  Any ``Embedder`` returning unit-norm (or all-zero) vectors can be
plugged in instead.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

NOISE = "NOISE"
DEFAULT_DIM = 256
DEFAULT_MIN_CLUSTER_SIZE = 2
DEFAULT_DISTANCE_THRESHOLD = 0.6

ClusterId = Union[int, str]
Embedder = Callable[[str], "EmbeddingVector"]

_FNV_OFFSET = 0x811C9DC5
_FNV_PRIME = 0x01000193
_NON_ALNUM = re.compile(r"[^0-9a-z]+")


class ClusteringError(ValueError):
    pass


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray
    text: str = ""

    def __post_init__(self) -> None:
        self.values.setflags(write=False)


def fnv1a_32(data: bytes) -> int:
    """32-bit FNV-1a hash; stable across processes, unlike ``hash()``."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFF
    return h


def normalize_text(text: str) -> str:
    """Lowercase, turn every non-alphanumeric run into one space, and strip."""
    return _NON_ALNUM.sub(" ", text.lower()).strip()


def char_trigrams(text: str) -> list[str]:
    norm = normalize_text(text)
    if not norm:
        return []
    padded = f" {norm} "
    return [padded[i : i + 3] for i in range(len(padded) - 2)]


def embed(text: str, dim: int = DEFAULT_DIM) -> EmbeddingVector:
    """Hashed character-trigram counts, L2-normalized.

    Each trigram of the padded, normalized text goes to bucket
    ``fnv1a_32(trigram.encode()) % dim``.  Empty or punctuation-only text
    gives the zero vector.
    """
    vec = np.zeros(dim, dtype=np.float64)
    for gram in char_trigrams(text):
        vec[fnv1a_32(gram.encode("utf-8")) % dim] += 1.0
    norm = float(np.sqrt(vec @ vec))
    if norm > 0:
        vec /= norm
    return EmbeddingVector(vec, text)


def cosine_distance_matrix(vectors: Sequence[EmbeddingVector]) -> np.ndarray:
    """Pairwise ``1 - cos``; zero vectors are at distance 1 from everything but themselves."""
    mat = np.vstack([v.values for v in vectors])
    norms = np.linalg.norm(mat, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    unit = mat / safe[:, None]
    dist = 1.0 - unit @ unit.T
    np.clip(dist, 0.0, 2.0, out=dist)
    np.fill_diagonal(dist, 0.0)
    return dist


@dataclass(frozen=True)
class ClusterAssignment:
    """Cluster ids per input item (``NOISE`` for the noise bucket) plus optional topic terms."""

    items: tuple[tuple[str, ClusterId], ...]
    min_cluster_size: int
    topics: dict[int, tuple[tuple[str, float], ...]] = field(default_factory=dict)

    @property
    def labels(self) -> list[ClusterId]:
        return [cid for _, cid in self.items]

    def cluster_of(self, ref: str) -> ClusterId:
        for r, cid in self.items:
            if r == ref:
                return cid
        raise KeyError(ref)

    def as_dict(self) -> dict[str, ClusterId]:
        return dict(self.items)

    def members(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for i, (_, cid) in enumerate(self.items):
            if cid != NOISE:
                out.setdefault(int(cid), []).append(i)
        return out

    def noise_count(self) -> int:
        return sum(1 for _, cid in self.items if cid == NOISE)


def _agglomerate(dist: np.ndarray, threshold: float) -> list[list[int]]:
    """Average-linkage merging while the closest pair is within ``threshold``.

    Ties go to the pair whose smallest member indices are lowest.
    """
    n = dist.shape[0]
    groups: list[list[int]] = [[i] for i in range(n)]
    active = list(range(n))
    d = dist.astype(np.float64).copy()
    np.fill_diagonal(d, np.inf)
    while len(active) > 1:
        sub = d[np.ix_(active, active)]
        flat = int(np.argmin(sub))  # row-major: first hit has the lowest (i, j)
        a, b = divmod(flat, len(active))
        if sub[a, b] > threshold:
            break
        i, j = active[a], active[b]
        if j < i:
            i, j = j, i
        ni, nj = len(groups[i]), len(groups[j])
        # Lance-Williams update for average linkage
        merged = (ni * d[i] + nj * d[j]) / (ni + nj)
        d[i, :] = merged
        d[:, i] = merged
        d[i, i] = np.inf
        d[j, :] = np.inf
        d[:, j] = np.inf
        groups[i] = sorted(groups[i] + groups[j])
        groups[j] = []
        active.remove(j)
    return [groups[i] for i in active]


def cluster(
    vectors: Sequence[EmbeddingVector],
    min_cluster_size: int = DEFAULT_MIN_CLUSTER_SIZE,
    distance_threshold: float = DEFAULT_DISTANCE_THRESHOLD,
    refs: Sequence[str] | None = None,
) -> ClusterAssignment:
    """Group vectors by average-linkage cosine agglomeration.

    Merging stops once the closest pair of groups is farther apart than
    ``distance_threshold``.  Groups smaller than ``min_cluster_size`` go to
    the noise bucket.  Surviving clusters are numbered 0, 1, ... in order of
    their smallest member index, so the ids are canonical.
    """
    if not vectors:
        raise ClusteringError("cluster requires at least one vector")
    if isinstance(min_cluster_size, bool) or not isinstance(min_cluster_size, int) or min_cluster_size < 2:
        raise ClusteringError(f"min_cluster_size must be an integer >= 2, got {min_cluster_size!r}")
    if not 0.0 < distance_threshold < 2.0:
        raise ClusteringError(f"distance_threshold must lie in (0, 2), got {distance_threshold!r}")
    if refs is None:
        refs = [str(i) for i in range(len(vectors))]
    if len(refs) != len(vectors):
        raise ClusteringError("refs and vectors differ in length")

    groups = _agglomerate(cosine_distance_matrix(vectors), distance_threshold)
    kept = sorted((g for g in groups if len(g) >= min_cluster_size), key=lambda g: g[0])
    ids: list[ClusterId] = [NOISE] * len(vectors)
    for cid, group in enumerate(kept):
        for i in group:
            ids[i] = cid
    return ClusterAssignment(tuple(zip(refs, ids)), min_cluster_size)


def canonical_partition(texts: Sequence[str], assignment: ClusterAssignment) -> tuple[frozenset, frozenset]:
    """Order-free view of an assignment: (set of clusters as text multisets, noise multiset)."""
    clusters: dict[ClusterId, list[str]] = {}
    noise: list[str] = []
    for text, cid in zip(texts, assignment.labels):
        if cid == NOISE:
            noise.append(text)
        else:
            clusters.setdefault(cid, []).append(text)
    return (
        frozenset(tuple(sorted(m)) for m in clusters.values()),
        frozenset(Counter(noise).items()),
    )


def terms_of(text: str) -> list[str]:
    """Lowercased, punctuation-stripped whitespace terms."""
    return normalize_text(text).split()


def topic_terms(members: Sequence[str], all_clusters: Sequence[Sequence[str]], k: int = 10) -> list[tuple[str, float]]:
    """Class-based TF-IDF keywords for one cluster.

    ``score(t) = tf(t, c) * log(1 + A / f(t))`` where ``tf`` counts ``t`` in
    the cluster, ``f`` counts it across all clusters, and ``A`` is the mean
    number of terms per cluster.  Ties are broken alphabetically.
    """
    if not members:
        raise ClusteringError("topic_terms requires a non-empty cluster")
    if k < 1:
        raise ClusteringError(f"k must be >= 1, got {k}")
    tf = Counter(t for text in members for t in terms_of(text))
    totals: Counter[str] = Counter()
    for texts in all_clusters:
        totals.update(t for text in texts for t in terms_of(text))
    # the cluster itself always counts toward f(t), even if not listed
    for t, c in tf.items():
        totals[t] = max(totals[t], c)
    n_clusters = max(len(all_clusters), 1)
    avg_terms = sum(totals.values()) / n_clusters
    scored = [(t, c * math.log(1.0 + avg_terms / totals[t])) for t, c in tf.items()]
    scored.sort(key=lambda ts: (-ts[1], ts[0]))
    return scored[:k]


def cluster_texts(
    texts: Sequence[str],
    refs: Sequence[str] | None = None,
    min_cluster_size: int = DEFAULT_MIN_CLUSTER_SIZE,
    distance_threshold: float = DEFAULT_DISTANCE_THRESHOLD,
    dim: int = DEFAULT_DIM,
    embedder: Embedder | None = None,
    k: int = 5,
) -> ClusterAssignment:
    """Embed, cluster and attach topic terms in one call."""
    if embedder is None:
        vectors = [embed(t, dim) for t in texts]
    else:
        vectors = [embedder(t) for t in texts]
    assignment = cluster(vectors, min_cluster_size, distance_threshold, refs)
    members = assignment.members()
    groups = [[texts[i] for i in idx] for _, idx in sorted(members.items())]
    topics = {cid: tuple(topic_terms(g, groups, k)) for cid, g in zip(sorted(members), groups)}
    return ClusterAssignment(assignment.items, assignment.min_cluster_size, topics)
