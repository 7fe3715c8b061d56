import math
import random
from collections import Counter
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abdico.clustering import (
    NOISE,
    ClusteringError,
    EmbeddingVector,
    canonical_partition,
    cluster,
    cluster_texts,
    embed,
    topic_terms,
)
from abdico.synthetic import AGENT_FIXTURE, AGENT_ORACLE


def _oracle_vector(text, dim=256):
    """Reference trigram hashing written without the library's helpers."""
    cleaned = "".join(ch if ch.isalnum() and ch.isascii() else " " for ch in text.lower())
    words = cleaned.split()
    if not words:
        return {}
    s = " " + " ".join(words) + " "
    counts = Counter()
    for i in range(len(s) - 2):
        h = reduce(lambda acc, b: ((acc ^ b) * 16777619) % 2**32, s[i : i + 3].encode(), 2166136261)
        counts[h % dim] += 1
    norm = math.sqrt(sum(v * v for v in counts.values()))
    return {k: v / norm for k, v in counts.items()}


def _oracle_cos(a, b):
    return sum(a[k] * b.get(k, 0.0) for k in a)


@pytest.mark.parametrize("text", ["mentor", "the Mentors!", "release vote", "IPMC (P)PMC-level", "a"])
def test_embed_matches_oracle(text):
    vec = embed(text).values
    ref = _oracle_vector(text)
    dense = np.zeros(256)
    for k, v in ref.items():
        dense[k] = v
    assert np.allclose(vec, dense, atol=1e-15)


def test_embed_similarity_ordering():
    a, b, c = _oracle_vector("mentor"), _oracle_vector("mentors"), _oracle_vector("release vote")
    assert _oracle_cos(a, b) > _oracle_cos(a, c)
    ea, eb, ec = embed("mentor").values, embed("mentors").values, embed("release vote").values
    assert ea @ eb > ea @ ec
    assert ea @ eb == pytest.approx(_oracle_cos(a, b), abs=1e-12)


def test_embed_basics():
    assert not embed("").values.any()
    assert not embed("...").values.any()
    assert np.array_equal(embed("mentor").values, embed("mentor").values)
    assert embed("mentor", dim=16).values.shape == (16,)
    with pytest.raises(ValueError):
        embed("mentor").values[0] = 1.0


@given(st.text(max_size=30))
def test_embed_norm_is_zero_or_one(text):
    norm = float(np.linalg.norm(embed(text).values))
    has_alnum = any(ch.isalnum() and ch.isascii() for ch in text.lower())
    if has_alnum:
        assert norm == pytest.approx(1.0, abs=1e-12)
    else:
        assert norm == 0.0


def _unit(i, dim=8):
    v = np.zeros(dim)
    v[i] = 1.0
    return EmbeddingVector(v)


def test_identical_strings_form_one_cluster():
    a = cluster([embed("podling")] * 3, min_cluster_size=2)
    assert a.labels == [0, 0, 0]


def test_orthogonal_vectors_are_noise():
    a = cluster([_unit(0), _unit(1), _unit(2)], min_cluster_size=2, distance_threshold=0.5)
    assert a.labels == [NOISE] * 3
    assert a.noise_count() == 3


@pytest.mark.parametrize("bad", [dict(min_cluster_size=1), dict(distance_threshold=0.0), dict(distance_threshold=2.0), dict(min_cluster_size=2.5)])
def test_invalid_parameters(bad):
    with pytest.raises(ClusteringError):
        cluster([_unit(0)], **bad)
    with pytest.raises(ClusteringError):
        cluster([])


def test_agent_fixture_matches_oracle():
    a = cluster([embed(t) for t in AGENT_FIXTURE])
    clusters, noise = canonical_partition(AGENT_FIXTURE, a)
    assert not noise
    assert {frozenset(c) for c in clusters} == set(AGENT_ORACLE)
    assert a.labels == [0] * 4 + [1] * 4 + [2] * 4


def test_min_size_moves_small_groups_to_noise():
    texts = ["mentor", "mentors", "release vote"]
    a = cluster([embed(t) for t in texts], min_cluster_size=2)
    assert a.labels == [0, 0, NOISE]
    a3 = cluster([embed(t) for t in texts], min_cluster_size=3)
    assert a3.labels == [NOISE] * 3


@settings(max_examples=40, deadline=None)
@given(st.randoms(use_true_random=False))
def test_permutation_equivariance(rnd):
    texts = list(AGENT_FIXTURE) + ["release vote", "the board", "dev list", "the release"]
    order = list(range(len(texts)))
    rnd.shuffle(order)
    permuted = [texts[i] for i in order]
    base = cluster([embed(t) for t in texts])
    perm = cluster([embed(t) for t in permuted])
    assert canonical_partition(texts, base) == canonical_partition(permuted, perm)
    # ids are canonical: cluster k's smallest member comes before cluster k+1's
    firsts = [perm.labels.index(k) for k in sorted(perm.members())]
    assert firsts == sorted(firsts)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from(AGENT_FIXTURE + ("vote", "votes", "release", "code")), min_size=1, max_size=25), st.integers(2, 4))
def test_partition_property(texts, min_size):
    a = cluster([embed(t) for t in texts], min_cluster_size=min_size)
    assert len(a.items) == len(texts)
    for members in a.members().values():
        assert len(members) >= min_size


def test_topic_terms_single_cluster():
    terms = topic_terms(["podling release"], [["podling release"]], k=2)
    assert [t for t, _ in terms] == ["podling", "release"]
    assert terms[0][1] == terms[1][1] == pytest.approx(math.log(3.0))


def test_topic_terms_hand_computed():
    c0, c1 = ["the mentor", "mentors"], ["the podling", "podling release"]
    # f: the=2 mentor=1 mentors=1 podling=2 release=1; A = 7 terms / 2 clusters
    avg = 3.5
    assert topic_terms(c0, [c0, c1], k=3) == [
        ("mentor", pytest.approx(math.log(1 + avg / 1))),
        ("mentors", pytest.approx(math.log(1 + avg / 1))),
        ("the", pytest.approx(math.log(1 + avg / 2))),
    ]
    assert topic_terms(c1, [c0, c1], k=2) == [
        ("podling", pytest.approx(2 * math.log(1 + avg / 2))),
        ("release", pytest.approx(math.log(1 + avg / 1))),
    ]


def test_shared_term_scores_lower_than_exclusive():
    c0, c1 = ["vote code"], ["vote"]
    scores = dict(topic_terms(c0, [c0, c1], k=5))
    assert scores["vote"] < scores["code"]


def test_topic_terms_errors():
    with pytest.raises(ClusteringError):
        topic_terms([], [[]], k=1)
    with pytest.raises(ClusteringError):
        topic_terms(["a"], [["a"]], k=0)


def test_cluster_texts_attaches_topics():
    a = cluster_texts(list(AGENT_FIXTURE), k=2)
    assert sorted(a.topics) == [0, 1, 2]
    assert a.topics[0][0][0] in {"mentor", "mentors"}
    assert a.topics[2][0][0] in {"podling", "podlings"}


def test_custom_embedder_is_used():
    calls = []

    def fake(text):
        calls.append(text)
        return _unit(0)

    a = cluster_texts(["x", "y"], embedder=fake)
    assert calls == ["x", "y"] and a.labels == [0, 0]
