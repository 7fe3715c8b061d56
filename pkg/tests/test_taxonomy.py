import pytest
from hypothesis import given, strategies as st

from abdico.classifier import ComponentSpan
from abdico.clustering import NOISE
from abdico.labels import ComponentLabel
from abdico.taxonomy import (
    AgentCategory,
    CategoryMap,
    DefaultPolicy,
    DeonticClass,
    TaxonomyError,
    UnmappedComponentError,
    categorize_component,
    classify_deontic,
    head_noun,
    load_taxonomy,
)


def _conf(tmp_path, text):
    p = tmp_path / "tax.conf"
    p.write_text(text, encoding="utf-8")
    return p


def _span(text, label=ComponentLabel.A, sid="s1"):
    return ComponentSpan(sid, label, 0, len(text.split()), text)


def test_load_authority_roles(tmp_path):
    cmap = load_taxonomy(_conf(tmp_path, "[agents]\nmentor = Authority\nipmc = Authority\nasf = Authority\ncommitter = Participant\n"))
    assert cmap.agent_rules == {
        "mentor": AgentCategory.Authority,
        "ipmc": AgentCategory.Authority,
        "asf": AgentCategory.Authority,
        "committer": AgentCategory.Participant,
    }
    assert cmap.default is DefaultPolicy.OTHER


def test_duplicate_key_rejected(tmp_path):
    with pytest.raises(TaxonomyError, match="mentor"):
        load_taxonomy(_conf(tmp_path, "[agents]\nmentor = Authority\nmentor = Participant\n"))
    with pytest.raises(TaxonomyError, match="mentor"):
        load_taxonomy(_conf(tmp_path, "[agents]\nmentor = Authority\nMentor = Participant\n"))


def test_unknown_category_named(tmp_path):
    with pytest.raises(TaxonomyError, match="Overlord"):
        load_taxonomy(_conf(tmp_path, "[agents]\nmentor = Overlord\n"))


def test_empty_map_falls_through(tmp_path):
    cmap = load_taxonomy(_conf(tmp_path, "[settings]\ndefault = other\n"))
    assert categorize_component(_span("the mentor"), None, cmap, "agent") == "Other"


def test_bad_settings(tmp_path):
    with pytest.raises(TaxonomyError):
        load_taxonomy(_conf(tmp_path, "[settings]\ndefault = maybe\n"))
    with pytest.raises(TaxonomyError):
        load_taxonomy(_conf(tmp_path, "[weird]\na = b\n"))
    with pytest.raises(TaxonomyError):
        load_taxonomy(_conf(tmp_path, "[agents]\ncluster:x = Authority\n"))


def test_bundled_taxonomy(fixtures_dir):
    cmap = load_taxonomy(fixtures_dir / "taxonomy.conf")
    assert cmap.agent_rules["podling"] is AgentCategory.Participant
    assert cmap.object_rules["vote"].value == "ProjectManagement"


def test_literal_rule():
    cmap = CategoryMap({"mentor": AgentCategory.Authority})
    assert categorize_component(_span("the mentor"), None, cmap, "agent") == "Authority"
    assert categorize_component(_span("Mentors"), None, cmap, "agent") == "Authority"


def test_noise_cluster_falls_to_other_bucket():
    cmap = CategoryMap({"cluster:0": AgentCategory.Authority})
    span = _span("the janitor")
    assert categorize_component(span, {span.ref: NOISE}, cmap, "agent") == "Other"


def test_cluster_rule_beats_literal():
    cmap = CategoryMap({"cluster:3": AgentCategory.Participant, "mentor": AgentCategory.Authority})
    span = _span("the mentor")
    assert categorize_component(span, {span.ref: 3}, cmap, "agent") == "Participant"
    assert categorize_component(span, {span.ref: 4}, cmap, "agent") == "Authority"


def test_rule_declaration_order_irrelevant(tmp_path):
    a = load_taxonomy(_conf(tmp_path, "[agents]\ncluster:1 = Participant\nmentor = Authority\n"))
    b = load_taxonomy(_conf(tmp_path, "[agents]\nmentor = Authority\ncluster:01 = Participant\n"))
    span = _span("the mentor")
    for assignment in ({span.ref: 1}, {span.ref: 0}, None):
        assert categorize_component(span, assignment, a, "agent") == categorize_component(span, assignment, b, "agent")


def test_error_policy_raises_naming_span():
    cmap = CategoryMap({}, {}, DefaultPolicy.ERROR)
    with pytest.raises(UnmappedComponentError, match="the janitor"):
        categorize_component(_span("the janitor"), None, cmap, "agent")


def test_kind_must_match_label():
    with pytest.raises(ValueError):
        categorize_component(_span("the vote", ComponentLabel.A), None, CategoryMap(), "object")


def test_object_lookup():
    from abdico.taxonomy import ObjectCategory

    cmap = CategoryMap({}, {"record": ObjectCategory.ProjectManagement})
    span = _span("the records", ComponentLabel.B)
    assert categorize_component(span, None, cmap, "object") == "ProjectManagement"


def test_head_noun():
    assert head_noun("the mentor") == "mentor"
    assert head_noun("the source code") == "code"
    assert head_noun("mentors of the podling") == "mentors"
    assert head_noun("...") is None


DEONTIC_TABLE = {
    "must": DeonticClass.Strong,
    "will": DeonticClass.Strong,
    "shall": DeonticClass.Strong,
    "may": DeonticClass.Weak,
    "should": DeonticClass.Weak,
    "can": DeonticClass.Weak,
    "might": DeonticClass.Weak,
    "could": DeonticClass.Weak,
    "will not": DeonticClass.Proscriptive,
    "must not": DeonticClass.Proscriptive,
    "won't": DeonticClass.Proscriptive,
    "cannot": DeonticClass.Proscriptive,
    "should never": DeonticClass.Proscriptive,
    "is": DeonticClass.Stative,
    "are": DeonticClass.Stative,
    "is not": DeonticClass.Stative,
    "must be": DeonticClass.Strong,
    "ought": DeonticClass.Other,
    "": DeonticClass.Other,
}


@pytest.mark.parametrize("text,expected", DEONTIC_TABLE.items())
def test_classify_deontic(text, expected):
    assert classify_deontic(text) is expected


@given(st.text(alphabet=st.sampled_from(list("mustwilnoecadhbr' ")), max_size=20) | st.text(max_size=20))
def test_classify_deontic_total_and_case_insensitive(text):
    result = classify_deontic(text)
    assert isinstance(result, DeonticClass)
    if text.isascii():
        assert classify_deontic(text.upper()) is classify_deontic(text.lower()) is result
