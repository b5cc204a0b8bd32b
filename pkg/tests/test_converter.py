import json
import math

import numpy as np
import pytest

from snapgrid.converter import (
    PRIOR_RULES,
    ConversionError,
    DegenerateWeightsError,
    NonConvertibleError,
    VoteGrid,
    convert_model,
    convert_models,
    feature_to_rule,
    relative_weights,
    reports_to_json,
    scott_bin_width,
    weight_to_votes,
)
from snapgrid.engine import RuleEngine
from snapgrid.features import (
    candidates_for,
    convertible_only,
    extract_participant_features,
    extract_trigger_features,
)
from snapgrid.learner import LRModel
from snapgrid.ruledsl import format_path, format_token_pattern, parse_rules, serialize_rules, validate_ruleset


def bin_offset_oracle(w, h, n_bins=10_000):
    """Offset from 0 of the zero-aligned bin holding ``w``; bins are (k-1)h < |w| <= kh."""
    if w == 0:
        return 0
    edges = h * np.arange(n_bins + 1)
    k = int(np.searchsorted(edges, abs(w), side="left"))
    return k if w > 0 else -k


def test_scott_example_eight_weights():
    g = scott_bin_width([1, -1, 2, -2, 3, -3, 4, -4])
    assert g.n == 8
    assert g.sigma_hat == pytest.approx(math.sqrt(60 / 7), abs=1e-12)
    assert g.h == pytest.approx(3.5 * math.sqrt(60 / 7) / 2, abs=1e-12)
    assert g.h == pytest.approx(5.1235, abs=1e-4)
    assert g.origin == 0


def test_scott_errors():
    with pytest.raises(DegenerateWeightsError, match="degenerate weight distribution"):
        scott_bin_width([0.7] * 5)
    with pytest.raises(DegenerateWeightsError):
        scott_bin_width([0.7])
    with pytest.raises(ValueError):
        scott_bin_width([])


@pytest.mark.parametrize("w, h, votes", [(-1.6, 1.0, -2), (0.0, 1.0, 0), (1.0, 0.5, 2), (0.2, 1.0, 1), (-3.0, 1.5, -2)])
def test_vote_examples(w, h, votes):
    assert weight_to_votes(w, VoteGrid(h, 2, 1.0)) == votes


def test_votes_match_bin_oracle():
    rng = np.random.default_rng(11)
    ws = rng.normal(scale=3, size=1000)
    grid = scott_bin_width(ws)
    for w in ws:
        assert weight_to_votes(w, grid) == bin_offset_oracle(w, grid.h)
    for k in range(-5, 6):
        assert weight_to_votes(k * grid.h, grid) == k


def test_grid_rejects_bad_width():
    with pytest.raises(ValueError):
        VoteGrid(0.0, 1, 0.0)


# -- feature translation ---------------------------------------------------


def test_typed_path_rule():
    r = feature_to_rule("part.path.typed:Phosphorylation|>nsubjpass|Protein", {"Theme:Phosphorylation": 3})
    b = r.body
    assert r.kind == "participant" and r.votes == {"Theme:Phosphorylation": 3}
    assert b.trigger_class == "Phosphorylation"
    assert format_path(b.path) == ">nsubjpass"
    assert [(a.field, a.matcher.value) for a in b.argument.atoms] == [("entity", "Protein")]


def test_lemma_rule():
    r = feature_to_rule("trig.lemma:0=phosphorylate", {"Phosphorylation": 2})
    assert r.kind == "trigger" and r.name == "trig.lemma:0=phosphorylate"
    assert format_token_pattern(r.body.pattern) == "[lemma=phosphorylate]"


def test_offset_rule_uses_lookaround():
    r = feature_to_rule("trig.word:-2=of", {"Binding": 1})
    assert format_token_pattern(r.body.pattern) == "(?<=[word=of] []) []"
    r = feature_to_rule("trig.lemma:+1=be", {"Binding": 1})
    assert format_token_pattern(r.body.pattern) == "[] (?=[lemma=be])"


def test_non_convertible_feature():
    with pytest.raises(NonConvertibleError, match="non-convertible: trig.bow.sent"):
        feature_to_rule("trig.bow.sent:kinase", {"Binding": 1})


def test_rule_needs_votes():
    with pytest.raises(ConversionError):
        feature_to_rule("trig.lemma:0=x", {"Binding": 0})
    with pytest.raises(ConversionError):
        feature_to_rule("trig.lemma:0=x", {"Nil": 2})


# -- whole models ----------------------------------------------------------


def test_single_feature_model():
    m = LRModel(("Phosphorylation", "Nil"), {"trig.lemma:0=phosphorylate": {"Phosphorylation": 2.0}},
                {"Phosphorylation": 0.0, "Nil": 0.0}, meta={"classifier": "trigger"})
    rs, report = convert_model(m, grid=VoteGrid(1.0, 1, 1.0))
    (rule,) = rs.rules
    assert rule.votes == {"Phosphorylation": 2}
    assert report.rule_count == 1 and report.threshold == 0


def test_only_non_convertible_features():
    m = LRModel(("Phosphorylation", "Nil"), {"trig.bow.sent:kinase": {"Phosphorylation": 1.0}},
                {"Phosphorylation": 0.0, "Nil": 0.0}, meta={"classifier": "trigger"})
    rs, report = convert_model(m)
    assert rs.rules == ()
    assert report.dropped == [{"feature": "trig.bow.sent:kinase", "reason": "non-convertible"}]
    assert report.grid is None
    assert validate_ruleset(rs) == []


def test_nil_relative_weights():
    m = LRModel(("A", "B", "Nil"), {"trig.lemma:0=x": {"A": 1.0, "Nil": -0.5}}, {"A": 1.0, "B": 0.0, "Nil": 0.5})
    rel, prior = relative_weights(m)
    assert rel == {"trig.lemma:0=x": {"A": 1.5, "B": 0.5}}
    assert prior == {"A": 0.5, "B": -0.5}


def test_degenerate_sample_propagates():
    m = LRModel(("A", "Nil"), {"trig.lemma:0=x": {"A": 1.0}}, {"A": 0.0, "Nil": 0.0}, meta={"classifier": "trigger"})
    with pytest.raises(DegenerateWeightsError):
        convert_model(m)


def test_converted_small_models(small_models):
    rs, reports = convert_models(small_models.trigger, small_models.participant)
    assert validate_ruleset(rs) == []
    names = [r.name for r in rs.rules]
    assert len(names) == len(set(names))
    assert set(PRIOR_RULES.values()) <= set(names)
    text = serialize_rules(rs)
    assert parse_rules(text) == rs
    data = json.loads(reports_to_json(reports))
    for which in ("trigger", "participant"):
        rep = data[which]
        assert rep["grid"]["h"] > 0 and rep["grid"]["origin"] == 0
        assert rep["threshold"] == 0
        assert sum(rep["vote_histogram"].values()) > 0
        assert "0" not in rep["vote_histogram"]
    # every rule's votes are bin offsets of its relative weights
    for model, rep in zip((small_models.trigger, small_models.participant), reports):
        rel, _ = relative_weights(model)
        by_name = rs.by_name()
        for feat, row in rel.items():
            if feat in by_name:
                for lab, w in row.items():
                    assert by_name[feat].votes.get(lab, 0) == bin_offset_oracle(w, rep.grid.h)


def test_rules_fire_exactly_where_features_occur(small_corpus, small_models):
    """Translation is exact: every rule matches iff its source feature is present."""
    rs, _ = convert_models(small_models.trigger, small_models.participant)
    engine = RuleEngine(rs)
    gaz = frozenset(small_models.trigger.meta["gazetteer"])
    trigger_rules = {r.name for r in rs.of_kind("trigger")} - {PRIOR_RULES["trigger"]}
    part_rules = {r.name: r for r in rs.of_kind("participant")}
    part_rules.pop(PRIOR_RULES["participant"])
    checked = 0
    for doc in small_corpus:
        for s in doc.sentences:
            for i in range(len(s.tokens)):
                present = set(convertible_only(extract_trigger_features(s, i, gaz))) & trigger_rules
                fired = {r.name for r in engine.trigger_rules_at(s, i)} - {PRIOR_RULES["trigger"]}
                assert fired == present, (s.tokens[i].word, fired ^ present)
                checked += 1
            gold = {t.token: t.event_class for t in s.triggers}
            tallies = {}
            for name, rule in part_rules.items():
                single = RuleEngine(rs.replace_rules([rule]))
                for key in single.tally_participants(s, gold):
                    tallies.setdefault(key, set()).add(name)
            for t, cls in gold.items():
                for c in candidates_for(s, t, gold):
                    present = set(convertible_only(extract_participant_features(s, t, cls, c, gold))) & set(part_rules)
                    assert tallies.get((t, c), set()) == present
    assert checked > 500


def test_continuous_mode_reproduces_scores(small_corpus, small_models):
    rs, reports = convert_models(small_models.trigger, small_models.participant, continuous=True)
    assert all(r.continuous and r.grid is None for r in reports)
    engine = RuleEngine(rs)
    m = small_models.trigger
    gaz = frozenset(m.meta["gazetteer"])
    for doc in small_corpus[:20]:
        for s in doc.sentences:
            tallies = engine.tally_triggers(s)
            for i in range(len(s.tokens)):
                scores = m.scores(convertible_only(extract_trigger_features(s, i, gaz)))
                for lab in m.labels:
                    if lab != "Nil":
                        assert tallies.get(i, {}).get(lab, 0) == pytest.approx(scores[lab] - scores["Nil"], abs=1e-9)
