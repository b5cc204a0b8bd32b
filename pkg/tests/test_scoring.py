import random

import pytest

from helpers import mek_document, nested_document
from snapgrid.converter import convert_models
from snapgrid.curve import curve_to_csv, learning_curve, subsample
from snapgrid.events import Event
from snapgrid.labels import EVENT_CLASSES
from snapgrid.learner import TrainConfig
from snapgrid.pipeline import LRPredictor, RulePredictor, event_map, predict_corpus, train_models
from snapgrid.scoring import Score, ScoringError, gold_event_map, score


def _ev(id, token, cls="Phosphorylation", args=(("Theme", ("mention", "T1")),), sentence=0):
    return Event(id, sentence, f"TR{token}", token, cls, tuple(args))


def test_identity_is_perfect(small_corpus):
    gold = gold_event_map(small_corpus)
    rep = score(gold, gold)
    for name, s in rep.rows():
        if s.tp:
            assert s.precision == s.recall == s.f1 == 1.0
            assert s.fp == s.fn == 0
    assert rep.total().tp == sum(len(v) for v in gold.values())


def test_arithmetic_example():
    s = Score(tp=2, fp=1, fn=2)
    assert 100 * s.precision == pytest.approx(66.67, abs=0.005)
    assert 100 * s.recall == pytest.approx(50.0)
    assert 100 * s.f1 == pytest.approx(57.14, abs=0.005)
    assert Score().f1 == Score().precision == Score().recall == 0.0


def test_counts_per_class():
    gold = {"D": [_ev("a", 0), _ev("b", 1), _ev("c", 2), _ev("d", 3)]}
    pred = {"D": [_ev("x", 0), _ev("y", 1), _ev("z", 7)]}
    s = score(pred, gold).per_class["Phosphorylation"]
    assert (s.tp, s.fp, s.fn) == (2, 1, 2)


def test_nested_wrong_theme_is_fn_and_fp():
    doc = nested_document()
    gold = gold_event_map([doc])
    (inner,) = [e for e in gold[doc.id] if e.event_class == "Phosphorylation"]
    wrong = Event(inner.id, inner.sentence, inner.trigger, inner.trigger_token, inner.event_class,
                  (("Theme", ("mention", "T1")),))
    pred = {doc.id: [wrong if e.id == inner.id else e for e in gold[doc.id]]}
    rep = score(pred, gold)
    reg = rep.per_class["Positive_regulation"]
    assert (reg.tp, reg.fp, reg.fn) == (0, 1, 1)
    ph = rep.per_class["Phosphorylation"]
    assert (ph.tp, ph.fp, ph.fn) == (0, 1, 1)


def test_event_ids_do_not_matter():
    gold = gold_event_map([nested_document()])
    renamed = {}
    for d, evs in gold.items():
        m = {e.id: f"Z{i}" for i, e in enumerate(evs)}
        renamed[d] = [
            Event(m[e.id], e.sentence, e.trigger, e.trigger_token, e.event_class,
                  tuple((r, ("event", m[ref]) if k == "event" else (k, ref)) for r, (k, ref) in e.args))
            for e in evs
        ]
    assert score(renamed, gold).total().f1 == 1.0


def test_duplicates_match_once():
    gold = {"D": [_ev("a", 0)]}
    s = score({"D": [_ev("x", 0), _ev("y", 0)]}, gold).total()
    assert (s.tp, s.fp, s.fn) == (1, 1, 0)


def test_symmetry_and_micro_totals(small_corpus, small_models):
    gold = gold_event_map(small_corpus)
    pred = event_map(predict_corpus(LRPredictor(small_models), small_corpus))
    rep = score(pred, gold)
    rng = random.Random(1)
    shuffled = {d: rng.sample(list(v), len(v)) for d, v in pred.items()}
    gold_shuffled = {d: rng.sample(list(v), len(v)) for d, v in gold.items()}
    assert score(shuffled, gold_shuffled) == rep
    total = rep.total()
    assert total.tp == sum(rep.per_class[c].tp for c in EVENT_CLASSES)
    assert total.fp == sum(rep.per_class[c].fp for c in EVENT_CLASSES)
    assert total.fn == sum(rep.per_class[c].fn for c in EVENT_CLASSES)
    assert rep.total("Event Total") + rep.total("Regulation Total") == total


def test_document_mismatch():
    gold = gold_event_map([mek_document("A")])
    with pytest.raises(ScoringError, match="document ids differ"):
        score({"B": []}, gold)


def test_table_layout():
    rep = score({"D": [_ev("x", 0)]}, {"D": [_ev("a", 0)]})
    table = rep.format_table().splitlines()
    assert table[0].split() == ["Event", "Class", "Recall", "Precision", "F1", "tp", "fp", "fn"]
    names = [name for name, _ in rep.rows()]
    assert names[6] == "Event Total" and names[-1] == "All Total"
    assert rep.to_json()["Phosphorylation"]["f1"] == 100.0


# -- learning curves ---------------------------------------------------------


def test_subsample():
    docs = list(range(20))
    a = subsample(docs, 0.3, 4)
    assert len(a) == 6 and a == subsample(docs, 0.3, 4)
    assert set(a) <= set(subsample(docs, 0.6, 4))
    assert subsample(docs, 1.0, 9) == docs
    with pytest.raises(ValueError, match="no documents"):
        subsample(docs, 0.01, 0)
    with pytest.raises(ValueError):
        subsample(docs, 0.0, 0)


def test_curve_full_fraction_matches_direct_run(small_corpus):
    train_docs, dev_docs = small_corpus[:40], small_corpus[40:]
    cfg = TrainConfig.default_for("l1")
    (pt,) = learning_curve(train_docs, dev_docs, [1.0], cfg, seed=0)
    models = train_models(train_docs, cfg, "convertible")
    rules, _ = convert_models(models.trigger, models.participant)
    gold = gold_event_map(dev_docs)
    lr = score(event_map(predict_corpus(LRPredictor(models), dev_docs)), gold).total()
    rb = score(event_map(predict_corpus(RulePredictor(rules), dev_docs)), gold).total()
    assert (pt.f1_lr, pt.f1_rules) == (100 * lr.f1, 100 * rb.f1)
    assert pt.n_docs == 40


def test_curve_deterministic(small_corpus):
    args = (small_corpus[:30], small_corpus[30:45], [0.5, 1.0])
    a, b = learning_curve(*args, seed=2), learning_curve(*args, seed=2)
    assert a == b
    csv = curve_to_csv(a).splitlines()
    assert csv[0] == "fraction,f1_lr,f1_rules" and len(csv) == 3


def test_curve_rejects_bad_fractions(small_corpus):
    with pytest.raises(ValueError):
        learning_curve(small_corpus[:10], small_corpus[10:12], [0.01])
    with pytest.raises(ValueError):
        learning_curve(small_corpus[:10], small_corpus[10:12], [1.0, 0.5])
