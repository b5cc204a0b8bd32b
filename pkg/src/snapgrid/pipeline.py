"""End-to-end glue: training examples, both classifiers, and document prediction."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .corpus import Document, Sentence
from .engine import RuleEngine
from .events import Event, RelationRef, TriggerRef, assemble_events
from .features import (
    build_gazetteer,
    candidates_for,
    convertible_only,
    extract_participant_features,
    extract_trigger_features,
)
from .labels import NIL, PARTICIPANT_LABELS, TRIGGER_LABELS, labels_for_trigger_class, participant_label
from .learner import LRModel, TrainConfig, predict, train
from .ruledsl.syntax import RuleSet

log = logging.getLogger(__name__)

FEATURE_SETS = ("all", "convertible")


def _filter(mode):
    if mode not in FEATURE_SETS:
        raise ValueError(f"feature set must be one of {FEATURE_SETS}, got {mode!r}")
    return convertible_only if mode == "convertible" else (lambda v: v)


def gold_trigger_map(sentence: Sentence) -> dict:
    """token -> class of the sentence's gold triggers (first one wins on shared tokens)."""
    out = {}
    for t in sentence.triggers:
        out.setdefault(t.token, t.event_class)
    return out


def trigger_examples(docs: Iterable[Document], gazetteer, features="all"):
    keep = _filter(features)
    out = []
    for doc in docs:
        for sent in doc.sentences:
            gold = gold_trigger_map(sent)
            for i in range(len(sent.tokens)):
                out.append((keep(extract_trigger_features(sent, i, gazetteer)), gold.get(i, NIL)))
    return out


def _gold_relation_labels(sent: Sentence):
    """(trigger token, candidate ref) -> participant label from the gold relations."""
    trig_by_id = {t.id: t for t in sent.triggers}
    out = {}
    for r in sent.relations:
        trig = trig_by_id[r.trigger]
        if r.argument in trig_by_id:
            ref = ("trigger", trig_by_id[r.argument].token)
        else:
            ref = ("mention", r.argument)
        out.setdefault((trig.token, ref), participant_label(r.role, trig.event_class))
    return out


def participant_examples(docs: Iterable[Document], features="all"):
    keep = _filter(features)
    out = []
    for doc in docs:
        for sent in doc.sentences:
            triggers = gold_trigger_map(sent)
            gold = _gold_relation_labels(sent)
            for t, cls in sorted(triggers.items()):
                for cand in candidates_for(sent, t, triggers):
                    vec = extract_participant_features(sent, t, cls, cand, triggers)
                    out.append((keep(vec), gold.get((t, cand.ref), NIL)))
    return out


@dataclass
class Models:
    trigger: LRModel
    participant: LRModel


def train_models(docs: Sequence[Document], config: TrainConfig, features="all") -> Models:
    gazetteer = build_gazetteer(docs)
    meta = {"features": features, "gazetteer": sorted(gazetteer)}
    trig = train(trigger_examples(docs, gazetteer, features), config, TRIGGER_LABELS, {**meta, "classifier": "trigger"})
    part = train(participant_examples(docs, features), config, PARTICIPANT_LABELS, {**meta, "classifier": "participant"})
    return Models(trig, part)


# --------------------------------------------------------------------------
# prediction


@dataclass
class SentencePrediction:
    index: int
    triggers: dict  # token -> class
    relations: list  # (trigger token, role, Candidate)


@dataclass
class DocumentPrediction:
    doc_id: str
    sentences: list
    events: list = field(default_factory=list)


def _assemble(doc_id, sentences: Sequence[SentencePrediction]) -> DocumentPrediction:
    events = []
    n = 0
    for sp in sentences:
        ids = {}
        trigs = []
        for tok in sorted(sp.triggers):
            ids[tok] = f"TR{n}"
            n += 1
            trigs.append(TriggerRef(ids[tok], tok, sp.triggers[tok]))
        rels = []
        for t, role, cand in sp.relations:
            kind, ref = cand.ref
            arg = ("trigger", ids[ref]) if kind == "trigger" else ("mention", ref)
            rels.append(RelationRef(ids[t], role, arg))
        evs, _ = assemble_events(sp.index, trigs, rels)
        events.extend(evs)
    return DocumentPrediction(doc_id, list(sentences), events)


class LRPredictor:
    """Pipeline inference with the two LR classifiers."""

    def __init__(self, models: Models):
        self.models = models
        self.gazetteer = frozenset(models.trigger.meta.get("gazetteer", ()))
        self._keep_t = _filter(models.trigger.meta.get("features", "all"))
        self._keep_p = _filter(models.participant.meta.get("features", "all"))

    def trigger_label(self, sent, i):
        vec = self._keep_t(extract_trigger_features(sent, i, self.gazetteer))
        return predict(self.models.trigger, vec)[0]

    def participant_label(self, sent, t, cls, cand, triggers):
        model = self.models.participant
        vec = self._keep_p(extract_participant_features(sent, t, cls, cand, triggers))
        allowed = [l for l in labels_for_trigger_class(cls) if l in model.labels]
        if allowed == [NIL] or not allowed:
            return NIL
        return predict(model, vec, allowed)[0]

    def predict_sentence(self, sent: Sentence, triggers: Optional[Mapping[int, str]] = None) -> SentencePrediction:
        if triggers is None:
            triggers = {}
            for i in range(len(sent.tokens)):
                lab = self.trigger_label(sent, i)
                if lab != NIL:
                    triggers[i] = lab
        rels = []
        for t in sorted(triggers):
            for cand in candidates_for(sent, t, triggers):
                lab = self.participant_label(sent, t, triggers[t], cand, triggers)
                if lab != NIL:
                    rels.append((t, lab.split(":", 1)[0], cand))
        return SentencePrediction(sent.index, dict(triggers), rels)

    def predict_document(self, doc: Document) -> DocumentPrediction:
        return _assemble(doc.id, [self.predict_sentence(s) for s in doc.sentences])


class RulePredictor:
    """Pipeline inference with a rule set."""

    def __init__(self, ruleset: RuleSet, trigger_threshold=0, participant_threshold=0):
        self.engine = RuleEngine(ruleset, trigger_threshold, participant_threshold)

    def predict_sentence(self, sent: Sentence, triggers=None) -> SentencePrediction:
        res = self.engine.apply(sent, triggers)
        return SentencePrediction(sent.index, res.triggers, res.relations)

    def predict_document(self, doc: Document) -> DocumentPrediction:
        return _assemble(doc.id, [self.predict_sentence(s) for s in doc.sentences])


def predict_corpus(predictor, docs: Iterable[Document]) -> list[DocumentPrediction]:
    return [predictor.predict_document(d) for d in docs]


def event_map(predictions: Iterable[DocumentPrediction]) -> dict:
    return {p.doc_id: p.events for p in predictions}


# --------------------------------------------------------------------------
# prediction files


def prediction_to_json(pred: DocumentPrediction) -> dict:
    sentences = []
    trig_ids = {}
    n = 0
    for sp in pred.sentences:
        trigs = []
        for tok in sorted(sp.triggers):
            trig_ids[(sp.index, tok)] = f"TR{n}"
            trigs.append({"id": f"TR{n}", "token": tok, "class": sp.triggers[tok]})
            n += 1
        rels = []
        for t, role, cand in sp.relations:
            kind, ref = cand.ref
            arg = trig_ids[(sp.index, ref)] if kind == "trigger" else ref
            rels.append({"trigger": trig_ids[(sp.index, t)], "role": role, "arg": arg})
        sentences.append({"triggers": trigs, "relations": rels})
    return {"id": pred.doc_id, "sentences": sentences, "events": [e.to_json() for e in pred.events]}


def dumps_predictions(preds: Iterable[DocumentPrediction]) -> str:
    return "".join(json.dumps(prediction_to_json(p), ensure_ascii=False, sort_keys=True) + "\n" for p in preds)


def events_from_json(record: Mapping) -> list[Event]:
    """Events of one prediction record; argument ids resolve to events first, then mentions."""
    raw = record.get("events", [])
    ids = {e["id"] for e in raw}
    out = []
    for e in raw:
        args = tuple((role, ("event" if ref in ids else "mention", ref)) for role, ref in e["args"])
        out.append(Event(e["id"], int(e["sentence"]), e["trigger"], int(e["token"]), e["class"], args))
    return out


def loads_prediction_events(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            out[rec["id"]] = events_from_json(rec)
        except (ValueError, KeyError, TypeError) as exc:
            raise ValueError(f"line {lineno}: malformed prediction record: {exc}") from None
    return out
