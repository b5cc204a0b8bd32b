"""Exact-match event scoring with per-class and micro-averaged totals."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

from .corpus import Document
from .events import Event, RelationRef, TriggerRef, assemble_events
from .labels import EVENT_CLASSES, REGULATION_CLASSES, SIMPLE_CLASSES

TOTALS = {
    "Event Total": SIMPLE_CLASSES,
    "Regulation Total": REGULATION_CLASSES,
    "All Total": EVENT_CLASSES,
}


class ScoringError(ValueError):
    pass


@dataclass(frozen=True)
class Score:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        d = self.tp + self.fp
        return self.tp / d if d else 0.0

    @property
    def recall(self) -> float:
        d = self.tp + self.fn
        return self.tp / d if d else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def __add__(self, other: "Score") -> "Score":
        return Score(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)

    def to_json(self):
        return {
            "tp": self.tp, "fp": self.fp, "fn": self.fn,
            "precision": 100 * self.precision, "recall": 100 * self.recall, "f1": 100 * self.f1,
        }


@dataclass(frozen=True)
class ScoreReport:
    per_class: dict  # class -> Score

    def total(self, name="All Total") -> Score:
        out = Score()
        for cls in TOTALS[name]:
            out = out + self.per_class.get(cls, Score())
        return out

    def rows(self):
        for cls in SIMPLE_CLASSES:
            yield cls, self.per_class.get(cls, Score())
        yield "Event Total", self.total("Event Total")
        for cls in REGULATION_CLASSES:
            yield cls, self.per_class.get(cls, Score())
        yield "Regulation Total", self.total("Regulation Total")
        yield "All Total", self.total("All Total")

    def to_json(self):
        return {name: s.to_json() for name, s in self.rows()}

    def format_table(self) -> str:
        lines = [f"{'Event Class':<22}{'Recall':>8}{'Precision':>11}{'F1':>8}{'tp':>7}{'fp':>7}{'fn':>7}"]
        for name, s in self.rows():
            if name.endswith("Total"):
                lines.append("-" * len(lines[0]))
            lines.append(
                f"{name:<22}{100 * s.recall:>8.2f}{100 * s.precision:>11.2f}{100 * s.f1:>8.2f}"
                f"{s.tp:>7d}{s.fp:>7d}{s.fn:>7d}"
            )
        return "\n".join(lines) + "\n"


def event_keys(events: Sequence[Event]) -> list:
    """Canonical, id-free keys; event-valued arguments are replaced by their own keys."""
    by_id = {e.id: e for e in events}
    memo: dict = {}

    def key(ev, stack=()):
        if ev.id in memo:
            return memo[ev.id]
        if ev.id in stack:
            raise ScoringError(f"cyclic event reference through {ev.id}")
        args = []
        for role, (kind, ref) in ev.args:
            if kind == "event":
                if ref not in by_id:
                    raise ScoringError(f"event {ev.id} cites unknown event {ref}")
                args.append((role, ("event", key(by_id[ref], stack + (ev.id,)))))
            else:
                args.append((role, (kind, ref)))
        k = (ev.sentence, ev.trigger_token, ev.event_class, tuple(sorted(args)))
        memo[ev.id] = k
        return k

    return [key(e) for e in events]


def score(predicted: Mapping[str, Sequence[Event]], gold: Mapping[str, Sequence[Event]]) -> ScoreReport:
    """Score predicted events per document against gold.

    Keys are compared as multisets, which is the maximum matching for an
    equality relation.  Counts are attributed to the event's class.
    """
    if set(predicted) != set(gold):
        missing = sorted(set(gold) - set(predicted))
        extra = sorted(set(predicted) - set(gold))
        raise ScoringError(f"document ids differ: missing predictions for {missing[:5]}, unknown documents {extra[:5]}")
    tp, fp, fn = Counter(), Counter(), Counter()
    for doc_id in sorted(gold):
        p = Counter(event_keys(predicted[doc_id]))
        g = Counter(event_keys(gold[doc_id]))
        for k in set(p) | set(g):
            m = min(p[k], g[k])
            cls = k[2]
            tp[cls] += m
            fp[cls] += p[k] - m
            fn[cls] += g[k] - m
    classes = set(tp) | set(fp) | set(fn) | set(EVENT_CLASSES)
    return ScoreReport({c: Score(tp[c], fp[c], fn[c]) for c in sorted(classes)})


def gold_events(doc: Document) -> list[Event]:
    """The document's gold events, assembled with the prediction conventions."""
    out = []
    for sent in doc.sentences:
        trig_ids = {t.id for t in sent.triggers}
        trigs = [TriggerRef(t.id, t.token, t.event_class) for t in sent.triggers]
        rels = [
            RelationRef(r.trigger, r.role, ("trigger" if r.argument in trig_ids else "mention", r.argument))
            for r in sent.relations
        ]
        events, _ = assemble_events(sent.index, trigs, rels, id_prefix="G")
        out.extend(events)
    return out


def gold_event_map(docs) -> dict:
    return {d.id: gold_events(d) for d in docs}


def report_to_json(report: ScoreReport) -> str:
    return json.dumps(report.to_json(), indent=1) + "\n"
