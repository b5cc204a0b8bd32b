"""Event structures built from decided triggers and participant relations.

Both predictions and gold annotations go through :func:`assemble_events`, so
gold and predicted events follow the same decomposition conventions.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

from .labels import is_regulation


@dataclass(frozen=True)
class TriggerRef:
    id: str
    token: int
    event_class: str


@dataclass(frozen=True)
class RelationRef:
    trigger: str  # trigger id
    role: str
    arg: tuple  # ("mention", id) | ("trigger", id)


@dataclass(frozen=True)
class Event:
    id: str
    sentence: int
    trigger: str
    trigger_token: int
    event_class: str
    args: tuple  # ((role, ("mention", id) | ("event", id)), ...)

    def to_json(self):
        return {
            "id": self.id,
            "sentence": self.sentence,
            "trigger": self.trigger,
            "token": self.trigger_token,
            "class": self.event_class,
            "args": [[role, ref[1]] for role, ref in self.args],
        }


def _break_cycles(triggers, edges):
    """Drop back edges of a depth-first search; returns ``(kept, dropped)`` edge sets."""
    WHITE, GREY, BLACK = 0, 1, 2
    colour = {t: WHITE for t in triggers}
    dropped = set()

    def visit(u):
        colour[u] = GREY
        for v in sorted(edges.get(u, ())):
            if colour.get(v) == GREY:
                dropped.add((u, v))
            elif colour.get(v) == WHITE:
                visit(v)
        colour[u] = BLACK

    for t in sorted(triggers):
        if colour[t] == WHITE:
            visit(t)
    return dropped


def assemble_events(
    sentence: int,
    triggers: Sequence[TriggerRef],
    relations: Iterable[RelationRef],
    id_prefix: str = "E",
):
    """``(events, dropped_relations)`` for one sentence.

    Binding triggers yield one event holding all protein Themes; other simple
    triggers one event per protein Theme.  Regulation triggers yield one event
    per combination of Theme option and Cause option, where an event-valued
    argument stands for every event of the referenced trigger.  Event-valued
    or Cause arguments on simple triggers are ignored; relations closing a
    cycle of event references are dropped and returned.
    """
    by_id = {t.id: t for t in triggers}
    themes: dict = {t.id: [] for t in triggers}
    causes: dict = {t.id: [] for t in triggers}
    for rel in relations:
        if rel.trigger not in by_id:
            continue
        kind, ref = rel.arg
        if kind == "trigger" and ref not in by_id:
            continue
        (themes if rel.role == "Theme" else causes)[rel.trigger].append(rel)

    edges: dict = {}
    for tid, rels in list(themes.items()) + list(causes.items()):
        if not is_regulation(by_id[tid].event_class):
            continue
        for rel in rels:
            if rel.arg[0] == "trigger":
                edges.setdefault(tid, set()).add(rel.arg[1])
    dropped_edges = _break_cycles(by_id, edges)
    dropped = []

    counter = [0]
    memo: dict = {}
    events: list = []

    def new_event(trig, args):
        ev = Event(f"{id_prefix}{sentence}_{counter[0]}", sentence, trig.id, trig.token, trig.event_class, tuple(args))
        counter[0] += 1
        events.append(ev)
        return ev

    def options(tid, rel):
        kind, ref = rel.arg
        if kind == "mention":
            return [("mention", ref)]
        if (tid, ref) in dropped_edges:
            return []
        return [("event", ev.id) for ev in resolve(ref)]

    def resolve(tid):
        if tid in memo:
            return memo[tid]
        memo[tid] = []  # guards against re-entry; cycles were removed above
        trig = by_id[tid]
        out = []
        if not is_regulation(trig.event_class):
            prot = sorted({rel.arg[1] for rel in themes[tid] if rel.arg[0] == "mention"})
            if trig.event_class == "Binding":
                if prot:
                    out.append(new_event(trig, [("Theme", ("mention", m)) for m in prot]))
            else:
                out.extend(new_event(trig, [("Theme", ("mention", m))]) for m in prot)
        else:
            theme_opts = sorted({o for rel in themes[tid] for o in options(tid, rel)})
            cause_opts = sorted({o for rel in causes[tid] for o in options(tid, rel)})
            for th, ca in product(theme_opts, cause_opts or [None]):
                args = [("Theme", th)] + ([("Cause", ca)] if ca is not None else [])
                out.append(new_event(trig, args))
        memo[tid] = out
        return out

    for t in sorted(triggers, key=lambda t: (t.token, t.id)):
        resolve(t.id)
    for rels in list(themes.values()) + list(causes.values()):
        dropped.extend(r for r in rels if r.arg[0] == "trigger" and (r.trigger, r.arg[1]) in dropped_edges)
    return events, dropped
