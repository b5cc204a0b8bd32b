"""Rule matching and vote aggregation.

Trigger rules are tested at every token; each matching rule adds its votes to
that token's tally once.  Decided triggers then seed the participant stage,
where a rule adds its votes once to every (trigger, candidate) pair it matches.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .corpus import Sentence
from .features import candidates_for
from .labels import NIL, labels_for_trigger_class, split_participant_label
from .ruledsl.syntax import (
    ANY_CLASS,
    DepPath,
    ParticipantBody,
    PathStep,
    Rule,
    RuleSet,
    TokenConstraint,
    TokenPattern,
)

# --------------------------------------------------------------------------
# constraints and patterns


def _token_values(sentence: Sentence, index: int, field_: str, entity_label):
    tok = sentence.tokens[index]
    if field_ == "word":
        return (tok.word,)
    if field_ == "lemma":
        return (tok.lemma,)
    if field_ == "tag":
        return (tok.tag,)
    if field_ == "entity":
        return (entity_label if entity_label is not None else tok.entity,)
    if field_ == "incoming":
        return tuple(e.label for e in sentence.edges if e.dependent == index)
    if field_ == "outgoing":
        return tuple(e.label for e in sentence.edges if e.head == index)
    raise ValueError(f"unknown field {field_!r}")


def match_token_constraint(c: TokenConstraint, sentence: Sentence, index: int, entity_label: Optional[str] = None) -> bool:
    """All atoms hold at ``index``.

    ``entity`` atoms compare against ``entity_label`` when given (the label of
    an argument candidate), else against the token's own entity label.
    ``incoming``/``outgoing`` atoms hold when any edge label matches.
    """
    for atom in c.atoms:
        hit = any(atom.matcher.matches(v) for v in _token_values(sentence, index, atom.field, entity_label))
        if hit == atom.negated:
            return False
    return True


def match_token_pattern(pattern: TokenPattern, sentence: Sentence, anchor: int) -> bool:
    n = len(sentence.tokens)
    for off, c in pattern.positions():
        j = anchor + off
        if not 0 <= j < n or not match_token_constraint(c, sentence, j):
            return False
    return True


# --------------------------------------------------------------------------
# dependency paths


def _neighbours(sentence: Sentence):
    out = defaultdict(list)
    for e in sentence.edges:
        out[(e.head, ">")].append((e.label, e.dependent))
        out[(e.dependent, "<")].append((e.label, e.head))
    return out


def _step_once(step: PathStep, sentence, adj, tok, visited):
    for label, nxt in adj.get((tok, step.direction), ()):
        if nxt in visited or not step.label.matches(label):
            continue
        if step.dest is not None and not match_token_constraint(step.dest, sentence, nxt):
            continue
        yield nxt, visited | {nxt}


def _walk_element(elem, sentence, adj, tok, visited):
    """``(token, visited)`` states after one traversal of ``elem`` (quantifier ignored)."""
    if isinstance(elem, PathStep):
        yield from _step_once(elem, sentence, adj, tok, visited)
    else:
        for alt in elem.alternatives:
            yield from _walk_seq(alt, 0, sentence, adj, tok, visited)


def _walk_repeated(elem, sentence, adj, tok, visited):
    frontier = [(tok, visited)]
    if elem.min == 0:
        yield tok, visited
    for r in range(1, elem.max + 1):
        nxt = []
        for t, v in frontier:
            nxt.extend(_walk_element(elem, sentence, adj, t, v))
        if not nxt:
            return
        if r >= elem.min:
            yield from nxt
        frontier = nxt


def _walk_seq(seq, i, sentence, adj, tok, visited):
    if i == len(seq):
        yield tok, visited
        return
    for t, v in _walk_repeated(seq[i], sentence, adj, tok, visited):
        yield from _walk_seq(seq, i + 1, sentence, adj, t, v)


def match_dep_path(path: DepPath, sentence: Sentence, start: int, _adj=None) -> frozenset:
    """Tokens reachable from ``start`` along ``path`` without revisiting a token."""
    adj = _adj if _adj is not None else _neighbours(sentence)
    ends = set()
    for alt in path.alternatives:
        for t, _ in _walk_seq(alt, 0, sentence, adj, start, frozenset((start,))):
            ends.add(t)
    return frozenset(ends)


# --------------------------------------------------------------------------
# tallies and decisions


def add_votes(tally: dict, votes: Mapping[str, float]):
    for lab, v in votes.items():
        tally[lab] = tally.get(lab, 0) + v


def decide(tally: Optional[Mapping[str, float]], label_order: Sequence[str], threshold: float = 0, allowed=None) -> str:
    """Label with the most votes, or Nil when nothing beats ``threshold``.

    Labels without votes count as 0.  A tie for the maximum yields Nil.
    """
    labels = [l for l in label_order if l != NIL and (allowed is None or l in allowed)]
    if not tally or not labels:
        return NIL
    totals = [(tally.get(l, 0), l) for l in labels]
    best = max(v for v, _ in totals)
    if best <= threshold:
        return NIL
    winners = [l for v, l in totals if v == best]
    return winners[0] if len(winners) == 1 else NIL


def _index_atom(pattern: TokenPattern):
    """An (offset, field, value) every match must satisfy, or None."""
    best = None
    for off, c in pattern.positions():
        for a in c.atoms:
            if not a.negated and not a.matcher.regex and a.field in ("word", "lemma", "tag"):
                key = (off, a.field, a.matcher.value)
                if best is None or (abs(off), a.field != "lemma") < (abs(best[0]), best[1] != "lemma"):
                    best = key
    return best


def _first_step_key(path: Optional[DepPath]):
    if path is None:
        return None
    steps = path.simple_steps()
    if not steps or steps[0].min == 0 or steps[0].label.regex:
        return None
    return steps[0].direction, steps[0].label.value


@dataclass
class SentenceResult:
    sentence: int
    trigger_tally: dict = field(default_factory=dict)  # token -> label -> votes
    triggers: dict = field(default_factory=dict)  # token -> class
    participant_tally: dict = field(default_factory=dict)  # (trigger token, Candidate) -> label -> votes
    relations: list = field(default_factory=list)  # (trigger token, role, Candidate)


class RuleEngine:
    """Indexes a rule set once and applies it to many sentences."""

    def __init__(self, ruleset: RuleSet, trigger_threshold: float = 0, participant_threshold: float = 0):
        self.ruleset = ruleset
        self.labels = ruleset.labels
        self.trigger_threshold = trigger_threshold
        self.participant_threshold = participant_threshold
        self._trig_index = defaultdict(list)
        self._trig_always = []
        self._offsets = set()
        self._part = defaultdict(lambda: (defaultdict(list), []))
        for rule in ruleset.rules:
            if rule.kind == "trigger":
                key = _index_atom(rule.body.pattern)
                if key is None:
                    self._trig_always.append(rule)
                else:
                    self._trig_index[key].append(rule)
                    self._offsets.add((key[0], key[1]))
            else:
                keyed, always = self._part[rule.body.trigger_class]
                key = _first_step_key(rule.body.path)
                if key is None:
                    always.append(rule)
                else:
                    keyed[key].append(rule)

    # -- trigger stage -----------------------------------------------------

    def trigger_rules_at(self, sentence: Sentence, index: int) -> list[Rule]:
        toks = sentence.tokens
        seen = {}
        for rule in self._trig_always:
            seen[id(rule)] = rule
        for off, fld in self._offsets:
            j = index + off
            if 0 <= j < len(toks):
                for rule in self._trig_index.get((off, fld, getattr(toks[j], fld)), ()):
                    seen[id(rule)] = rule
        return [r for r in seen.values() if match_token_pattern(r.body.pattern, sentence, index)]

    def tally_triggers(self, sentence: Sentence) -> dict:
        out = {}
        for i in range(len(sentence.tokens)):
            rules = self.trigger_rules_at(sentence, i)
            if rules:
                tally = {}
                for r in rules:
                    add_votes(tally, r.votes)
                out[i] = tally
        return out

    def decide_triggers(self, tallies: Mapping[int, Mapping[str, float]]) -> dict:
        out = {}
        for tok in sorted(tallies):
            lab = decide(tallies[tok], self.labels, self.trigger_threshold)
            if lab != NIL:
                out[tok] = lab
        return out

    # -- participant stage -------------------------------------------------

    def participant_rules_for(self, trigger_class: str, sentence: Sentence, trigger_token: int, adj):
        keys = {(">", lab) for lab, _ in adj.get((trigger_token, ">"), ())}
        keys |= {("<", lab) for lab, _ in adj.get((trigger_token, "<"), ())}
        out = []
        for cls in (trigger_class, ANY_CLASS):
            if cls not in self._part:
                continue
            keyed, always = self._part[cls]
            out.extend(always)
            for k in keys:
                out.extend(keyed.get(k, ()))
        return out

    def tally_participants(self, sentence: Sentence, triggers: Mapping[int, str]) -> dict:
        """``(trigger token, Candidate) -> tally`` for every pair some rule matched."""
        adj = _neighbours(sentence)
        out = {}
        for t in sorted(triggers):
            cls = triggers[t]
            cands = candidates_for(sentence, t, triggers)
            if not cands:
                continue
            path_cache = {}
            for rule in self.participant_rules_for(cls, sentence, t, adj):
                b: ParticipantBody = rule.body
                if b.trigger is not None and not match_token_constraint(b.trigger, sentence, t):
                    continue
                ends = None
                if b.path is not None:
                    ends = path_cache.get(b.path)
                    if ends is None:
                        ends = path_cache[b.path] = match_dep_path(b.path, sentence, t, adj)
                    if not ends:
                        continue
                for cand in cands:
                    if ends is not None and cand.token not in ends:
                        continue
                    if b.order is not None and (b.order == "trigger-first") != (t < cand.token):
                        continue
                    if not match_token_constraint(b.argument, sentence, cand.token, cand.label):
                        continue
                    add_votes(out.setdefault((t, cand), {}), rule.votes)
        return out

    def decide_participants(self, tallies, triggers: Mapping[int, str]) -> list:
        rels = []
        for (t, cand) in sorted(tallies):
            allowed = labels_for_trigger_class(triggers[t])
            lab = decide(tallies[(t, cand)], self.labels, self.participant_threshold, allowed)
            if lab != NIL:
                role, _ = split_participant_label(lab)
                rels.append((t, role, cand))
        return rels

    # -- whole sentences ---------------------------------------------------

    def apply(self, sentence: Sentence, triggers: Optional[Mapping[int, str]] = None) -> SentenceResult:
        """Run both stages; ``triggers`` overrides the trigger stage's decisions."""
        res = SentenceResult(sentence.index)
        res.trigger_tally = self.tally_triggers(sentence)
        res.triggers = dict(triggers) if triggers is not None else self.decide_triggers(res.trigger_tally)
        res.participant_tally = self.tally_participants(sentence, res.triggers)
        res.relations = self.decide_participants(res.participant_tally, res.triggers)
        return res


def apply_ruleset(ruleset: RuleSet, sentence: Sentence, threshold: float = 0) -> SentenceResult:
    return RuleEngine(ruleset, threshold, threshold).apply(sentence)


def tally_triggers(ruleset: RuleSet, sentence: Sentence) -> dict:
    return RuleEngine(ruleset).tally_triggers(sentence)


def tally_participants(ruleset: RuleSet, sentence: Sentence, triggers: Mapping[int, str]) -> dict:
    return RuleEngine(ruleset).tally_participants(sentence, triggers)
