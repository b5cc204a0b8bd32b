"""Static checks and editing utilities over parsed rule sets."""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from ..labels import EVENT_CLASSES, NIL, PARTICIPANT_LABELS, TRIGGER_LABELS
from .syntax import (
    ANY_CLASS,
    MAX_REPEAT,
    DepPath,
    ParticipantBody,
    PathGroup,
    PathStep,
    Rule,
    RuleSet,
)


@dataclass(frozen=True)
class RuleDiagnostic:
    rule: str
    problem: str

    def __str__(self):
        return f"{self.rule}: {self.problem}"


def _constraints_of(rule: Rule):
    if rule.kind == "trigger":
        p = rule.body.pattern
        yield from p.lookbehind
        yield from p.core
        yield from p.lookahead
        return
    b: ParticipantBody = rule.body
    yield b.argument
    if b.trigger is not None:
        yield b.trigger
    if b.path is not None:
        for step in _steps_of(b.path):
            if step.dest is not None:
                yield step.dest


def _steps_of(path: DepPath):
    def walk(seq):
        for e in seq:
            if isinstance(e, PathStep):
                yield e
            else:
                for alt in e.alternatives:
                    yield from walk(alt)

    for alt in path.alternatives:
        yield from walk(alt)


def _elements_of(path: DepPath):
    def walk(seq):
        for e in seq:
            yield e
            if isinstance(e, PathGroup):
                for alt in e.alternatives:
                    yield from walk(alt)

    for alt in path.alternatives:
        yield from walk(alt)


def _regex_sources(rule: Rule):
    for c in _constraints_of(rule):
        for a in c.atoms:
            if a.matcher.regex:
                yield a.matcher.value
    if rule.kind == "participant" and rule.body.path is not None:
        for step in _steps_of(rule.body.path):
            if step.label.regex:
                yield step.label.value


def validate_ruleset(ruleset: RuleSet) -> list[RuleDiagnostic]:
    """Problems that make a rule set unusable or suspicious; ``[]`` when clean."""
    out = []
    header = set(ruleset.labels)
    seen = set()
    for rule in ruleset.rules:
        flag = lambda msg, r=rule: out.append(RuleDiagnostic(r.name, msg))
        if rule.name in seen:
            flag("duplicate rule name")
        seen.add(rule.name)
        for src in _regex_sources(rule):
            try:
                re.compile(src)
            except re.error as exc:
                flag(f"regex /{src}/ does not compile: {exc}")
        if not rule.votes:
            flag("no votes")
        allowed = TRIGGER_LABELS if rule.kind == "trigger" else PARTICIPANT_LABELS
        for lab, v in rule.votes.items():
            if lab == NIL:
                flag("Nil receives votes")
            elif lab not in header:
                flag(f"vote label {lab!r} not in header label order")
            elif lab not in allowed:
                flag(f"vote label {lab!r} is not a {rule.kind} label")
            if v == 0:
                flag(f"zero vote for {lab!r}")
        if rule.kind == "trigger":
            if len(rule.body.pattern.core) != 1:
                flag("trigger pattern core must be exactly one token")
        else:
            b = rule.body
            if b.trigger_class != ANY_CLASS and b.trigger_class not in EVENT_CLASSES:
                flag(f"trigger class {b.trigger_class!r} is not an event class")
            if b.path is not None:
                for e in _elements_of(b.path):
                    if e.min not in (0, 1) or not 1 <= e.max <= MAX_REPEAT or e.min > e.max:
                        flag(f"bad repetition {{{e.min},{e.max}}}")
    return out


# --------------------------------------------------------------------------
# merging


def _merge_key(rule: Rule):
    b = rule.body
    return (rule.kind, b.trigger_class, b.argument, b.trigger, b.order, tuple(sorted(rule.votes.items())))


def _extends(short: tuple, long: tuple):
    """True if ``long`` is ``short`` plus one obligatory trailing step."""
    return len(long) == len(short) + 1 and long[:-1] == short and (long[-1].min, long[-1].max) == (1, 1)


def merge_rules(ruleset: RuleSet) -> RuleSet:
    """Fold ``P`` and ``P >x`` rules with identical everything-else into ``P >x?``.

    Applied until no pair qualifies.  The merged rule keeps the shorter rule's
    name and position.  Engine tallies are unchanged whenever no token is
    reachable through both the shorter and the longer path, which always holds
    on dependency trees.
    """
    rules = list(ruleset.rules)
    changed = True
    while changed:
        changed = False
        for i, short in enumerate(rules):
            if short.kind != "participant" or short.body.path is None:
                continue
            s_steps = short.body.path.simple_steps()
            if s_steps is None:
                continue
            key = _merge_key(short)
            for j, long in enumerate(rules):
                if j == i or long.kind != "participant" or long.body.path is None:
                    continue
                l_steps = long.body.path.simple_steps()
                if l_steps is None or _merge_key(long) != key or not _extends(s_steps, l_steps):
                    continue
                tail = replace(l_steps[-1], min=0, max=1)
                merged_path = DepPath.of(*s_steps, tail)
                rules[i] = replace(short, body=replace(short.body, path=merged_path))
                del rules[j]
                changed = True
                break
            if changed:
                break
    return ruleset.replace_rules(rules)


# --------------------------------------------------------------------------
# diffing


@dataclass
class RuleDiff:
    added: list
    removed: list
    changed: list  # names whose votes or body differ

    def summary(self):
        return f"{len(self.added)} added, {len(self.removed)} removed, {len(self.changed)} changed"


def diff_rules(old: RuleSet, new: RuleSet) -> RuleDiff:
    a, b = old.by_name(), new.by_name()
    added = [n for n in b if n not in a]
    removed = [n for n in a if n not in b]
    changed = [n for n in a if n in b and a[n] != b[n]]
    return RuleDiff(added, removed, changed)


def combine_rulesets(*rulesets: RuleSet, provenance=None) -> RuleSet:
    """Concatenate rule sets; the header lists every non-Nil label once, then Nil."""
    labels = []
    for rs in rulesets:
        labels.extend(l for l in rs.labels if l != NIL and l not in labels)
    labels.append(NIL)
    rules = [r for rs in rulesets for r in rs.rules]
    return RuleSet(tuple(labels), tuple(rules), 1, provenance)
