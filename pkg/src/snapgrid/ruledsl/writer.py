"""Canonical text form of rule sets; ``parse_rules(serialize_rules(rs)) == rs``."""

from __future__ import annotations

import json

from .parser import _BARE_VALUE, _KEYWORDS, _LABEL, _NAME, _PATH_LABEL
from .syntax import (
    ANY_CLASS,
    DepPath,
    Matcher,
    ParticipantBody,
    PathGroup,
    PathStep,
    Rule,
    RuleSet,
    TokenConstraint,
    TokenPattern,
)


def _quote(s):
    return json.dumps(s, ensure_ascii=False)


def _regex(pattern):
    out = []
    i = 0
    while i < len(pattern):
        ch = pattern[i]
        if ch == "\\" and i + 1 < len(pattern):
            out.append(pattern[i:i + 2])
            i += 2
            continue
        out.append("\\/" if ch == "/" else ch)
        i += 1
    return "/" + "".join(out) + "/"


def format_label(label):
    return label if _LABEL.fullmatch(label) else _quote(label)


def format_value(m: Matcher):
    if m.regex:
        return _regex(m.value)
    return m.value if _BARE_VALUE.fullmatch(m.value) else _quote(m.value)


def format_constraint(c: TokenConstraint) -> str:
    atoms = " & ".join(("!" if a.negated else "") + f"{a.field}={format_value(a.matcher)}" for a in c.atoms)
    return f"[{atoms}]"


def format_token_pattern(p: TokenPattern) -> str:
    parts = []
    if p.lookbehind:
        parts.append("(?<=" + " ".join(format_constraint(c) for c in p.lookbehind) + ")")
    parts.append(" ".join(format_constraint(c) for c in p.core))
    if p.lookahead:
        parts.append("(?=" + " ".join(format_constraint(c) for c in p.lookahead) + ")")
    return " ".join(parts)


def _quant(lo, hi):
    if (lo, hi) == (1, 1):
        return ""
    if (lo, hi) == (0, 1):
        return "?"
    if lo == 0:
        return f"{{,{hi}}}"
    return f"{{{lo},{hi}}}"


def _step_label(m: Matcher):
    if m.regex:
        return _regex(m.value)
    if _PATH_LABEL.fullmatch(m.value) and m.value not in _KEYWORDS:
        return m.value
    return _quote(m.value)


def _element(e) -> str:
    if isinstance(e, PathStep):
        s = e.direction + _step_label(e.label) + _quant(e.min, e.max)
        if e.dest is not None:
            s += " " + format_constraint(e.dest)
        return s
    assert isinstance(e, PathGroup)
    return "(" + " | ".join(_seq(alt) for alt in e.alternatives) + ")" + _quant(e.min, e.max)


def _seq(seq) -> str:
    return " ".join(_element(e) for e in seq)


def format_path(path: DepPath) -> str:
    return " | ".join(_seq(alt) for alt in path.alternatives)


def format_votes(votes, label_order) -> str:
    rank = {lab: i for i, lab in enumerate(label_order)}
    items = sorted(votes.items(), key=lambda kv: (rank.get(kv[0], len(rank)), kv[0]))
    return "{" + ", ".join(f"{format_label(lab)}:{int(v):+d}" for lab, v in items) + "}"


def format_body(rule: Rule) -> str:
    if rule.kind == "trigger":
        return "pattern " + format_token_pattern(rule.body.pattern)
    b: ParticipantBody = rule.body
    parts = ["on", "*" if b.trigger_class == ANY_CLASS else format_label(b.trigger_class)]
    if b.trigger is not None:
        parts += ["trig", format_constraint(b.trigger)]
    if b.path is None:
        parts.append("anywhere")
    else:
        parts += ["path", format_path(b.path)]
    if b.order is not None:
        parts += ["order", b.order]
    parts += ["arg", format_constraint(b.argument)]
    return " ".join(parts)


def format_rule(rule: Rule, label_order=()) -> str:
    name = rule.name if _NAME.fullmatch(rule.name) else _quote(rule.name)
    for lab, v in rule.votes.items():
        if int(v) != v:
            raise ValueError(f"rule {rule.name!r}: non-integer vote {v!r} for {lab!r} cannot be written")
    return (
        f"rule {name} {rule.kind}\n"
        f"  votes {format_votes(rule.votes, label_order)}\n"
        f"  {format_body(rule)}\n"
    )


def serialize_rules(ruleset: RuleSet) -> str:
    head = [f"version {ruleset.version}", "labels [" + ", ".join(format_label(l) for l in ruleset.labels) + "]"]
    if ruleset.provenance is not None:
        head.append("provenance " + _quote(ruleset.provenance))
    text = "\n".join(head) + "\n"
    for rule in ruleset.rules:
        text += "\n" + format_rule(rule, ruleset.labels)
    return text
