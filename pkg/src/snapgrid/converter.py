"""SnapToGrid: compile a trained classifier into a rule set with integer votes.

Weights are first expressed relative to Nil, ``w'(y, f) = w(y, f) - w(Nil, f)``
and ``b'(y) = b(y) - b(Nil)``.  This leaves every argmax and every softmax
unchanged, gives Nil a constant score of zero and lets rules carry no Nil votes
at all.  The per-label biases become one ``prior`` rule that fires on every
candidate, so the decision threshold against Nil is simply 0.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np

from .features import FeatureId, is_convertible, parse_offset, parse_rendered_path
from .labels import EVENT_CLASSES, NIL
from .learner import LRModel
from .ruledsl.checks import combine_rulesets
from .ruledsl.syntax import (
    ANY_CLASS,
    ANY_TOKEN,
    Atom,
    DepPath,
    Matcher,
    ParticipantBody,
    PathStep,
    Rule,
    RuleSet,
    TokenConstraint,
    TokenPattern,
    TriggerBody,
)

PRIOR_RULES = {"trigger": "trig.prior", "participant": "part.prior"}


class ConversionError(ValueError):
    pass


class DegenerateWeightsError(ConversionError):
    pass


class NonConvertibleError(ConversionError):
    pass


@dataclass(frozen=True)
class VoteGrid:
    """Uniform histogram bins of width ``h`` with 0 as a bin boundary."""

    h: float
    n: int
    sigma_hat: float
    origin: float = 0.0

    def __post_init__(self):
        if not self.h > 0 or not math.isfinite(self.h):
            raise ValueError(f"bin width must be positive and finite, got {self.h!r}")

    def votes(self, w: float) -> int:
        return weight_to_votes(w, self)

    def to_json(self):
        return {"h": self.h, "n": self.n, "sigma_hat": self.sigma_hat, "origin": self.origin}


def scott_bin_width(weights: Iterable[float]) -> VoteGrid:
    """Scott's normal-reference bin width ``3.5 * sd * n**(-1/3)``."""
    w = np.asarray(list(weights), dtype=float)
    n = w.size
    if n == 0:
        raise ValueError("scott_bin_width needs at least one weight")
    if n < 2:
        raise DegenerateWeightsError("degenerate weight distribution: a single weight has no spread")
    sigma = float(np.std(w, ddof=1))
    if not sigma > 0:
        raise DegenerateWeightsError("degenerate weight distribution: all weights are equal")
    return VoteGrid(3.5 * sigma * n ** (-1.0 / 3.0), n, sigma)


def weight_to_votes(w: float, grid: VoteGrid) -> int:
    """``sign(w) * ceil(|w| / h)``; an exact multiple ``k*h`` stays in the inner bin ``k``."""
    if w == 0:
        return 0
    q = abs(w) / grid.h
    k = round(q)
    if k >= 1 and math.isclose(q, k, rel_tol=1e-12, abs_tol=0.0):
        votes = k
    else:
        votes = math.ceil(q)
    return votes if w > 0 else -votes


# --------------------------------------------------------------------------
# features -> rule bodies


def _exact(field_, value):
    return TokenConstraint((Atom(field_, Matcher(value)),))


def _alternation(values):
    return "^(?:" + "|".join(re.escape(v) for v in sorted(values)) + ")$"


def _positioned(offset, constraint) -> TokenPattern:
    if offset == 0:
        return TokenPattern((constraint,))
    if offset > 0:
        return TokenPattern((ANY_TOKEN,), lookahead=(ANY_TOKEN,) * (offset - 1) + (constraint,))
    return TokenPattern((ANY_TOKEN,), lookbehind=(constraint,) + (ANY_TOKEN,) * (-offset - 1))


def _path(rendered, lexicalized=False) -> DepPath:
    steps = []
    for direction, label, lemma in parse_rendered_path(rendered):
        dest = _exact("lemma", lemma) if (lexicalized and lemma is not None) else None
        steps.append(PathStep(direction, Matcher(label), 1, 1, dest))
    return DepPath.of(*steps)


def _pair(payload):
    m = re.fullmatch(r"<([^,]*),(.*)>", payload)
    if m is None:
        raise ValueError(f"malformed label pair {payload!r}")
    return m.group(1), m.group(2)


def feature_body(feature: str, gazetteer: Iterable[str] = ()):
    """Rule body that fires exactly where ``feature`` is present."""
    fid = FeatureId.parse(feature)
    ns, payload = fid.namespace, fid.payload
    if not is_convertible(feature):
        raise NonConvertibleError(f"non-convertible: {ns}")
    if ns in ("trig.word", "trig.lemma"):
        off, _, value = payload.partition("=")
        return TriggerBody(_positioned(parse_offset(off), _exact(ns[5:], value)))
    if ns == "trig.gaz":
        gaz = TokenConstraint((Atom("lemma", Matcher(_alternation(gazetteer), regex=True)),))
        return TriggerBody(_positioned(parse_offset(payload), gaz))
    if ns == "part.path":
        return ParticipantBody(ANY_CLASS, ANY_TOKEN, _path(payload))
    if ns == "part.path.lex":
        return ParticipantBody(ANY_CLASS, ANY_TOKEN, _path(payload, lexicalized=True))
    if ns == "part.path.typed":
        trig_label, rest = payload.split("|", 1)
        path, arg_label = rest.rsplit("|", 1)
        return ParticipantBody(trig_label, _exact("entity", arg_label), _path(path))
    if ns == "part.order":
        return ParticipantBody(ANY_CLASS, ANY_TOKEN, order=payload)
    if ns in ("part.trig.tag", "part.trig.lemma"):
        return ParticipantBody(ANY_CLASS, ANY_TOKEN, trigger=_exact(ns.rsplit(".", 1)[1], payload))
    if ns in ("part.arg.tag", "part.arg.lemma"):
        return ParticipantBody(ANY_CLASS, _exact(ns.rsplit(".", 1)[1], payload))
    if ns == "part.cons":
        trig_label, arg_label = _pair(payload)
        return ParticipantBody(trig_label, _exact("entity", arg_label))
    if ns == "part.cons.super":
        trig_label, _ = _pair(payload)
        events = TokenConstraint((Atom("entity", Matcher(_alternation(EVENT_CLASSES), regex=True)),))
        return ParticipantBody(trig_label, events)
    raise NonConvertibleError(f"no translation for namespace {ns}")


def feature_to_rule(feature: str, votes: Mapping[str, float], gazetteer: Iterable[str] = ()) -> Rule:
    body = feature_body(feature, gazetteer)
    clean = {lab: v for lab, v in votes.items() if v != 0}
    if not clean:
        raise ConversionError(f"feature {feature!r} has no non-zero votes")
    if NIL in clean:
        raise ConversionError("rules never carry Nil votes")
    kind = "trigger" if isinstance(body, TriggerBody) else "participant"
    return Rule(str(feature), kind, clean, body)


def prior_rule(kind: str, votes: Mapping[str, float]) -> Rule:
    """Rule that fires on every candidate of its classifier."""
    if kind == "trigger":
        body = TriggerBody(TokenPattern((ANY_TOKEN,)))
    else:
        body = ParticipantBody(ANY_CLASS, ANY_TOKEN)
    return Rule(PRIOR_RULES[kind], kind, {l: v for l, v in votes.items() if v != 0}, body)


# --------------------------------------------------------------------------
# whole models


@dataclass
class ConversionReport:
    classifier: str
    grid: Optional[VoteGrid]
    continuous: bool = False
    dropped: list = field(default_factory=list)  # [{"feature", "reason"}]
    nil_votes: dict = field(default_factory=dict)  # feature -> votes of its raw Nil weight
    prior_votes: dict = field(default_factory=dict)
    histogram: dict = field(default_factory=dict)  # vote value -> count of (label, feature) entries
    rule_count: int = 0
    threshold: int = 0

    def to_json(self):
        return {
            "classifier": self.classifier,
            "continuous": self.continuous,
            "grid": None if self.grid is None else self.grid.to_json(),
            "rule_count": self.rule_count,
            "threshold": self.threshold,
            "prior_votes": self.prior_votes,
            "vote_histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "dropped": self.dropped,
            "nil_votes": self.nil_votes,
        }

    def summary(self):
        counts = Counter(d["reason"] for d in self.dropped)
        grid = "none" if self.grid is None else f"h={self.grid.h:.6g} n={self.grid.n} sigma={self.grid.sigma_hat:.6g}"
        return (
            f"{self.classifier}: {self.rule_count} rules, {grid}, dropped "
            f"{counts.get('non-convertible', 0)} non-convertible / {counts.get('zero-votes', 0)} zero-vote features"
        )


def relative_weights(model: LRModel):
    """``(feature -> label -> w'(y, f), label -> b'(y))`` for the non-Nil labels."""
    labels = [l for l in model.labels if l != NIL]
    nil_b = model.bias.get(NIL, 0.0)
    prior = {l: model.bias[l] - nil_b for l in labels}
    rel = {}
    for feat in sorted(model.weights):
        row = model.weights[feat]
        nil_w = row.get(NIL, 0.0)
        d = {l: row.get(l, 0.0) - nil_w for l in labels}
        d = {l: w for l, w in d.items() if w != 0.0}
        if d:
            rel[feat] = d
    return rel, prior


def convert_model(
    model: LRModel,
    which: Optional[str] = None,
    continuous: bool = False,
    grid: Optional[VoteGrid] = None,
):
    """``(RuleSet, ConversionReport)`` for one classifier.

    ``continuous=True`` keeps the relative weights as (real-valued) votes; such
    rule sets are for testing and cannot be written to a rule file.
    """
    which = which or model.meta.get("classifier")
    if which not in PRIOR_RULES:
        raise ValueError(f"classifier must be 'trigger' or 'participant', got {which!r}")
    gazetteer = model.meta.get("gazetteer", ())
    report = ConversionReport(which, None, continuous)

    rel, prior = relative_weights(model)
    kept = {}
    for feat in sorted(model.weights):
        if not is_convertible(feat):
            report.dropped.append({"feature": feat, "reason": "non-convertible"})
        elif feat in rel:
            kept[feat] = rel[feat]
        else:
            report.dropped.append({"feature": feat, "reason": "zero-votes"})

    if continuous:
        vote = lambda w: w
    else:
        if grid is None:
            sample = [w for row in kept.values() for w in row.values()]
            grid = scott_bin_width(sample) if sample else None
        report.grid = grid
        vote = (lambda w: weight_to_votes(w, grid)) if grid is not None else (lambda w: 0)

    rules = []
    prior_votes = {l: vote(w) for l, w in prior.items() if vote(w) != 0}
    report.prior_votes = dict(prior_votes)
    if prior_votes:
        rules.append(prior_rule(which, prior_votes))
    hist: Counter = Counter()
    for feat, row in kept.items():
        votes = {l: vote(w) for l, w in row.items()}
        votes = {l: v for l, v in votes.items() if v != 0}
        nil_w = model.weights[feat].get(NIL, 0.0)
        if nil_w != 0.0:
            report.nil_votes[feat] = vote(nil_w)
        if not votes:
            report.dropped.append({"feature": feat, "reason": "zero-votes"})
            continue
        if not continuous:
            hist.update(votes.values())
        rules.append(feature_to_rule(feat, votes, gazetteer))
    report.histogram = dict(hist)
    report.rule_count = len(rules)
    rules.sort(key=lambda r: (r.name not in PRIOR_RULES.values(), r.name))
    provenance = f"SnapToGrid conversion of the {which} classifier"
    return RuleSet(tuple(model.labels), tuple(rules), 1, provenance), report


def convert_models(trigger_model: LRModel, participant_model: LRModel, continuous=False):
    """Both classifiers into one rule set; returns ``(RuleSet, [reports])``."""
    trig_rs, trig_rep = convert_model(trigger_model, "trigger", continuous)
    part_rs, part_rep = convert_model(participant_model, "participant", continuous)
    combined = combine_rulesets(trig_rs, part_rs, provenance="SnapToGrid conversion")
    return combined, [trig_rep, part_rep]


def reports_to_json(reports) -> str:
    return json.dumps({r.classifier: r.to_json() for r in reports}, indent=1, sort_keys=False) + "\n"
