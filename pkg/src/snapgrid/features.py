"""Feature extraction for the trigger and participant classifiers.

Feature ids are plain strings ``namespace:payload``.  Whether a feature can be
compiled into a rule depends on its namespace only (see :func:`is_convertible`).
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from .corpus import Sentence
from .labels import EVENT_SUPERCLASS, is_event_class

WINDOWS = (1, 4)
WIDE = max(WINDOWS)
NOPATH = "NOPATH"

FeatureVector = dict  # rendered feature id -> positive count


@dataclass(frozen=True)
class FeatureId:
    namespace: str
    payload: str

    def __str__(self):
        return f"{self.namespace}:{self.payload}"

    @classmethod
    def parse(cls, text):
        namespace, sep, payload = str(text).partition(":")
        if not sep:
            raise ValueError(f"feature id without namespace separator: {text!r}")
        return cls(namespace, payload)


# namespace -> convertible?
NAMESPACES = {
    # trigger classifier
    "trig.word": True,
    "trig.lemma": True,
    "trig.gaz": True,
    "trig.bow.w1": False,
    "trig.bow.w4": False,
    "trig.bow.sent": False,
    "trig.dep": False,
    "trig.dep.lex": False,
    "trig.entcount.w4": False,
    "trig.entcount.sent": False,
    # participant classifier
    "part.path": True,
    "part.path.typed": True,
    "part.path.lex": True,
    "part.nopath": False,
    "part.order": True,
    "part.dist": False,
    "part.count.ent.sent": False,
    "part.count.trig.sent": False,
    "part.count.ent.between": False,
    "part.count.trig.between": False,
    "part.trig.tag": True,
    "part.trig.lemma": True,
    "part.arg.tag": True,
    "part.arg.lemma": True,
    "part.cons": True,
    "part.cons.super": True,
    "part.graph.trig.parent": False,
    "part.graph.trig.child": False,
    "part.graph.trig.sib": False,
    "part.graph.arg.parent": False,
    "part.graph.arg.child": False,
    "part.graph.arg.sib": False,
}


def namespace_of(feature) -> str:
    if isinstance(feature, FeatureId):
        return feature.namespace
    return str(feature).partition(":")[0]


def is_convertible(feature) -> bool:
    """True iff the feature's namespace can be expressed in the rule language."""
    ns = namespace_of(feature)
    try:
        return NAMESPACES[ns]
    except KeyError:
        raise KeyError(f"unknown feature namespace: {ns!r}") from None


def convertible_only(vector: Mapping[str, int]) -> FeatureVector:
    return {f: c for f, c in vector.items() if is_convertible(f)}


def bucket(count: int) -> str:
    if count <= 2:
        return str(count)
    if count <= 5:
        return "3-5"
    return "6+"


def render_offset(offset: int) -> str:
    return f"+{offset}" if offset > 0 else str(offset)


def parse_offset(text: str) -> int:
    return int(text)


def build_gazetteer(docs) -> frozenset:
    """Lemmas of every gold trigger token in ``docs``."""
    lemmas = set()
    for doc in docs:
        for sent in doc.sentences:
            for trig in sent.triggers:
                lemmas.add(sent.tokens[trig.token].lemma)
    return frozenset(lemmas)


# --------------------------------------------------------------------------
# trigger features


def extract_trigger_features(sentence: Sentence, index: int, gazetteer: Iterable[str] = frozenset()) -> FeatureVector:
    toks = sentence.tokens
    n = len(toks)
    if not 0 <= index < n:
        raise IndexError(f"token index {index} out of range for {n}-token sentence")
    gaz = gazetteer if isinstance(gazetteer, (set, frozenset)) else frozenset(gazetteer)
    vec: Counter = Counter()

    # positional surface features; the 1-window positions are a subset of the 4-window ones
    for off in range(-WIDE, WIDE + 1):
        j = index + off
        if not 0 <= j < n:
            continue
        o = render_offset(off)
        vec[f"trig.word:{o}={toks[j].word}"] += 1
        vec[f"trig.lemma:{o}={toks[j].lemma}"] += 1
        if toks[j].lemma in gaz:
            vec[f"trig.gaz:{o}"] += 1

    for size in WINDOWS:
        for j in range(max(0, index - size), min(n, index + size + 1)):
            if j != index:
                vec[f"trig.bow.w{size}:{toks[j].lemma}"] += 1
    for j, tok in enumerate(toks):
        if j != index:
            vec[f"trig.bow.sent:{tok.lemma}"] += 1

    for e in sentence.edges:
        if e.head == index:
            vec[f"trig.dep:out:{e.label}"] += 1
            vec[f"trig.dep.lex:out:{e.label}={toks[e.dependent].lemma}"] += 1
        if e.dependent == index:
            vec[f"trig.dep:in:{e.label}"] += 1
            vec[f"trig.dep.lex:in:{e.label}={toks[e.head].lemma}"] += 1

    near = sum(1 for m in sentence.mentions if m.head != index and abs(m.head - index) <= WIDE)
    total = sum(1 for m in sentence.mentions if m.head != index)
    vec[f"trig.entcount.w4:{bucket(near)}"] += 1
    vec[f"trig.entcount.sent:{bucket(total)}"] += 1
    return dict(vec)


# --------------------------------------------------------------------------
# dependency paths


def _adjacency(sentence):
    adj = {i: [] for i in range(len(sentence.tokens))}
    for e in sentence.edges:
        adj[e.head].append((f">{e.label}", e.dependent))
        adj[e.dependent].append((f"<{e.label}", e.head))
    return adj


def shortest_path(sentence: Sentence, source: int, target: int):
    """Shortest undirected path from ``source`` to ``target``.

    Returns ``(steps, nodes)`` where ``steps`` are direction-tagged labels
    (``">lab"`` follows head->dependent) and ``nodes`` the visited tokens after
    ``source``; ``None`` when the tokens are disconnected.  Among equally short
    paths the lexicographically smallest step sequence wins, then the smallest
    sequence of intermediate lemmas.
    """
    if source == target:
        return (), ()
    adj = _adjacency(sentence)
    dist = {target: 0}
    queue = deque([target])
    while queue:
        u = queue.popleft()
        for _, v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    if source not in dist:
        return None

    # greedy lexicographic descent over frontier sets
    steps = []
    frontier = {source}
    while dist[next(iter(frontier))] > 0:
        d = dist[next(iter(frontier))]
        best = min(s for u in frontier for s, v in adj[u] if dist.get(v) == d - 1)
        steps.append(best)
        frontier = {v for u in frontier for s, v in adj[u] if s == best and dist.get(v) == d - 1}

    # concrete realisations of that step sequence; pick smallest lemma sequence
    lemmas = [t.lemma for t in sentence.tokens]
    best_nodes = None
    stack = [(source, ())]
    while stack:
        u, nodes = stack.pop()
        k = len(nodes)
        if k == len(steps):
            if nodes[-1] == target:
                key = tuple(lemmas[x] for x in nodes[:-1])
                if best_nodes is None or key < tuple(lemmas[x] for x in best_nodes[:-1]):
                    best_nodes = nodes
            continue
        for s, v in adj[u]:
            if s == steps[k] and dist.get(v) == len(steps) - k - 1:
                stack.append((v, nodes + (v,)))
    return tuple(steps), best_nodes


def render_path(steps) -> str:
    return " ".join(steps)


def render_lex_path(steps, nodes, sentence: Sentence) -> str:
    parts = []
    for k, step in enumerate(steps):
        parts.append(step)
        if k < len(steps) - 1:
            parts.append("=" + sentence.tokens[nodes[k]].lemma)
    return " ".join(parts)


def parse_rendered_path(text: str):
    """Inverse of the path renderers: list of ``(direction, label, lemma_or_None)``.

    The lemma, when present, constrains the step's destination token.
    """
    items = text.split(" ")
    out = []
    for item in items:
        if item.startswith("="):
            if not out or out[-1][2] is not None:
                raise ValueError(f"misplaced lemma in rendered path: {text!r}")
            d, lab, _ = out[-1]
            out[-1] = (d, lab, item[1:])
        elif item[:1] in (">", "<") and len(item) > 1:
            out.append((item[0], item[1:], None))
        else:
            raise ValueError(f"bad rendered path element {item!r} in {text!r}")
    return out


# --------------------------------------------------------------------------
# participant features


@dataclass(frozen=True, order=True)
class Candidate:
    """A potential event participant: an entity mention or another trigger.

    ``ref`` is ``("mention", id)`` or ``("trigger", token)``.
    """

    token: int
    label: str
    ref: tuple


def candidates_for(sentence: Sentence, trigger_token: int, triggers: Mapping[int, str]) -> list[Candidate]:
    """All mentions and other triggers of the sentence, excluding anything at the trigger token."""
    out = [
        Candidate(m.head, m.label, ("mention", m.id))
        for m in sentence.mentions
        if m.head != trigger_token
    ]
    out.extend(
        Candidate(tok, cls, ("trigger", tok)) for tok, cls in sorted(triggers.items()) if tok != trigger_token
    )
    return out


def _superclass(label):
    return EVENT_SUPERCLASS if is_event_class(label) else None


def _graph_features(sentence, token, side, vec):
    parents = [e for e in sentence.edges if e.dependent == token]
    for e in parents:
        vec[f"part.graph.{side}.parent:{e.label}"] += 1
        for sib in sentence.edges:
            if sib.head == e.head and sib.dependent != token:
                vec[f"part.graph.{side}.sib:{sib.label}"] += 1
    for e in sentence.edges:
        if e.head == token:
            vec[f"part.graph.{side}.child:{e.label}"] += 1


def extract_participant_features(
    sentence: Sentence,
    trigger_token: int,
    trigger_label: str,
    candidate: Candidate,
    triggers: Optional[Mapping[int, str]] = None,
) -> FeatureVector:
    """Features of the (trigger, candidate) pair.

    ``triggers`` maps every trigger token of the sentence to its class; it feeds
    the trigger counts and defaults to just the pair's own trigger.
    """
    if triggers is None:
        triggers = {trigger_token: trigger_label}
    toks = sentence.tokens
    t, c = trigger_token, candidate.token
    vec: Counter = Counter()

    found = shortest_path(sentence, t, c)
    if found is None or not found[0]:
        vec[f"part.nopath:{NOPATH}"] += 1
    else:
        steps, nodes = found
        path = render_path(steps)
        vec[f"part.path:{path}"] += 1
        vec[f"part.path.typed:{trigger_label}|{path}|{candidate.label}"] += 1
        vec[f"part.path.lex:{render_lex_path(steps, nodes, sentence)}"] += 1

    vec["part.order:" + ("trigger-first" if t < c else "arg-first")] += 1
    vec[f"part.dist:{bucket(abs(c - t))}"] += 1

    lo, hi = min(t, c), max(t, c)
    mention_heads = [m.head for m in sentence.mentions]
    vec[f"part.count.ent.sent:{bucket(len(mention_heads))}"] += 1
    vec[f"part.count.trig.sent:{bucket(len(triggers))}"] += 1
    vec[f"part.count.ent.between:{bucket(sum(1 for h in mention_heads if lo < h < hi))}"] += 1
    vec[f"part.count.trig.between:{bucket(sum(1 for h in triggers if lo < h < hi))}"] += 1

    vec[f"part.trig.tag:{toks[t].tag}"] += 1
    vec[f"part.trig.lemma:{toks[t].lemma}"] += 1
    vec[f"part.arg.tag:{toks[c].tag}"] += 1
    vec[f"part.arg.lemma:{toks[c].lemma}"] += 1

    vec[f"part.cons:<{trigger_label},{candidate.label}>"] += 1
    sup = _superclass(candidate.label)
    if sup is not None:
        vec[f"part.cons.super:<{trigger_label},{sup}>"] += 1

    _graph_features(sentence, t, "trig", vec)
    _graph_features(sentence, c, "arg", vec)
    return dict(vec)
