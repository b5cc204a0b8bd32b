"""Pre-parsed, entity- and event-annotated documents.

One document per line in a JSON-lines file::

    {"id": str, "sentences": [{"tokens": [{"word", "lemma", "tag", "entity"?}],
                               "edges": [[head, dep, "label"]],
                               "mentions": [{"id", "head", "span": [s, e], "label"}],
                               "triggers": [{"id", "token", "class"}],
                               "relations": [{"trigger", "role", "arg"}]}]}

Documents are immutable once loaded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .labels import EVENT_CLASSES, ROLES, is_regulation


class CorpusError(Exception):
    pass


class CorpusParseError(CorpusError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


class CorpusValidationError(CorpusError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        first = self.diagnostics[0]
        extra = f" (+{len(self.diagnostics) - 1} more)" if len(self.diagnostics) > 1 else ""
        super().__init__(str(first) + extra)


@dataclass(frozen=True)
class Token:
    index: int
    word: str
    lemma: str
    tag: str
    entity: Optional[str] = None


@dataclass(frozen=True)
class DependencyEdge:
    head: int
    dependent: int
    label: str


@dataclass(frozen=True)
class EntityMention:
    id: str
    sentence: int
    head: int
    span: tuple[int, int]
    label: str = "Protein"


@dataclass(frozen=True)
class GoldTrigger:
    id: str
    sentence: int
    token: int
    event_class: str


@dataclass(frozen=True)
class GoldRelation:
    trigger: str
    role: str
    argument: str


@dataclass(frozen=True)
class Sentence:
    index: int
    tokens: tuple[Token, ...]
    edges: tuple[DependencyEdge, ...] = ()
    mentions: tuple[EntityMention, ...] = ()
    triggers: tuple[GoldTrigger, ...] = ()
    relations: tuple[GoldRelation, ...] = ()

    def __len__(self):
        return len(self.tokens)

    def outgoing(self, token):
        return [e for e in self.edges if e.head == token]

    def incoming(self, token):
        return [e for e in self.edges if e.dependent == token]


@dataclass(frozen=True)
class Document:
    id: str
    sentences: tuple[Sentence, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class Diagnostic:
    doc_id: str
    sentence: Optional[int]
    rule: str
    detail: str = ""

    def __str__(self):
        where = self.doc_id if self.sentence is None else f"{self.doc_id}[{self.sentence}]"
        return f"{where}: {self.rule}" + (f" ({self.detail})" if self.detail else "")


# --------------------------------------------------------------------------
# JSON form


def token_to_json(tok):
    d = {"word": tok.word, "lemma": tok.lemma, "tag": tok.tag}
    if tok.entity is not None:
        d["entity"] = tok.entity
    return d


def sentence_to_json(sent):
    return {
        "tokens": [token_to_json(t) for t in sent.tokens],
        "edges": [[e.head, e.dependent, e.label] for e in sent.edges],
        "mentions": [
            {"id": m.id, "head": m.head, "span": [m.span[0], m.span[1]], "label": m.label}
            for m in sent.mentions
        ],
        "triggers": [{"id": t.id, "token": t.token, "class": t.event_class} for t in sent.triggers],
        "relations": [{"trigger": r.trigger, "role": r.role, "arg": r.argument} for r in sent.relations],
    }


def document_to_json(doc):
    return {"id": doc.id, "sentences": [sentence_to_json(s) for s in doc.sentences]}


def document_from_json(record) -> Document:
    """Build a :class:`Document` from its JSON record; raises KeyError/TypeError/ValueError on bad shape."""
    if not isinstance(record, dict):
        raise TypeError("document record must be an object")
    doc_id = record["id"]
    if not isinstance(doc_id, str):
        raise TypeError("document id must be a string")
    sentences = []
    for si, s in enumerate(record.get("sentences", [])):
        tokens = tuple(
            Token(i, t["word"], t["lemma"], t["tag"], t.get("entity")) for i, t in enumerate(s["tokens"])
        )
        edges = tuple(DependencyEdge(int(h), int(d), str(lab)) for h, d, lab in s.get("edges", []))
        mentions = tuple(
            EntityMention(m["id"], si, int(m["head"]), (int(m["span"][0]), int(m["span"][1])), m.get("label", "Protein"))
            for m in s.get("mentions", [])
        )
        triggers = tuple(GoldTrigger(t["id"], si, int(t["token"]), t["class"]) for t in s.get("triggers", []))
        relations = tuple(GoldRelation(r["trigger"], r["role"], r["arg"]) for r in s.get("relations", []))
        sentences.append(Sentence(si, tokens, edges, mentions, triggers, relations))
    return Document(doc_id, tuple(sentences))


def dumps_corpus(docs: Iterable[Document]) -> str:
    return "".join(json.dumps(document_to_json(d), ensure_ascii=False) + "\n" for d in docs)


def save_corpus(docs, path):
    Path(path).write_text(dumps_corpus(docs), encoding="utf-8")


def loads_corpus(text: str, validate=True) -> list[Document]:
    docs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusParseError(lineno, f"invalid JSON: {exc.msg}") from None
        try:
            docs.append(document_from_json(record))
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise CorpusParseError(lineno, f"malformed record: {exc!r}") from None
    if validate:
        diags = validate_corpus(docs)
        if diags:
            raise CorpusValidationError(diags)
    return docs


def load_corpus(path, validate=True) -> list[Document]:
    """Read and validate a JSON-lines corpus."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"corpus not found: {path}")
    return loads_corpus(path.read_text(encoding="utf-8"), validate=validate)


# --------------------------------------------------------------------------
# validation


def validate_corpus(docs: Iterable[Document]) -> list[Diagnostic]:
    """Every invariant violation as a diagnostic; empty list means the corpus is clean."""
    out: list[Diagnostic] = []
    for doc in docs:
        out.extend(_validate_document(doc))
    return out


def _validate_document(doc):
    diags = []

    def flag(sent, rule, detail=""):
        diags.append(Diagnostic(doc.id, sent, rule, detail))

    seen_ids = set()
    for pos, sent in enumerate(doc.sentences):
        si = sent.index
        if si != pos:
            flag(si, "sentence index not contiguous", f"expected {pos}")
        n = len(sent.tokens)
        for i, tok in enumerate(sent.tokens):
            if tok.index != i:
                flag(si, "token index mismatch", f"token {i} carries index {tok.index}")
            for name in ("word", "lemma"):
                value = getattr(tok, name)
                if not value:
                    flag(si, f"empty {name}", f"token {i}")
                elif any(ch.isspace() for ch in value):
                    flag(si, f"whitespace in {name}", f"token {i}")
        seen_edges = set()
        for e in sent.edges:
            if not 0 <= e.head < n:
                flag(si, "edge head out of range", f"{e.label}({e.head}->{e.dependent})")
            if not 0 <= e.dependent < n:
                flag(si, "edge dependent out of range", f"{e.label}({e.head}->{e.dependent})")
            if e.head == e.dependent:
                flag(si, "self-loop edge", f"{e.label}({e.head})")
            if not e.label or any(ch.isspace() for ch in e.label):
                flag(si, "bad edge label", repr(e.label))
            key = (e.head, e.dependent, e.label)
            if key in seen_edges:
                flag(si, "duplicate edge", f"{e.label}({e.head}->{e.dependent})")
            seen_edges.add(key)

        local = {}
        for m in sent.mentions:
            if m.id in seen_ids:
                flag(si, "duplicate id", m.id)
            seen_ids.add(m.id)
            local[m.id] = ("mention", m)
            s, e = m.span
            if not (0 <= s < e <= n):
                flag(si, "mention span out of range", m.id)
            elif not (s <= m.head < e):
                flag(si, "mention head outside span", m.id)
            if m.sentence != si:
                flag(si, "mention sentence mismatch", m.id)
        for t in sent.triggers:
            if t.id in seen_ids:
                flag(si, "duplicate id", t.id)
            seen_ids.add(t.id)
            local[t.id] = ("trigger", t)
            if not 0 <= t.token < n:
                flag(si, "trigger token out of range", t.id)
            if t.event_class not in EVENT_CLASSES:
                flag(si, "unknown event class", f"{t.id}: {t.event_class}")
        for r in sent.relations:
            kind, trig = local.get(r.trigger, (None, None))
            if kind != "trigger":
                flag(si, "relation cites unknown trigger", r.trigger)
                continue
            if r.role not in ROLES:
                flag(si, "unknown role", f"{r.trigger}: {r.role}")
            if r.argument not in local:
                flag(si, "relation cites unknown argument", r.argument)
            elif r.argument == r.trigger:
                flag(si, "relation argument is its own trigger", r.argument)
            if r.role == "Cause" and not is_regulation(trig.event_class):
                flag(si, "Cause on non-regulation trigger", f"{r.trigger} ({trig.event_class})")
    return diags


# --------------------------------------------------------------------------
# helpers used downstream


def trigger_lookup(sentence: Sentence):
    return {t.id: t for t in sentence.triggers}


def mention_lookup(sentence: Sentence):
    return {m.id: m for m in sentence.mentions}
