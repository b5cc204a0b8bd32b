"""Recursive-descent parser for rule files and stand-alone pattern fragments.

File grammar (whitespace-insensitive, ``#`` starts a comment)::

    file        := header rule*
    header      := "version" INT "labels" "[" LABEL ("," LABEL)* "]" ("provenance" STRING)?
    rule        := "rule" NAME ("trigger" | "participant") votes body
    votes       := "votes" "{" LABEL ":" SIGNED_INT ("," LABEL ":" SIGNED_INT)* "}"
    body        := "pattern" tokpat
                 | "on" (EVENTCLASS | "*") ("trig" tokconstraint)?
                   ("path" path | "anywhere") ("order" ORDER)? "arg" tokconstraint
    tokpat      := ("(?<=" tokseq ")")? tokseq ("(?=" tokseq ")")?
    tokconstraint := "[" (atom ("&" atom)*)? "]"
    atom        := "!"? FIELD "=" (STRING | REGEX)
    path        := seq ("|" seq)*
    seq         := (step | "(" path ")" quant?)+
    step        := (">" | "<")? (LABEL | REGEX | STRING) quant? tokconstraint?
    quant       := "?" | "{," INT "}" | "{" INT "," INT "}"

A step without a direction is outgoing.  Inside lookaround a bare word ``W``
abbreviates ``[word=W]``.
"""

from __future__ import annotations

import json
import re

from ..labels import NIL
from .syntax import (
    ANY_CLASS,
    FIELDS,
    MAX_REPEAT,
    ORDERS,
    Atom,
    DepPath,
    Matcher,
    ParticipantBody,
    PathGroup,
    PathStep,
    Rule,
    RuleSet,
    TokenConstraint,
    TokenPattern,
    TriggerBody,
)


class RuleSyntaxError(ValueError):
    def __init__(self, message, line, column):
        super().__init__(f"{message} at line {line}, column {column}")
        self.message = message
        self.line = line
        self.column = column


_LABEL = re.compile(r"[A-Za-z_][\w\-]*(?::[A-Za-z_][\w\-]*)?")
_PATH_LABEL = re.compile(r"[A-Za-z_][\w:\-]*")
_NAME = re.compile(r"[^\s\"#{}\[\]]+")
_INT = re.compile(r"[+-]?\d+")
_BARE_VALUE = re.compile(r"[^\s\]\[&\"/=!()#][^\s\]\[&\"()]*")
_BARE_WORD = re.compile(r"[^\s\]\[&\"/()?=!<>|{}]+")
_STRING = re.compile(r'"(?:[^"\\]|\\.)*"')
_KEYWORDS = {"rule", "order", "arg", "anywhere", "path", "trig", "on", "votes", "pattern"}


class _Scanner:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    # -- position helpers ----------------------------------------------------

    def where(self, pos=None):
        pos = self.pos if pos is None else pos
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def error(self, message, pos=None):
        line, col = self.where(pos)
        return RuleSyntaxError(message, line, col)

    def skip(self):
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch.isspace():
                self.pos += 1
            elif ch == "#":
                nl = text.find("\n", self.pos)
                self.pos = len(text) if nl < 0 else nl + 1
            else:
                break

    def at_end(self):
        self.skip()
        return self.pos >= len(self.text)

    def peek(self, literal):
        self.skip()
        return self.text.startswith(literal, self.pos)

    def peek_word(self, word):
        """True if the next token is the keyword ``word`` (not a prefix of a longer word)."""
        self.skip()
        end = self.pos + len(word)
        if not self.text.startswith(word, self.pos):
            return False
        return end >= len(self.text) or not (self.text[end].isalnum() or self.text[end] in "_-:")

    def accept(self, literal):
        if self.peek(literal):
            self.pos += len(literal)
            return True
        return False

    def accept_word(self, word):
        if self.peek_word(word):
            self.pos += len(word)
            return True
        return False

    def expect(self, literal, what=None):
        if not self.accept(literal):
            raise self.error(f"expected {what or repr(literal)}")

    def expect_word(self, word):
        if not self.accept_word(word):
            raise self.error(f"expected {word!r}")

    def match(self, regex):
        self.skip()
        m = regex.match(self.text, self.pos)
        if m is None:
            return None
        self.pos = m.end()
        return m.group(0)

    # -- lexical items -------------------------------------------------------

    def string(self):
        start = self.pos
        raw = self.match(_STRING)
        if raw is None:
            return None
        try:
            return json.loads(raw)
        except json.JSONDecodeError:
            raise self.error("bad string literal", start) from None

    def regex(self):
        """``/.../`` literal; ``\\/`` stands for a literal slash."""
        self.skip()
        if not self.text.startswith("/", self.pos):
            return None
        start = self.pos
        i = self.pos + 1
        out = []
        text = self.text
        while i < len(text):
            ch = text[i]
            if ch == "\\" and i + 1 < len(text):
                nxt = text[i + 1]
                out.append("/" if nxt == "/" else ch + nxt)
                i += 2
                continue
            if ch == "/":
                self.pos = i + 1
                return "".join(out)
            if ch == "\n":
                break
            out.append(ch)
            i += 1
        raise self.error("unterminated regular expression", start)

    def integer(self, what="integer"):
        start = self.pos
        raw = self.match(_INT)
        if raw is None:
            raise self.error(f"expected {what}")
        return int(raw), start

    def label(self, what="label"):
        s = self.string()
        if s is not None:
            return s
        raw = self.match(_LABEL)
        if raw is None:
            raise self.error(f"expected {what}")
        return raw


# --------------------------------------------------------------------------
# token patterns


def _parse_value(sc: _Scanner) -> Matcher:
    rx = sc.regex()
    if rx is not None:
        return Matcher(rx, regex=True)
    s = sc.string()
    if s is not None:
        return Matcher(s)
    raw = sc.match(_BARE_VALUE)
    if raw is None:
        raise sc.error("expected string or /regex/")
    return Matcher(raw)


def _parse_atom(sc: _Scanner) -> Atom:
    negated = sc.accept("!")
    start = sc.pos
    name = sc.match(re.compile(r"[a-z]+"))
    if name is None:
        raise sc.error("expected constraint field")
    if name not in FIELDS:
        raise sc.error(f"unknown field {name!r}", start)
    sc.expect("=")
    return Atom(name, _parse_value(sc), negated)


def _parse_constraint(sc: _Scanner) -> TokenConstraint:
    sc.expect("[")
    atoms = []
    if not sc.accept("]"):
        atoms.append(_parse_atom(sc))
        while sc.accept("&"):
            atoms.append(_parse_atom(sc))
        sc.expect("]", "']' or '&'")
    return TokenConstraint(tuple(atoms))


def _parse_tokseq(sc: _Scanner, bare_words: bool, stop=()) -> list:
    seq = []
    while True:
        if sc.peek("["):
            seq.append(_parse_constraint(sc))
            continue
        if bare_words and not sc.at_end() and not any(sc.peek(s) for s in stop):
            word = sc.match(_BARE_WORD)
            if word is not None:
                seq.append(TokenConstraint((Atom("word", Matcher(word)),)))
                continue
        return seq


def _parse_tokpat(sc: _Scanner, standalone=False) -> TokenPattern:
    lookbehind: list = []
    lookahead: list = []
    if sc.accept("(?<="):
        lookbehind = _parse_tokseq(sc, True, stop=(")",))
        if not lookbehind:
            raise sc.error("empty lookbehind")
        sc.expect(")")
    core = _parse_tokseq(sc, standalone, stop=("(?=",))
    if not core:
        raise sc.error("expected token constraint")
    if sc.accept("(?="):
        lookahead = _parse_tokseq(sc, True, stop=(")",))
        if not lookahead:
            raise sc.error("empty lookahead")
        sc.expect(")")
    return TokenPattern(tuple(core), tuple(lookbehind), tuple(lookahead))


# --------------------------------------------------------------------------
# dependency paths


def _parse_quant(sc: _Scanner):
    start = sc.pos
    if sc.accept("?"):
        return 0, 1
    if sc.accept("{"):
        if sc.accept(","):
            lo = 0
            hi, _ = sc.integer("repetition bound")
        else:
            lo, _ = sc.integer("repetition bound")
            sc.expect(",")
            hi, _ = sc.integer("repetition bound")
        sc.expect("}")
        if lo not in (0, 1):
            raise sc.error("repetition minimum must be 0 or 1", start)
        if not 1 <= hi <= MAX_REPEAT:
            raise sc.error(f"repetition maximum must be between 1 and {MAX_REPEAT}", start)
        if lo > hi:
            raise sc.error("repetition minimum exceeds maximum", start)
        return lo, hi
    sc.skip()
    if sc.text.startswith(("*", "+"), sc.pos):
        raise sc.error("unbounded repetition is not supported")
    return 1, 1


def _at_path_end(sc: _Scanner, stops):
    if sc.at_end():
        return True
    if sc.peek("|") or sc.peek(")"):
        return True
    return any(sc.peek_word(w) for w in stops)


def _parse_step(sc: _Scanner) -> PathStep:
    direction = ">"
    if sc.accept(">"):
        direction = ">"
    elif sc.accept("<"):
        direction = "<"
    rx = sc.regex()
    if rx is not None:
        label = Matcher(rx, regex=True)
    else:
        s = sc.string()
        if s is not None:
            label = Matcher(s)
        else:
            raw = sc.match(_PATH_LABEL)
            if raw is None:
                raise sc.error("expected dependency label")
            label = Matcher(raw)
    lo, hi = _parse_quant(sc)
    dest = _parse_constraint(sc) if sc.peek("[") else None
    return PathStep(direction, label, lo, hi, dest)


def _parse_seq(sc: _Scanner, stops) -> tuple:
    seq = []
    while not _at_path_end(sc, stops):
        if sc.accept("("):
            alts = _parse_alternatives(sc, stops=())
            sc.expect(")")
            lo, hi = _parse_quant(sc)
            seq.append(PathGroup(alts, lo, hi))
        else:
            seq.append(_parse_step(sc))
    if not seq:
        raise sc.error("expected path step")
    return tuple(seq)


def _parse_alternatives(sc: _Scanner, stops) -> tuple:
    alts = [_parse_seq(sc, stops)]
    while sc.accept("|"):
        alts.append(_parse_seq(sc, stops))
    return tuple(alts)


def _parse_path(sc: _Scanner, stops=("order", "arg")) -> DepPath:
    return DepPath(_parse_alternatives(sc, stops))


# --------------------------------------------------------------------------
# rules and files


def _parse_votes(sc: _Scanner, labels):
    sc.expect_word("votes")
    sc.expect("{")
    votes = {}
    while True:
        start = sc.pos
        sc.skip()
        start = sc.pos
        lab = sc.label("vote label")
        sc.expect(":")
        value, vpos = sc.integer("vote value")
        if lab == NIL:
            raise sc.error("Nil cannot receive votes", start)
        if labels is not None and lab not in labels:
            raise sc.error(f"unknown label {lab!r}", start)
        if value == 0:
            raise sc.error("zero vote", vpos)
        if lab in votes:
            raise sc.error(f"duplicate vote label {lab!r}", start)
        votes[lab] = value
        if sc.accept("}"):
            return votes
        sc.expect(",", "',' or '}'")


def _parse_participant_body(sc: _Scanner) -> ParticipantBody:
    sc.expect_word("on")
    trigger_class = ANY_CLASS if sc.accept("*") else sc.label("trigger class")
    trig = None
    if sc.accept_word("trig"):
        trig = _parse_constraint(sc)
    if sc.accept_word("anywhere"):
        path = None
    else:
        sc.expect_word("path")
        path = _parse_path(sc)
    order = None
    if sc.accept_word("order"):
        start = sc.pos
        order = sc.match(re.compile(r"[a-z\-]+"))
        if order not in ORDERS:
            raise sc.error(f"order must be one of {', '.join(ORDERS)}", start)
    sc.expect_word("arg")
    arg = _parse_constraint(sc)
    return ParticipantBody(trigger_class, arg, path, trig, order)


def _parse_rule(sc: _Scanner, labels, seen) -> Rule:
    sc.expect_word("rule")
    start = sc.pos
    sc.skip()
    start = sc.pos
    name = sc.string()
    if name is None:
        name = sc.match(_NAME)
    if not name:
        raise sc.error("expected rule name")
    if name in seen:
        raise sc.error(f"duplicate rule name {name!r}", start)
    seen.add(name)
    if sc.accept_word("trigger"):
        kind = "trigger"
    elif sc.accept_word("participant"):
        kind = "participant"
    else:
        raise sc.error("expected 'trigger' or 'participant'")
    votes = _parse_votes(sc, labels)
    if kind == "trigger":
        sc.expect_word("pattern")
        body = TriggerBody(_parse_tokpat(sc))
    else:
        body = _parse_participant_body(sc)
    return Rule(name, kind, votes, body)


def parse_rules(text: str) -> RuleSet:
    """Parse a complete rule file."""
    sc = _Scanner(text)
    sc.expect_word("version")
    version, _ = sc.integer("version number")
    sc.expect_word("labels")
    sc.expect("[")
    labels = [sc.label()]
    while sc.accept(","):
        labels.append(sc.label())
    sc.expect("]", "',' or ']'")
    provenance = None
    if sc.accept_word("provenance"):
        provenance = sc.string()
        if provenance is None:
            raise sc.error("expected provenance string")
    label_set = set(labels)
    rules = []
    seen: set = set()
    while not sc.at_end():
        rules.append(_parse_rule(sc, label_set, seen))
    return RuleSet(tuple(labels), tuple(rules), version, provenance)


def _finish(sc: _Scanner, value):
    if not sc.at_end():
        raise sc.error("unexpected trailing input")
    return value


def parse_token_pattern(text: str) -> TokenPattern:
    sc = _Scanner(text)
    return _finish(sc, _parse_tokpat(sc, standalone=True))


def parse_token_constraint(text: str) -> TokenConstraint:
    sc = _Scanner(text)
    return _finish(sc, _parse_constraint(sc))


def parse_path(text: str) -> DepPath:
    sc = _Scanner(text)
    return _finish(sc, _parse_path(sc, stops=()))


def parse_argument(text: str):
    """``ROLE:LABEL = path`` -> ``(role, label, DepPath)``."""
    sc = _Scanner(text)
    lab = sc.label("argument declaration")
    role, sep, arg_label = lab.partition(":")
    if not sep:
        raise sc.error("expected ROLE:LABEL")
    sc.expect("=")
    path = _parse_path(sc, stops=())
    return _finish(sc, (role, arg_label, path))


def parse_fragment(text: str):
    """Parse a pattern fragment of any kind: argument declaration, token pattern or path."""
    if re.match(r"\s*[A-Za-z_][\w\-]*:[A-Za-z_][\w\-]*\s*=", text):
        return parse_argument(text)
    stripped = text.lstrip()
    if stripped.startswith("[") or stripped.startswith("(?"):
        return parse_token_pattern(text)
    return parse_path(text)
