"""Abstract syntax of the rule language.

All nodes are frozen dataclasses so rule sets compare structurally.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Union

FIELDS = ("word", "lemma", "tag", "entity", "incoming", "outgoing")
MAX_REPEAT = 4
ANY_CLASS = "*"
ORDERS = ("trigger-first", "arg-first")


@lru_cache(maxsize=None)
def compile_regex(pattern: str):
    return re.compile(pattern)


@dataclass(frozen=True)
class Matcher:
    """An exact string or a regular expression (``re.search`` semantics)."""

    value: str
    regex: bool = False

    def matches(self, text: Optional[str]) -> bool:
        if text is None:
            return False
        if self.regex:
            return compile_regex(self.value).search(text) is not None
        return text == self.value


@dataclass(frozen=True)
class Atom:
    field: str
    matcher: Matcher
    negated: bool = False


@dataclass(frozen=True)
class TokenConstraint:
    """Conjunction of atoms; the empty conjunction matches any token."""

    atoms: tuple[Atom, ...] = ()


ANY_TOKEN = TokenConstraint()


@dataclass(frozen=True)
class TokenPattern:
    core: tuple[TokenConstraint, ...]
    lookbehind: tuple[TokenConstraint, ...] = ()
    lookahead: tuple[TokenConstraint, ...] = ()

    def positions(self):
        """``(offset, constraint)`` relative to the first core token."""
        k = len(self.lookbehind)
        for i, c in enumerate(self.lookbehind):
            yield i - k, c
        for i, c in enumerate(self.core):
            yield i, c
        base = len(self.core)
        for i, c in enumerate(self.lookahead):
            yield base + i, c


@dataclass(frozen=True)
class PathStep:
    direction: str  # ">" head->dependent, "<" dependent->head
    label: Matcher
    min: int = 1
    max: int = 1
    dest: Optional[TokenConstraint] = None


@dataclass(frozen=True)
class PathGroup:
    alternatives: tuple[tuple["PathElement", ...], ...]
    min: int = 1
    max: int = 1


PathElement = Union[PathStep, PathGroup]


@dataclass(frozen=True)
class DepPath:
    """Top-level alternation of step sequences."""

    alternatives: tuple[tuple[PathElement, ...], ...]

    @classmethod
    def of(cls, *steps: PathElement) -> "DepPath":
        return cls((tuple(steps),))

    def simple_steps(self) -> Optional[tuple[PathStep, ...]]:
        """The step sequence if this path is one plain sequence of steps."""
        if len(self.alternatives) != 1:
            return None
        seq = self.alternatives[0]
        if all(isinstance(e, PathStep) for e in seq):
            return seq
        return None


@dataclass(frozen=True)
class TriggerBody:
    pattern: TokenPattern


@dataclass(frozen=True)
class ParticipantBody:
    """Trigger of ``trigger_class`` connected to an argument satisfying ``argument``.

    ``path=None`` accepts any argument candidate of the sentence.  ``trigger``
    optionally constrains the trigger token itself; ``order`` its linear
    position relative to the argument.
    """

    trigger_class: str
    argument: TokenConstraint
    path: Optional[DepPath] = None
    trigger: Optional[TokenConstraint] = None
    order: Optional[str] = None


@dataclass(frozen=True)
class Rule:
    name: str
    kind: str  # "trigger" | "participant"
    votes: dict = field(hash=False)
    body: Union[TriggerBody, ParticipantBody] = None

    def __post_init__(self):
        if self.kind not in ("trigger", "participant"):
            raise ValueError(f"unknown rule kind {self.kind!r}")
        expected = TriggerBody if self.kind == "trigger" else ParticipantBody
        if not isinstance(self.body, expected):
            raise ValueError(f"{self.kind} rule {self.name!r} needs a {expected.__name__}")


@dataclass(frozen=True)
class RuleSet:
    labels: tuple[str, ...]
    rules: tuple[Rule, ...] = ()
    version: int = 1
    provenance: Optional[str] = None

    def by_name(self):
        return {r.name: r for r in self.rules}

    def of_kind(self, kind):
        return [r for r in self.rules if r.kind == kind]

    def replace_rules(self, rules) -> "RuleSet":
        return RuleSet(self.labels, tuple(rules), self.version, self.provenance)
