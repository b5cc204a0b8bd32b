"""The rule language: syntax tree, parser, canonical writer and checks."""

from .checks import RuleDiagnostic, RuleDiff, combine_rulesets, diff_rules, merge_rules, validate_ruleset
from .parser import (
    RuleSyntaxError,
    parse_argument,
    parse_fragment,
    parse_path,
    parse_rules,
    parse_token_constraint,
    parse_token_pattern,
)
from .syntax import (
    ANY_CLASS,
    ANY_TOKEN,
    FIELDS,
    MAX_REPEAT,
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
from .writer import format_path, format_rule, format_token_pattern, serialize_rules

__all__ = [name for name in dir() if not name.startswith("_")]
