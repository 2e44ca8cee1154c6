"""Rule model and the line-oriented IF/THEN rule language.

One rule per line. Grammar (EBNF):

    ruleset    = { line } ;
    line       = blank | comment | version | rule ;
    comment    = "#" , { any character } ;
    version    = "VERSION" , string ;
    rule       = "RULE" , rule_id , string , "IF" , condition ,
                 { "AND" , condition } , "THEN" , rec_code , [ "NOTE" , string ] ;
    condition  = "gender_is" , "(" , ( "female" | "male" ) , ")"
               | "age_in" , "(" , integer , "," , integer , ")"
               | "has_risk_factor" , "(" , factor_code , ")"
               | "risk_factor_count_at_least" , "(" , integer , ")" ;
    rule_id    = "R" , nonzero digit , { digit } ;
    string     = '"' , { any character except '"' and newline } , '"' ;

Conditions are a conjunction; there is no OR or NOT. A guideline clause that
needs disjunction is written as several rules. Rule names are lowercase slugs.
Serialization is canonical (single spaces, no spaces inside condition terms),
so parse(serialize(rs)) reproduces rs exactly, checksum included.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

from .vocab import (
    GENDERS,
    REGISTRY,
    Recommendation,
    Registry,
    UnknownRiskFactor,
    display_name,
    recommendation_phrase,
    require_code,
)

__all__ = [
    "GenderIs",
    "AgeInRange",
    "HasRiskFactor",
    "RiskFactorCountAtLeast",
    "Condition",
    "Rule",
    "RuleSet",
    "RuleSyntaxError",
    "DuplicateRuleId",
    "parse_rules",
    "serialize",
    "make_ruleset",
    "render_rule_prompt",
    "render_condition",
    "ValidationReport",
    "Conflict",
    "validate_ruleset",
]

AGE_DOMAIN_MAX = 130
RULE_ID_RE = re.compile(r"R[1-9][0-9]*\Z")
NAME_RE = re.compile(r"[a-z][a-z0-9_]*\Z")


@dataclass(frozen=True)
class GenderIs:
    gender: str


@dataclass(frozen=True)
class AgeInRange:
    """Inclusive age interval. An inverted interval is empty, never an error
    at parse time; validation reports the rule as unreachable instead."""

    low: int
    high: int


@dataclass(frozen=True)
class HasRiskFactor:
    code: str


@dataclass(frozen=True)
class RiskFactorCountAtLeast:
    threshold: int


Condition = GenderIs | AgeInRange | HasRiskFactor | RiskFactorCountAtLeast


@dataclass(frozen=True)
class Rule:
    rule_id: str
    name: str
    conditions: tuple[Condition, ...]
    recommendation: Recommendation
    source_note: str = ""


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]
    version: str
    checksum: str


class RuleSyntaxError(ValueError):
    """Parse failure with 1-based line/column and what was expected there."""

    def __init__(self, line: int, column: int, expected: str, found: str = "") -> None:
        self.line = line
        self.column = column
        self.expected = expected
        self.found = found
        detail = f", found {found!r}" if found else ""
        super().__init__(f"line {line}, column {column}: expected {expected}{detail}")


class DuplicateRuleId(ValueError):
    def __init__(self, rule_id: str) -> None:
        self.rule_id = rule_id
        super().__init__(f"duplicate rule id: {rule_id}")


_TOKEN_RE = re.compile(r'"[^"\n]*"|[A-Za-z0-9_]+|[(),]')


@dataclass
class _LineScanner:
    """Token cursor over one source line, tracking columns for errors."""

    text: str
    lineno: int
    pos: int = 0
    tokens: list[tuple[str, int]] = field(default_factory=list)
    index: int = 0

    def __post_init__(self) -> None:
        pos = 0
        while pos < len(self.text):
            if self.text[pos].isspace():
                pos += 1
                continue
            m = _TOKEN_RE.match(self.text, pos)
            if m is None:
                raise RuleSyntaxError(self.lineno, pos + 1, "a token", self.text[pos])
            self.tokens.append((m.group(0), pos + 1))
            pos = m.end()

    def done(self) -> bool:
        return self.index >= len(self.tokens)

    def peek(self) -> str | None:
        return self.tokens[self.index][0] if not self.done() else None

    def next(self, expected: str) -> tuple[str, int]:
        if self.done():
            col = len(self.text) + 1
            raise RuleSyntaxError(self.lineno, col, expected, "end of line")
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def expect(self, literal: str) -> None:
        tok, col = self.next(repr(literal))
        if tok != literal:
            raise RuleSyntaxError(self.lineno, col, repr(literal), tok)

    def expect_string(self, what: str) -> str:
        tok, col = self.next(what)
        if not (tok.startswith('"') and tok.endswith('"') and len(tok) >= 2):
            raise RuleSyntaxError(self.lineno, col, what, tok)
        return tok[1:-1]

    def expect_int(self, what: str) -> int:
        tok, col = self.next(what)
        if not tok.isdigit():
            raise RuleSyntaxError(self.lineno, col, what, tok)
        return int(tok)


def _parse_condition(sc: _LineScanner) -> Condition:
    kind, col = sc.next("a condition term")
    if kind == "gender_is":
        sc.expect("(")
        gender, gcol = sc.next("female or male")
        if gender not in GENDERS:
            raise RuleSyntaxError(sc.lineno, gcol, "female or male", gender)
        sc.expect(")")
        return GenderIs(gender)
    if kind == "age_in":
        sc.expect("(")
        low = sc.expect_int("an age bound")
        sc.expect(",")
        high = sc.expect_int("an age bound")
        sc.expect(")")
        for bound in (low, high):
            if bound > AGE_DOMAIN_MAX:
                raise RuleSyntaxError(sc.lineno, col, f"age bound <= {AGE_DOMAIN_MAX}", str(bound))
        return AgeInRange(low, high)
    if kind == "has_risk_factor":
        sc.expect("(")
        code, _ = sc.next("a risk factor code")
        sc.expect(")")
        return HasRiskFactor(require_code(code))
    if kind == "risk_factor_count_at_least":
        sc.expect("(")
        threshold = sc.expect_int("a count")
        sc.expect(")")
        return RiskFactorCountAtLeast(threshold)
    raise RuleSyntaxError(sc.lineno, col, "a condition term", kind)


def _parse_rule_line(sc: _LineScanner) -> Rule:
    rule_id, col = sc.next("a rule id")
    if RULE_ID_RE.match(rule_id) is None:
        raise RuleSyntaxError(sc.lineno, col, "a rule id like R1", rule_id)
    name = sc.expect_string("a quoted rule name")
    if NAME_RE.match(name) is None:
        raise RuleSyntaxError(sc.lineno, col, "a lowercase slug name", name)
    sc.expect("IF")
    conditions = [_parse_condition(sc)]
    while sc.peek() == "AND":
        sc.expect("AND")
        conditions.append(_parse_condition(sc))
    sc.expect("THEN")
    rec_tok, rec_col = sc.next("a recommendation code")
    try:
        rec = Recommendation(rec_tok)
    except ValueError:
        raise RuleSyntaxError(sc.lineno, rec_col, "a recommendation code", rec_tok) from None
    note = ""
    if sc.peek() == "NOTE":
        sc.expect("NOTE")
        note = sc.expect_string("a quoted note")
    if not sc.done():
        tok, tcol = sc.tokens[sc.index]
        raise RuleSyntaxError(sc.lineno, tcol, "end of line", tok)
    return Rule(rule_id, name, tuple(conditions), rec, note)


def parse_rules(text: str, registry: Registry = REGISTRY) -> RuleSet:
    """Parse rule-language text into a RuleSet.

    Raises RuleSyntaxError on malformed input, DuplicateRuleId when an id
    repeats, and UnknownRiskFactor for codes outside the registry.
    """
    version = "1"
    rules: list[Rule] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        sc = _LineScanner(raw, lineno)
        keyword, col = sc.next("RULE or VERSION")
        if keyword == "VERSION":
            version = sc.expect_string("a quoted version")
            if not sc.done():
                tok, tcol = sc.tokens[sc.index]
                raise RuleSyntaxError(lineno, tcol, "end of line", tok)
            continue
        if keyword != "RULE":
            raise RuleSyntaxError(lineno, col, "RULE or VERSION", keyword)
        rule = _parse_rule_line(sc)
        if rule.rule_id in seen:
            raise DuplicateRuleId(rule.rule_id)
        seen.add(rule.rule_id)
        rules.append(rule)
    return make_ruleset(tuple(rules), version)


def render_condition(cond: Condition) -> str:
    """Condition term in rule-language syntax (canonical, no inner spaces)."""
    if isinstance(cond, GenderIs):
        return f"gender_is({cond.gender})"
    if isinstance(cond, AgeInRange):
        return f"age_in({cond.low},{cond.high})"
    if isinstance(cond, HasRiskFactor):
        return f"has_risk_factor({cond.code})"
    return f"risk_factor_count_at_least({cond.threshold})"


def _serialize_rule(rule: Rule) -> str:
    conds = " AND ".join(render_condition(c) for c in rule.conditions)
    line = f'RULE {rule.rule_id} "{rule.name}" IF {conds} THEN {rule.recommendation.code}'
    if rule.source_note:
        line += f' NOTE "{rule.source_note}"'
    return line


def serialize(rs: RuleSet) -> str:
    """Canonical text: version header, then one rule per line in order."""
    lines = [f'VERSION "{rs.version}"']
    lines.extend(_serialize_rule(r) for r in rs.rules)
    return "\n".join(lines) + "\n"


def _checksum(canonical_text: str) -> str:
    return hashlib.sha256(canonical_text.encode("utf-8")).hexdigest()


def make_ruleset(rules: tuple[Rule, ...], version: str = "1") -> RuleSet:
    """Build a RuleSet with its checksum over the canonical serialization."""
    probe = RuleSet(rules, version, checksum="")
    return RuleSet(rules, version, _checksum(serialize(probe)))


_CONDITION_PHRASES = {
    GenderIs: lambda c: f"the person's gender is {c.gender}",
    AgeInRange: lambda c: f"the person's age is between {c.low} and {c.high}",
    HasRiskFactor: lambda c: f"the person has risk factor {display_name(c.code)}",
}


def _condition_phrase(cond: Condition) -> str:
    if isinstance(cond, RiskFactorCountAtLeast):
        noun = "risk factor" if cond.threshold == 1 else "risk factors"
        return f"the person has at least {cond.threshold} {noun}"
    return _CONDITION_PHRASES[type(cond)](cond)


def render_rule_prompt(rule: Rule) -> str:
    """Deterministic English sentence for loading one rule into a model.

    The sentence shape is fixed so that replies and transcripts can be
    matched back to the rule mechanically.
    """
    conds = " AND ".join(_condition_phrase(c) for c in rule.conditions)
    phrase = recommendation_phrase(rule.recommendation)
    return f"Rule {rule.rule_id}: IF {conds} THEN recommend {phrase}."


@dataclass(frozen=True)
class Conflict:
    """A pair of rules that can trigger together on one input with
    differing advice. Informational only: conflict resolution picks the
    highest-priority recommendation at evaluation time.
    """

    rule_ids: tuple[str, str]
    recommendations: tuple[str, str]


@dataclass(frozen=True)
class ValidationReport:
    unreachable: tuple[str, ...]
    conflicts: tuple[Conflict, ...]

    @property
    def ok(self) -> bool:
        return not self.unreachable


def validate_ruleset(rs: RuleSet, registry: Registry = REGISTRY) -> ValidationReport:
    """Scan the finite input grid for unreachable rules and overlap conflicts.

    A rule is unreachable when no case in the evaluation universe (ages 16-90,
    at most four risk factors) can satisfy all of its conditions; empty age
    intervals and over-large factor-count thresholds land here. Conflicts list
    rule groups that co-trigger with more than one distinct recommendation.
    """
    from .oracle import enumerate_input_grid, evaluate

    import itertools

    rec_of = {r.rule_id: r.recommendation.code for r in rs.rules}
    triggered_ever: set[str] = set()
    pairs: set[tuple[str, str]] = set()
    for case in enumerate_input_grid(rs, registry):
        verdict = evaluate(case, rs)
        triggered_ever.update(verdict.triggered)
        for a, b in itertools.combinations(verdict.triggered, 2):
            if rec_of[a] != rec_of[b]:
                pairs.add((a, b))
    unreachable = tuple(r.rule_id for r in rs.rules if r.rule_id not in triggered_ever)
    order = {r.rule_id: i for i, r in enumerate(rs.rules)}
    conflicts = tuple(
        Conflict((a, b), (rec_of[a], rec_of[b]))
        for a, b in sorted(pairs, key=lambda p: (order[p[0]], order[p[1]]))
    )
    return ValidationReport(unreachable, conflicts)
