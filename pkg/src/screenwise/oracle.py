"""Deterministic ground-truth evaluator for rule sets.

A single forward-chaining pass: rules only conclude recommendations, never
new facts, so one sweep over the rule list is complete. Conflicts resolve to
the highest-priority recommendation; a case that triggers nothing falls back
to a physician consult.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

from .casegen import AGE_MAX, AGE_MIN, MAX_FACTORS, UseCase, build_history
from .rules import (
    AgeInRange,
    Condition,
    GenderIs,
    HasRiskFactor,
    RiskFactorCountAtLeast,
    Rule,
    RuleSet,
)
from .vocab import REGISTRY, Recommendation, Registry

__all__ = [
    "TraceEntry",
    "OracleVerdict",
    "condition_holds",
    "evaluate",
    "resolve_conflicts",
    "enumerate_input_grid",
    "boundary_ages",
    "verdict_to_dict",
]

FALLBACK = Recommendation.CONSULT_PHYSICIAN


@dataclass(frozen=True)
class TraceEntry:
    rule_id: str
    condition: Condition
    holds: bool


@dataclass(frozen=True)
class OracleVerdict:
    """Ground truth for one case: triggered rule ids (rule-pack order), the
    resolved recommendation, and a full per-condition trace."""

    case_id: int
    triggered: tuple[str, ...]
    recommendation: Recommendation
    trace: tuple[TraceEntry, ...]


def condition_holds(cond: Condition, case: UseCase) -> bool:
    if isinstance(cond, GenderIs):
        return case.gender == cond.gender
    if isinstance(cond, AgeInRange):
        return cond.low <= case.age <= cond.high
    if isinstance(cond, HasRiskFactor):
        return cond.code in case.risk_factors
    if isinstance(cond, RiskFactorCountAtLeast):
        return len(case.risk_factors) >= cond.threshold
    raise TypeError(f"unknown condition type: {type(cond).__name__}")


def resolve_conflicts(recommendations: Iterable[Recommendation]) -> Recommendation:
    """Pick the highest-priority recommendation. Order of the input never
    matters; priorities form a strict total order, so the result is unique."""
    recs = list(recommendations)
    if not recs:
        raise ValueError("resolve_conflicts needs at least one recommendation")
    return max(recs, key=lambda r: r.priority)


def evaluate(case: UseCase, rs: RuleSet) -> OracleVerdict:
    """Evaluate every condition of every rule against the case.

    The trace records each (rule, condition, holds) triple even when an
    earlier condition of the rule already failed."""
    trace: list[TraceEntry] = []
    triggered: list[Rule] = []
    for rule in rs.rules:
        all_hold = True
        for cond in rule.conditions:
            holds = condition_holds(cond, case)
            trace.append(TraceEntry(rule.rule_id, cond, holds))
            all_hold = all_hold and holds
        if all_hold:
            triggered.append(rule)
    if triggered:
        rec = resolve_conflicts([r.recommendation for r in triggered])
    else:
        rec = FALLBACK
    return OracleVerdict(
        case_id=case.case_id,
        triggered=tuple(r.rule_id for r in triggered),
        recommendation=rec,
        trace=tuple(trace),
    )


def boundary_ages(rs: RuleSet) -> tuple[int, ...]:
    """Ages worth testing: every interval endpoint and its neighbors, clamped
    into the case universe, plus the universe bounds themselves."""
    ages = {AGE_MIN, AGE_MAX}
    for rule in rs.rules:
        for cond in rule.conditions:
            if isinstance(cond, AgeInRange):
                for endpoint in (cond.low, cond.high):
                    for delta in (-1, 0, 1):
                        ages.add(min(max(endpoint + delta, AGE_MIN), AGE_MAX))
    return tuple(sorted(ages))


def enumerate_input_grid(rs: RuleSet, registry: Registry = REGISTRY) -> Iterable[UseCase]:
    """Every gender x boundary age x risk-factor subset of size 0..4.

    Grid cases are structural probes, not generator output: the zero-factor
    rows deliberately fall outside the generator's 1..4 factor invariant so
    that fallback behavior is exercised too."""
    codes = [f.code for f in registry]
    ages = boundary_ages(rs)
    case_id = 0
    for gender in ("female", "male"):
        for age in ages:
            for k in range(0, MAX_FACTORS + 1):
                for combo in itertools.combinations(codes, k):
                    case_id += 1
                    factors = frozenset(combo)
                    yield UseCase(case_id, gender, age, factors, build_history(factors, registry))


def verdict_to_dict(v: OracleVerdict, include_trace: bool = False) -> dict:
    row: dict = {
        "case_id": v.case_id,
        "triggered": list(v.triggered),
        "recommendation": v.recommendation.code,
    }
    if include_trace:
        row["trace"] = [
            {"rule_id": t.rule_id, "condition": _condition_key(t.condition), "holds": t.holds}
            for t in v.trace
        ]
    return row


def _condition_key(cond: Condition) -> str:
    from .rules import render_condition

    return render_condition(cond)
