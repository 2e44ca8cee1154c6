"""Synthetic screening cases: generation, rendering, and parsing.

Generation is deterministic: every draw for case N under seed S comes from a
sub-generator seeded by (S, N), so cases can be produced in any order or in
parallel and still match the sequential run byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .vocab import (
    GENDERS,
    REGISTRY,
    Registry,
    codes_in_registry_order,
    display_name,
    require_code,
)

__all__ = [
    "UseCase",
    "RenderedCase",
    "GeneratorConfig",
    "FormatError",
    "InvariantViolation",
    "EmptyRegistry",
    "generate_cases",
    "render_structured",
    "render_unstructured",
    "render_case",
    "parse_structured",
    "build_history",
    "validate_case",
    "write_cases_jsonl",
    "read_cases_jsonl",
    "case_to_dict",
]

AGE_MIN = 16
AGE_MAX = 90
MAX_FACTORS = 4
MODES = ("structured", "unstructured")


class FormatError(ValueError):
    """Structured case text with a missing, misordered, or malformed line."""


class InvariantViolation(ValueError):
    """A case value outside the documented bounds (age, factor count, ...)."""


class EmptyRegistry(ValueError):
    """Generation was asked to draw risk factors from an empty registry."""


@dataclass(frozen=True)
class UseCase:
    """One synthetic person: demographics, risk factors, and a history line.

    The history sentence mentions every factor's display name exactly once;
    renderers and the narrative extractor both rely on that."""

    case_id: int
    gender: str
    age: int
    risk_factors: frozenset[str]
    history_text: str


@dataclass(frozen=True)
class RenderedCase:
    case_id: int
    mode: str
    text: str


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int
    count: int = 50
    registry: Registry = REGISTRY
    template_pool_id: str = "default"


def validate_case(c: UseCase, registry: Registry = REGISTRY) -> UseCase:
    """Check the case invariants, raising InvariantViolation on the first hit."""
    if c.gender not in GENDERS:
        raise InvariantViolation(f"case {c.case_id}: gender {c.gender!r} is not female or male")
    if not AGE_MIN <= c.age <= AGE_MAX:
        raise InvariantViolation(f"case {c.case_id}: age {c.age} outside [{AGE_MIN}, {AGE_MAX}]")
    if not 1 <= len(c.risk_factors) <= MAX_FACTORS:
        raise InvariantViolation(
            f"case {c.case_id}: {len(c.risk_factors)} risk factors, want 1..{MAX_FACTORS}"
        )
    for code in c.risk_factors:
        require_code(code, registry)
    if not c.history_text:
        raise InvariantViolation(f"case {c.case_id}: empty history")
    for code in c.risk_factors:
        name = display_name(code)
        hits = c.history_text.count(name)
        if hits != 1:
            raise InvariantViolation(
                f"case {c.case_id}: history mentions {name!r} {hits} times, want exactly 1"
            )
    return c


def _natural_join(items: list[str]) -> str:
    if len(items) == 1:
        return items[0]
    return ", ".join(items[:-1]) + " and " + items[-1]


def build_history(risk_factors: frozenset[str] | set[str], registry: Registry = REGISTRY) -> str:
    """One-sentence background line mentioning each factor exactly once."""
    if not risk_factors:
        return "Background: no documented risk factors."
    names = [display_name(c) for c in codes_in_registry_order(frozenset(risk_factors), registry)]
    return f"Background: the patient reports {_natural_join(names)}."


def _subseed(seed: int, case_id: int, purpose: str) -> int:
    digest = hashlib.sha256(f"{seed}|{case_id}|{purpose}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _draw_case(seed: int, case_id: int, registry: Registry) -> UseCase:
    rng = random.Random(_subseed(seed, case_id, "case"))
    gender = rng.choice(GENDERS)
    age = rng.randint(AGE_MIN, AGE_MAX)
    codes = [f.code for f in registry]
    k = rng.randint(1, min(MAX_FACTORS, len(codes)))
    factors = frozenset(rng.sample(codes, k))
    return UseCase(case_id, gender, age, factors, build_history(factors, registry))


def generate_cases(cfg: GeneratorConfig) -> tuple[UseCase, ...]:
    """Generate cfg.count cases with ids 1..count, validated."""
    if not cfg.registry:
        raise EmptyRegistry("cannot draw risk factors from an empty registry")
    if cfg.count < 1:
        raise ValueError(f"count must be positive, got {cfg.count}")
    cases = tuple(_draw_case(cfg.seed, i, cfg.registry) for i in range(1, cfg.count + 1))
    for c in cases:
        validate_case(c, cfg.registry)
    return cases


# --- structured rendering -------------------------------------------------

def render_structured(c: UseCase, registry: Registry = REGISTRY) -> RenderedCase:
    factors = ", ".join(codes_in_registry_order(c.risk_factors, registry))
    text = (
        f"gender: {c.gender}\n"
        f"age: {c.age}\n"
        f"risk_factors: {factors}\n"
        f"history: {c.history_text}"
    )
    return RenderedCase(c.case_id, "structured", text)


_STRUCTURED_FIELDS = ("gender", "age", "risk_factors", "history")


def parse_structured(text: str, case_id: int = 0, registry: Registry = REGISTRY) -> UseCase:
    """Inverse of render_structured.

    The text must hold exactly the four labeled lines in order. Layout
    problems raise FormatError; out-of-bounds values raise InvariantViolation.
    """
    lines = [ln for ln in text.splitlines()]
    while lines and not lines[-1].strip():
        lines.pop()
    if len(lines) != len(_STRUCTURED_FIELDS):
        raise FormatError(f"expected {len(_STRUCTURED_FIELDS)} lines, got {len(lines)}")
    values: dict[str, str] = {}
    for lineno, (line, fieldname) in enumerate(zip(lines, _STRUCTURED_FIELDS), start=1):
        prefix = f"{fieldname}:"
        if not line.startswith(prefix):
            raise FormatError(f"line {lineno}: expected a {prefix!r} line, got {line!r}")
        values[fieldname] = line[len(prefix):].strip()
    try:
        age = int(values["age"])
    except ValueError:
        raise FormatError(f"age is not an integer: {values['age']!r}") from None
    raw_factors = [tok.strip() for tok in values["risk_factors"].split(",") if tok.strip()]
    if len(raw_factors) != len(set(raw_factors)):
        raise FormatError(f"duplicate risk factor in {values['risk_factors']!r}")
    case = UseCase(
        case_id=case_id,
        gender=values["gender"],
        age=age,
        risk_factors=frozenset(raw_factors),
        history_text=values["history"],
    )
    return validate_case(case, registry)


# --- unstructured rendering -----------------------------------------------

# Every template states the age before any risk factor phrase and uses
# unambiguous gender words, so the narrative extractor in the mock backend
# can recover the exact profile. None of the labels "gender:", "age:" or
# "risk_factors:" may appear.
TEMPLATE_POOLS: dict[str, tuple[str, ...]] = {
    "default": (
        "{name} is a {age}-year-old {noun} visiting the clinic for advice on breast "
        "cancer screening. {subj} reports {factors}. {subj} asked which screening "
        "schedule applies.",
        "{name}, a {age}-year-old {noun}, came in with questions about screening. "
        "The medical record lists {factors}. Nothing else of note was found.",
        "The next case concerns {name}, {age} years old, who identifies as "
        "{gender_word}. The intake questionnaire documents {factors}.",
        "{name} is {age} years old. {subj} is a {noun} whose chart mentions "
        "{factors}. {subj} would like a recommendation.",
        "At a community health day, {name} ({age}, {gender_word}) filled in a risk "
        "questionnaire noting {factors}.",
        "Seen today: {name}, {age}, {gender_word}. Reported history includes "
        "{factors}. {subj} is otherwise well.",
    ),
}

_NAMES = {
    "female": ("Maria", "Elena", "Priya", "Aisha", "Sofia", "Ingrid"),
    "male": ("Omar", "Daniel", "Kenji", "Luis", "Viktor", "Samuel"),
}

_GENDER_WORDS = {
    "female": {"noun": "woman", "subj": "She", "gender_word": "female"},
    "male": {"noun": "man", "subj": "He", "gender_word": "male"},
}


def render_unstructured(
    c: UseCase,
    template_seed: int,
    pool_id: str = "default",
    registry: Registry = REGISTRY,
) -> RenderedCase:
    """Flowing one-paragraph narrative carrying the same profile.

    Template and name choice depend only on (template_seed, case_id)."""
    pool = TEMPLATE_POOLS[pool_id]
    rng = random.Random(_subseed(template_seed, c.case_id, "render"))
    template = rng.choice(pool)
    name = rng.choice(_NAMES[c.gender])
    names = [display_name(code) for code in codes_in_registry_order(c.risk_factors, registry)]
    text = template.format(
        name=name,
        age=c.age,
        factors=_natural_join(names),
        **_GENDER_WORDS[c.gender],
    )
    return RenderedCase(c.case_id, "unstructured", text)


def render_case(
    c: UseCase,
    mode: str,
    template_seed: int = 0,
    pool_id: str = "default",
    registry: Registry = REGISTRY,
) -> RenderedCase:
    if mode == "structured":
        return render_structured(c, registry)
    if mode == "unstructured":
        return render_unstructured(c, template_seed, pool_id, registry)
    raise ValueError(f"unknown render mode: {mode!r}")


# --- case files -------------------------------------------------------------

def case_to_dict(c: UseCase, registry: Registry = REGISTRY) -> dict:
    return {
        "case_id": c.case_id,
        "gender": c.gender,
        "age": c.age,
        "risk_factors": codes_in_registry_order(c.risk_factors, registry),
        "history": c.history_text,
    }


def write_cases_jsonl(
    path: str | Path,
    cases: Iterable[UseCase],
    rendered: dict[int, dict[str, str]] | None = None,
    registry: Registry = REGISTRY,
) -> None:
    """One JSON object per line; `rendered` may add per-mode rendering fields
    keyed by case_id, e.g. {"rendered_structured": ...}."""
    with open(path, "w", encoding="utf-8") as fh:
        for c in cases:
            row = case_to_dict(c, registry)
            if rendered and c.case_id in rendered:
                row.update(rendered[c.case_id])
            fh.write(json.dumps(row, sort_keys=True, separators=(",", ": ")) + "\n")


def read_cases_jsonl(path: str | Path, registry: Registry = REGISTRY) -> tuple[UseCase, ...]:
    cases: list[UseCase] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: not valid JSON: {exc}") from None
            try:
                case = UseCase(
                    case_id=int(row["case_id"]),
                    gender=row["gender"],
                    age=int(row["age"]),
                    risk_factors=frozenset(row["risk_factors"]),
                    history_text=row["history"],
                )
            except (KeyError, TypeError) as exc:
                raise FormatError(f"{path}:{lineno}: missing or malformed field: {exc}") from None
            cases.append(validate_case(case, registry))
    return tuple(cases)
