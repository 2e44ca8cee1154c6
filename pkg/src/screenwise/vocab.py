"""Closed vocabularies shared by every other module.

Two registries live here: the risk-factor registry (codes plus the display
names used in prompts and narratives) and the recommendation vocabulary with
its priority order. Both are closed sets; unknown codes are rejected wherever
they enter the system.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

__all__ = [
    "RiskFactor",
    "Registry",
    "REGISTRY",
    "UnknownRiskFactor",
    "Recommendation",
    "RECOMMENDATION_PHRASES",
    "recommendation_phrase",
    "require_code",
    "display_name",
    "codes_in_registry_order",
]


@dataclass(frozen=True)
class RiskFactor:
    """One registered risk factor: a stable code and a human display name."""

    code: str
    display_name: str


# Declaration order is the canonical registry order; serialized factor lists
# and rendered factor lines always follow it.
REGISTRY: tuple[RiskFactor, ...] = (
    RiskFactor("BRCA_MUTATION", "known BRCA1/BRCA2 gene mutation"),
    RiskFactor("FIRST_DEGREE_RELATIVE_BRCA", "first-degree relative with a BRCA1/BRCA2 mutation"),
    RiskFactor("FAMILY_HISTORY_BREAST_CANCER", "family history of breast cancer"),
    RiskFactor("CHEST_RADIATION_THERAPY_AGE_10_30", "chest radiation therapy between ages 10 and 30"),
    RiskFactor("LI_FRAUMENI_SYNDROME", "Li-Fraumeni syndrome"),
    RiskFactor("COWDEN_SYNDROME", "Cowden syndrome"),
    RiskFactor("BANNAYAN_RILEY_RUVALCABA_SYNDROME", "Bannayan-Riley-Ruvalcaba syndrome"),
    RiskFactor("PERSONAL_HISTORY_BREAST_CANCER", "personal history of breast cancer"),
    RiskFactor("DENSE_BREAST_TISSUE", "dense breast tissue"),
)

Registry = tuple[RiskFactor, ...]

_CODE_TO_NAME: dict[str, str] = {f.code: f.display_name for f in REGISTRY}
_NAME_TO_CODE: dict[str, str] = {f.display_name: f.code for f in REGISTRY}


class UnknownRiskFactor(ValueError):
    """A risk-factor code that is not in the registry."""

    def __init__(self, code: str) -> None:
        self.code = code
        super().__init__(f"unknown risk factor code: {code!r}")


def require_code(code: str, registry: Registry = REGISTRY) -> str:
    if code not in {f.code for f in registry}:
        raise UnknownRiskFactor(code)
    return code


def display_name(code: str) -> str:
    try:
        return _CODE_TO_NAME[code]
    except KeyError:
        raise UnknownRiskFactor(code) from None


def code_for_display_name(name: str) -> str:
    try:
        return _NAME_TO_CODE[name]
    except KeyError:
        raise UnknownRiskFactor(name) from None


def codes_in_registry_order(codes: set[str] | frozenset[str], registry: Registry = REGISTRY) -> list[str]:
    """Order a code set by registry declaration order (canonical order)."""
    order = {f.code: i for i, f in enumerate(registry)}
    return sorted(codes, key=lambda c: order[c])


class Recommendation(enum.Enum):
    """Screening recommendation vocabulary.

    Priority is a strict total order used for conflict resolution: the
    highest-priority recommendation among triggered rules wins. Referral to a
    physician outranks every automated screening action; among the screening
    actions, annual MRI plus mammogram is the most intensive and sits on top.
    """

    NO_ROUTINE_SCREENING = "NO_ROUTINE_SCREENING"
    OPTIONAL_ANNUAL_MAMMOGRAM = "OPTIONAL_ANNUAL_MAMMOGRAM"
    BIENNIAL_OR_ANNUAL_MAMMOGRAM = "BIENNIAL_OR_ANNUAL_MAMMOGRAM"
    ANNUAL_MAMMOGRAM = "ANNUAL_MAMMOGRAM"
    ANNUAL_MRI_AND_MAMMOGRAM = "ANNUAL_MRI_AND_MAMMOGRAM"
    CONSULT_PHYSICIAN = "CONSULT_PHYSICIAN"

    @property
    def code(self) -> str:
        return self.value

    @property
    def priority(self) -> int:
        return _PRIORITY[self]


_PRIORITY: dict[Recommendation, int] = {
    Recommendation.NO_ROUTINE_SCREENING: 0,
    Recommendation.OPTIONAL_ANNUAL_MAMMOGRAM: 1,
    Recommendation.BIENNIAL_OR_ANNUAL_MAMMOGRAM: 2,
    Recommendation.ANNUAL_MAMMOGRAM: 3,
    Recommendation.ANNUAL_MRI_AND_MAMMOGRAM: 4,
    Recommendation.CONSULT_PHYSICIAN: 5,
}

# Rendered phrases used when rules are spoken to the model and when model
# replies are matched back to the vocabulary.
RECOMMENDATION_PHRASES: dict[Recommendation, str] = {
    Recommendation.NO_ROUTINE_SCREENING: "no routine screening",
    Recommendation.OPTIONAL_ANNUAL_MAMMOGRAM: "optional annual mammogram",
    Recommendation.BIENNIAL_OR_ANNUAL_MAMMOGRAM: "biennial or annual mammogram",
    Recommendation.ANNUAL_MAMMOGRAM: "annual mammogram",
    Recommendation.ANNUAL_MRI_AND_MAMMOGRAM: "annual MRI and mammogram",
    Recommendation.CONSULT_PHYSICIAN: "consulting a physician",
}


def recommendation_phrase(rec: Recommendation) -> str:
    return RECOMMENDATION_PHRASES[rec]


GENDERS: tuple[str, str] = ("female", "male")
