from __future__ import annotations

import hashlib

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from screenwise import rules, vocab

CODES = [f.code for f in vocab.REGISTRY]

conditions = st.one_of(
    st.builds(rules.GenderIs, st.sampled_from(vocab.GENDERS)),
    st.builds(
        rules.AgeInRange,
        st.integers(0, rules.AGE_DOMAIN_MAX),
        st.integers(0, rules.AGE_DOMAIN_MAX),
    ),
    st.builds(rules.HasRiskFactor, st.sampled_from(CODES)),
    st.builds(rules.RiskFactorCountAtLeast, st.integers(0, 6)),
)

# Quoted strings may hold anything printable except the quote itself.
quotable = st.text(
    alphabet=st.characters(min_codepoint=32, max_codepoint=126, blacklist_characters='"'),
    max_size=20,
)
slugs = st.from_regex(r"[a-z][a-z0-9_]{0,15}", fullmatch=True)


@st.composite
def rulesets(draw) -> rules.RuleSet:
    numbers = draw(st.lists(st.integers(1, 999), unique=True, max_size=6))
    built = tuple(
        rules.Rule(
            rule_id=f"R{n}",
            name=draw(slugs),
            conditions=tuple(draw(st.lists(conditions, min_size=1, max_size=4))),
            recommendation=draw(st.sampled_from(list(vocab.Recommendation))),
            source_note=draw(quotable),
        )
        for n in numbers
    )
    return rules.make_ruleset(built, version=draw(quotable))


# --- parsing ----------------------------------------------------------------


def test_default_pack_parses_to_eight_rules(default_rs):
    assert [r.rule_id for r in default_rs.rules] == [f"R{i}" for i in range(1, 9)]
    assert default_rs.version == "1"
    assert len(default_rs.checksum) == 64


def test_parse_ignores_comments_and_blank_lines():
    text = '# header\n\nRULE R1 "one" IF gender_is(female) THEN ANNUAL_MAMMOGRAM\n\n'
    rs = rules.parse_rules(text)
    assert len(rs.rules) == 1
    assert rs.rules[0].name == "one"


def test_parse_is_insensitive_to_token_spacing():
    tight = 'RULE R1 "a" IF age_in(40,44) THEN ANNUAL_MAMMOGRAM'
    loose = 'RULE  R1   "a"  IF  age_in( 40 , 44 )  THEN  ANNUAL_MAMMOGRAM '
    assert rules.parse_rules(tight) == rules.parse_rules(loose)


def test_version_header_and_note_clause_round_trip():
    text = 'VERSION "2024-a"\nRULE R3 "x" IF gender_is(male) THEN NO_ROUTINE_SCREENING NOTE "panel sec 4"\n'
    rs = rules.parse_rules(text)
    assert rs.version == "2024-a"
    assert rs.rules[0].source_note == "panel sec 4"
    assert rules.parse_rules(rules.serialize(rs)) == rs


def test_inverted_age_interval_parses_without_error():
    rs = rules.parse_rules('RULE R1 "a" IF age_in(50,40) THEN ANNUAL_MAMMOGRAM')
    assert rs.rules[0].conditions == (rules.AgeInRange(50, 40),)


@pytest.mark.parametrize(
    "text, expected_fragment",
    [
        ('RULE R1 "a" gender_is(female) THEN ANNUAL_MAMMOGRAM', "'IF'"),
        ('RULE R1 "a" IF gender_is(female) ANNUAL_MAMMOGRAM', "'THEN'"),
        ('RULE R01 "a" IF gender_is(female) THEN ANNUAL_MAMMOGRAM', "rule id"),
        ('RULE R1 "Bad Name" IF gender_is(female) THEN ANNUAL_MAMMOGRAM', "slug"),
        ('RULE R1 "a" IF gender_is(robot) THEN ANNUAL_MAMMOGRAM', "female or male"),
        ('RULE R1 "a" IF age_in(40,131) THEN ANNUAL_MAMMOGRAM', "age bound"),
        ('RULE R1 "a" IF frobnicates(x) THEN ANNUAL_MAMMOGRAM', "condition term"),
        ('RULE R1 "a" IF gender_is(female) THEN GO_SWIMMING', "recommendation"),
        ('RULE R1 "a" IF gender_is(female) THEN ANNUAL_MAMMOGRAM extra', "end of line"),
        ('RULE R1 "a" IF gender_is(female)', "'THEN'"),
        ("VERSION", "quoted version"),
    ],
)
def test_syntax_errors_carry_expected_token(text, expected_fragment):
    with pytest.raises(rules.RuleSyntaxError) as exc:
        rules.parse_rules(text)
    assert expected_fragment in str(exc.value)
    assert exc.value.line >= 1
    assert exc.value.column >= 1


def test_syntax_error_reports_the_right_line():
    text = 'RULE R1 "a" IF gender_is(female) THEN ANNUAL_MAMMOGRAM\n# fine\nRULE R2 "b" IF THEN ANNUAL_MAMMOGRAM\n'
    with pytest.raises(rules.RuleSyntaxError) as exc:
        rules.parse_rules(text)
    assert exc.value.line == 3
    assert isinstance(exc.value, ValueError)


def test_unknown_risk_factor_code_is_rejected():
    with pytest.raises(vocab.UnknownRiskFactor):
        rules.parse_rules('RULE R1 "a" IF has_risk_factor(EATS_KALE) THEN ANNUAL_MAMMOGRAM')


def test_duplicate_rule_id_is_rejected():
    text = (
        'RULE R1 "a" IF gender_is(female) THEN ANNUAL_MAMMOGRAM\n'
        'RULE R1 "b" IF gender_is(male) THEN NO_ROUTINE_SCREENING\n'
    )
    with pytest.raises(rules.DuplicateRuleId) as exc:
        rules.parse_rules(text)
    assert exc.value.rule_id == "R1"


# --- serialization ----------------------------------------------------------


def test_round_trip_default_pack(default_rs):
    assert rules.parse_rules(rules.serialize(default_rs)) == default_rs


def test_checksum_is_sha256_of_canonical_text(default_rs):
    expected = hashlib.sha256(rules.serialize(default_rs).encode("utf-8")).hexdigest()
    assert default_rs.checksum == expected


def test_serialize_emits_one_line_per_rule_plus_header(default_rs):
    lines = rules.serialize(default_rs).splitlines()
    assert lines[0] == 'VERSION "1"'
    assert len(lines) == 1 + len(default_rs.rules)
    assert all(line.startswith("RULE ") for line in lines[1:])


@settings(max_examples=80, suppress_health_check=[HealthCheck.too_slow])
@given(rulesets())
def test_round_trip_arbitrary_rulesets(rs):
    assert rules.parse_rules(rules.serialize(rs)) == rs


@settings(max_examples=40, suppress_health_check=[HealthCheck.too_slow])
@given(rulesets())
def test_serialization_is_stable(rs):
    once = rules.serialize(rs)
    assert rules.serialize(rules.parse_rules(once)) == once


# --- prompt rendering -------------------------------------------------------


def test_rule_prompt_golden_rendering(default_rs):
    # Frozen sentence shape; mocks invert this text, so it must not drift.
    assert rules.render_rule_prompt(default_rs.rules[0]) == (
        "Rule R1: IF the person has risk factor known BRCA1/BRCA2 gene mutation "
        "AND the person's age is between 30 and 130 "
        "THEN recommend annual MRI and mammogram."
    )


def test_rule_prompt_pluralizes_factor_counts():
    one = rules.Rule(
        "R1", "a", (rules.RiskFactorCountAtLeast(1),), vocab.Recommendation.CONSULT_PHYSICIAN
    )
    two = rules.Rule(
        "R2", "b", (rules.RiskFactorCountAtLeast(2),), vocab.Recommendation.CONSULT_PHYSICIAN
    )
    assert "at least 1 risk factor THEN" in rules.render_rule_prompt(one)
    assert "at least 2 risk factors THEN" in rules.render_rule_prompt(two)


# --- validation -------------------------------------------------------------


def _mk(rule_id: str, conds, rec) -> rules.Rule:
    return rules.Rule(rule_id, "r", tuple(conds), rec)


def test_default_pack_validates_clean(default_rs):
    report = rules.validate_ruleset(default_rs)
    assert report.ok
    assert report.unreachable == ()
    # Overlap pairs with differing advice, resolved by priority; counted by hand.
    assert len(report.conflicts) == 19


def test_empty_age_interval_is_unreachable():
    rs = rules.make_ruleset(
        (
            _mk("R1", [rules.AgeInRange(50, 40)], vocab.Recommendation.ANNUAL_MAMMOGRAM),
            _mk("R2", [rules.GenderIs("female")], vocab.Recommendation.ANNUAL_MAMMOGRAM),
        )
    )
    report = rules.validate_ruleset(rs)
    assert report.unreachable == ("R1",)
    assert not report.ok


def test_factor_count_beyond_grid_maximum_is_unreachable():
    rs = rules.make_ruleset(
        (_mk("R1", [rules.RiskFactorCountAtLeast(5)], vocab.Recommendation.CONSULT_PHYSICIAN),)
    )
    assert rules.validate_ruleset(rs).unreachable == ("R1",)


def test_conflicts_are_reported_pairwise_with_both_recommendations():
    rs = rules.make_ruleset(
        (
            _mk("R1", [rules.GenderIs("female")], vocab.Recommendation.ANNUAL_MAMMOGRAM),
            _mk("R2", [rules.GenderIs("female")], vocab.Recommendation.NO_ROUTINE_SCREENING),
            _mk("R3", [rules.GenderIs("female")], vocab.Recommendation.ANNUAL_MAMMOGRAM),
        )
    )
    report = rules.validate_ruleset(rs)
    assert report.ok  # conflicts are informational
    assert {c.rule_ids for c in report.conflicts} == {("R1", "R2"), ("R2", "R3")}
    for c in report.conflicts:
        assert c.recommendations[0] != c.recommendations[1]


def test_rules_that_never_disagree_raise_no_conflict():
    rs = rules.make_ruleset(
        (
            _mk("R1", [rules.GenderIs("male")], vocab.Recommendation.NO_ROUTINE_SCREENING),
            _mk("R2", [rules.GenderIs("female")], vocab.Recommendation.ANNUAL_MAMMOGRAM),
        )
    )
    assert rules.validate_ruleset(rs).conflicts == ()
