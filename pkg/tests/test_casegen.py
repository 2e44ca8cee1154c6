from __future__ import annotations

import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from screenwise import casegen, vocab

CODES = [f.code for f in vocab.REGISTRY]


def _case(gender="female", age=47, factors=("FAMILY_HISTORY_BREAST_CANCER",), case_id=1):
    fs = frozenset(factors)
    return casegen.UseCase(case_id, gender, age, fs, casegen.build_history(fs))


@st.composite
def usecases(draw) -> casegen.UseCase:
    gender = draw(st.sampled_from(vocab.GENDERS))
    age = draw(st.integers(casegen.AGE_MIN, casegen.AGE_MAX))
    k = draw(st.integers(1, casegen.MAX_FACTORS))
    factors = frozenset(draw(st.permutations(CODES))[:k])
    return casegen.UseCase(
        draw(st.integers(1, 9999)), gender, age, factors, casegen.build_history(factors)
    )


# --- generation -------------------------------------------------------------


def test_generation_is_deterministic_per_seed():
    cfg = casegen.GeneratorConfig(seed=11, count=40)
    assert casegen.generate_cases(cfg) == casegen.generate_cases(cfg)


def test_different_seeds_give_different_streams():
    a = casegen.generate_cases(casegen.GeneratorConfig(seed=1, count=30))
    b = casegen.generate_cases(casegen.GeneratorConfig(seed=2, count=30))
    assert [c.age for c in a] != [c.age for c in b]


def test_case_ids_are_sequential_from_one(cases50):
    assert [c.case_id for c in cases50] == list(range(1, 51))


def test_generated_cases_respect_bounds(cases50):
    for c in cases50:
        assert c.gender in vocab.GENDERS
        assert casegen.AGE_MIN <= c.age <= casegen.AGE_MAX
        assert 1 <= len(c.risk_factors) <= casegen.MAX_FACTORS
        assert c.risk_factors <= set(CODES)


def test_large_sample_covers_the_whole_domain():
    cases = casegen.generate_cases(casegen.GeneratorConfig(seed=123, count=1000))
    assert {c.gender for c in cases} == set(vocab.GENDERS)
    seen_codes = set().union(*(c.risk_factors for c in cases))
    assert seen_codes == set(CODES)
    assert {len(c.risk_factors) for c in cases} == {1, 2, 3, 4}


def test_prefix_stability_of_the_case_stream():
    # Case i depends only on (seed, i), so shorter runs are prefixes.
    long = casegen.generate_cases(casegen.GeneratorConfig(seed=5, count=60))
    short = casegen.generate_cases(casegen.GeneratorConfig(seed=5, count=20))
    assert long[:20] == short


def test_generate_rejects_bad_count_and_empty_registry():
    with pytest.raises(ValueError):
        casegen.generate_cases(casegen.GeneratorConfig(seed=1, count=0))
    with pytest.raises(casegen.EmptyRegistry):
        casegen.generate_cases(casegen.GeneratorConfig(seed=1, count=5, registry=()))


# --- invariants -------------------------------------------------------------


def test_build_history_phrasing():
    assert casegen.build_history(frozenset()) == "Background: no documented risk factors."
    one = casegen.build_history({"BRCA_MUTATION"})
    assert one == "Background: the patient reports known BRCA1/BRCA2 gene mutation."
    three = casegen.build_history(
        {"BRCA_MUTATION", "DENSE_BREAST_TISSUE", "CHEST_RADIATION_THERAPY_AGE_10_30"}
    )
    assert three.count(",") == 1 and " and " in three


@pytest.mark.parametrize(
    "mutation",
    [
        {"age": 15},
        {"age": 91},
        {"gender": "robot"},
        {"risk_factors": frozenset()},
        {"risk_factors": frozenset(CODES[:5])},
        {"history_text": ""},
        {"history_text": "Background: nothing."},
    ],
)
def test_validate_case_rejects_broken_cases(mutation):
    base = _case()
    import dataclasses

    broken = dataclasses.replace(base, **mutation)
    with pytest.raises(casegen.InvariantViolation):
        casegen.validate_case(broken)


def test_validate_case_rejects_double_mention():
    c = _case()
    doubled = c.history_text + " " + vocab.display_name("FAMILY_HISTORY_BREAST_CANCER")
    import dataclasses

    with pytest.raises(casegen.InvariantViolation):
        casegen.validate_case(dataclasses.replace(c, history_text=doubled))


# --- structured rendering ---------------------------------------------------


def test_structured_rendering_golden():
    c = _case(gender="female", age=47, factors=("FAMILY_HISTORY_BREAST_CANCER",))
    rc = casegen.render_structured(c)
    assert rc.mode == "structured"
    assert rc.text == (
        "gender: female\n"
        "age: 47\n"
        "risk_factors: FAMILY_HISTORY_BREAST_CANCER\n"
        "history: Background: the patient reports family history of breast cancer."
    )


def test_structured_factor_order_is_registry_order():
    c = _case(factors=("DENSE_BREAST_TISSUE", "BRCA_MUTATION"))
    line = casegen.render_structured(c).text.splitlines()[2]
    codes = line.removeprefix("risk_factors: ").split(", ")
    assert codes == [x for x in CODES if x in c.risk_factors]


@settings(max_examples=120)
@given(usecases())
def test_structured_round_trip_identity(c):
    rc = casegen.render_structured(c)
    assert casegen.parse_structured(rc.text, case_id=c.case_id) == c


def test_parse_structured_tolerates_trailing_blank_lines():
    rc = casegen.render_structured(_case())
    assert casegen.parse_structured(rc.text + "\n\n", case_id=1) == _case()


@pytest.mark.parametrize(
    "wreck, exc",
    [
        (lambda t: t.replace("age: 47", "age: unknown"), casegen.FormatError),
        (lambda t: t.replace("age: 47", "age: 200"), casegen.InvariantViolation),
        (lambda t: "\n".join(t.splitlines()[:3]), casegen.FormatError),
        (lambda t: t + "\nextra: line", casegen.FormatError),
        (lambda t: t.replace("gender:", "sex:"), casegen.FormatError),
        (
            lambda t: t.replace(
                "FAMILY_HISTORY_BREAST_CANCER",
                "FAMILY_HISTORY_BREAST_CANCER, FAMILY_HISTORY_BREAST_CANCER",
            ),
            casegen.FormatError,
        ),
    ],
)
def test_parse_structured_failure_modes(wreck, exc):
    text = casegen.render_structured(_case()).text
    with pytest.raises(exc):
        casegen.parse_structured(wreck(text), case_id=1)


# --- unstructured rendering -------------------------------------------------


def test_template_pool_has_at_least_five_templates():
    assert len(casegen.TEMPLATE_POOLS["default"]) >= 5


def test_unstructured_is_deterministic_and_label_free(cases50):
    for c in cases50[:10]:
        a = casegen.render_unstructured(c, template_seed=9)
        b = casegen.render_unstructured(c, template_seed=9)
        assert a == b
        assert a.mode == "unstructured"
        for label in ("gender:", "age:", "risk_factors:", "history:"):
            assert label not in a.text


def test_unstructured_varies_across_template_seeds(cases50):
    c = cases50[0]
    texts = {casegen.render_unstructured(c, template_seed=s).text for s in range(8)}
    assert len(texts) > 1


def test_unstructured_age_is_the_first_plausible_integer(cases50):
    # The narrative extractor takes the first integer in [16, 90].
    for c in cases50:
        text = casegen.render_unstructured(c, template_seed=3).text
        ints = [int(tok) for tok in re.findall(r"\d+", text)]
        plausible = [n for n in ints if casegen.AGE_MIN <= n <= casegen.AGE_MAX]
        assert plausible[0] == c.age


def test_unstructured_mentions_each_display_name_once(cases50):
    for c in cases50:
        text = casegen.render_unstructured(c, template_seed=4).text
        for code in c.risk_factors:
            assert text.count(vocab.display_name(code)) == 1


def test_render_case_dispatches_on_mode():
    c = _case()
    assert casegen.render_case(c, "structured").text.startswith("gender:")
    assert casegen.render_case(c, "unstructured", template_seed=1).mode == "unstructured"
    with pytest.raises(ValueError):
        casegen.render_case(c, "verbal")


# --- case files ---------------------------------------------------------------


def test_cases_jsonl_round_trip(tmp_path, cases50):
    path = tmp_path / "cases.jsonl"
    casegen.write_cases_jsonl(path, cases50)
    assert casegen.read_cases_jsonl(path) == cases50


def test_cases_jsonl_is_byte_deterministic(tmp_path, cases50):
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    casegen.write_cases_jsonl(p1, cases50)
    casegen.write_cases_jsonl(p2, cases50)
    assert p1.read_bytes() == p2.read_bytes()


def test_read_cases_jsonl_rejects_bad_rows(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"case_id": 1, "gender": "female"}\n')
    with pytest.raises(casegen.FormatError):
        casegen.read_cases_jsonl(bad)
    bad.write_text("not json\n")
    with pytest.raises(casegen.FormatError):
        casegen.read_cases_jsonl(bad)
