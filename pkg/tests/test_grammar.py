import pytest
from hypothesis import given, settings

from freedl.grammar import ParseError, parse_concept, parse_formula, pretty
from freedl.syntax import TOP, BOTTOM, ConceptName, ExistsU, Inclusion, Nominal, Individual, Not

from generators import ltlf_concepts, s5_concepts, s5_formulas


@settings(max_examples=300, deadline=None)
@given(s5_concepts)
def test_concept_roundtrip(c):
    assert parse_concept(pretty(c)) == c


@settings(max_examples=200, deadline=None)
@given(ltlf_concepts)
def test_temporal_concept_roundtrip(c):
    assert parse_concept(pretty(c)) == c


@settings(max_examples=200, deadline=None)
@given(s5_formulas)
def test_formula_roundtrip(f):
    text = pretty(f)
    assert parse_formula(text) == f
    assert pretty(parse_formula(text)) == text


def test_keyword_aliases():
    assert parse_formula("[TOP <= ~{a}]") == Inclusion(TOP, Not(Nominal(Individual("a"))))
    assert parse_concept("BOTTOM") == BOTTOM
    assert parse_concept("true") == TOP


def test_universal_role_concepts():
    assert parse_concept("some u.A") == ExistsU(ConceptName("A"))


@pytest.mark.parametrize("text", [
    "{u}",
    "some u.{u}",
    "u(a,b)",
])
def test_reserved_universal_role(text):
    with pytest.raises(ParseError):
        parse_formula(text) if "(" in text else parse_concept(text)


@pytest.mark.parametrize("text", ["A & B", "(A & B", "some r A", "[A <= ]", "a", "(A U)"])
def test_malformed_concepts_rejected(text):
    with pytest.raises(ParseError):
        parse_concept(text)


def test_error_position_reported():
    with pytest.raises(ParseError) as info:
        parse_formula("[A <= B] <= C")
    assert "line 1, column 10" in str(info.value)


def test_binary_forms_need_parentheses():
    assert pretty(parse_concept("(A & (B | ~C))")) == "(A & (B | ~C))"
    with pytest.raises(ParseError):
        parse_concept("(A & B & C)")
