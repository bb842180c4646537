import random

import pytest

from freedl.grammar import parse_formula, pretty
from freedl.oracle import OracleBounds, brute_force_sat, candidate_count, iter_models
from freedl.quasimodel import SAT, UNSAT, UNSAT_UP_TO, TypeSpace, extract_model, search_quasimodel
from freedl.reductions import (
    PipelineOptions,
    added_axioms,
    denotes_everywhere_axiom,
    denotes_somewhere_axiom,
    eliminate_iota,
    pipeline,
    rda_axioms,
    run_pipeline,
    total_to_partial,
)
from freedl.semantics import check_rda, formula_sat, is_ghost, is_total, satisfying_states, term_value
from freedl.syntax import (
    LTLF,
    TRUE_FORMULA,
    ConceptName,
    Iota,
    closure,
    conjoin,
    contains_iota,
    desugar_assertions,
    internalize,
    normalize,
    signature_of,
)

from generators import random_formula

UNSAT_VERDICTS = (UNSAT, UNSAT_UP_TO)


def oracle(f, total=False, rigid=False, limit=400_000):
    """Oracle with the largest of (2,2), (2,1), (1,2) bounds that fits ``limit``."""
    sig = signature_of(f)
    for k, n in ((2, 2), (1, 2), (2, 1), (1, 1)):
        bounds = OracleBounds(k, n, sig, total=total, rigid=rigid)
        if candidate_count(bounds) <= limit:
            return brute_force_sat(f, bounds)
    raise AssertionError("no usable bounds")


# ------------------------------------------------------------------- totality


def test_total_axiom_text():
    f = total_to_partial(parse_formula("[TOP <= ~{a}]"))
    assert pretty(f) == "([true <= ~{a}] && BOX+ [true <= some u.{a}])"
    assert search_quasimodel(pipeline(f)).status == UNSAT


def test_total_without_names_is_identity():
    f = parse_formula("[A <= dia B]")
    assert total_to_partial(f) is f


def test_total_assertion_still_satisfiable():
    f = total_to_partial(parse_formula("A(a)"))
    model, w = oracle(f)
    assert model.worlds == 1 and is_total(model, ["a"])


def test_total_reduction_faithful():
    rng = random.Random(31)
    seen = 0
    while seen < 120:
        f = random_formula(rng, 1)
        if not signature_of(f).individuals:
            continue
        direct = oracle(f, total=True) is not None
        reduced = oracle(total_to_partial(f)) is not None
        assert direct == reduced, pretty(f)
        seen += 1


# ------------------------------------------------------------------------ RDA


def test_rda_axiom_text():
    assert pretty(rda_axioms(["a"])) == "BOX+ [dia+ {a} <= box+ {a}]"
    assert rda_axioms([]) == TRUE_FORMULA
    assert pretty(rda_axioms(["a"], LTLF)) == "BOX+ [F+ {a} <= G+ {a}]"


def test_rda_axiom_models_are_rigid():
    f = conjoin([rda_axioms(["a", "b"]), parse_formula("[A <= B]")])
    bounds = OracleBounds(3, 2, signature_of(f))
    count = 0
    for model, states in iter_models(f, bounds):
        for w in states:
            block = model.block_of(w)
            local = type(model)(model.domain_size, [model.states[v] for v in block])
            assert check_rda(local, ["a", "b"])
        count += 1
        if count >= 300:
            break
    assert count >= 100


def test_denotation_axioms():
    some = denotes_somewhere_axiom("a")
    every = denotes_everywhere_axiom("a")
    assert pretty(some) == "[true <= dia+ some u.{a}]"
    model, w = oracle(conjoin([some, parse_formula("[TOP <= A]")]))
    assert not is_ghost(model, "a")
    for model, states in iter_models(every, OracleBounds(2, 2, signature_of(every), all_partitions=False)):
        assert states == list(range(model.worlds)) or not states
        if states:
            assert is_total(model, ["a"])
    ghost = brute_force_sat(parse_formula("[TOP <= ~{a}]"), OracleBounds(1, 1, signature_of(some)))[0]
    assert not formula_sat(ghost, 0, some)


# ---------------------------------------------------------------------- iota


def test_iota_free_input_unchanged():
    f = parse_formula("[A <= some r.{a}]")
    out, report = eliminate_iota(f)
    assert out is f and len(report) == 0


def test_iota_output_has_no_descriptions():
    rng = random.Random(32)
    for _ in range(200):
        f = desugar_assertions(random_formula(rng, 2, iota=True))
        out, report = eliminate_iota(f)
        assert not contains_iota(out)
        assert all(n.startswith("__iota_") for n in report.fresh_concepts | report.fresh_individuals)


def test_iota_shares_symbols_for_equal_bodies():
    f = parse_formula("([{iota ~~A} <= B] && [{iota A} <= dia {iota A}])")
    out, report = eliminate_iota(f)
    assert len(report) == 1


def test_iota_nested_innermost_first():
    f = parse_formula("[TOP <= some u.{iota (A & ~{iota B})}]")
    out, report = eliminate_iota(f)
    assert len(report) == 2
    assert report.entries[0].body == ConceptName("B")
    assert not contains_iota(out)


def test_iota_requires_desugared_input():
    with pytest.raises(ValueError):
        eliminate_iota(parse_formula("A(iota B)"))


@pytest.mark.parametrize("text,sat", [
    ("[TOP <= some u.{iota A}]", True),
    ("([TOP <= some u.{iota A}] && ([TOP <= some u.(A & {c})] && [TOP <= some u.(A & ~{c})]))", False),
    ("([TOP <= ~{iota A}] && [TOP <= A])", True),
])
def test_iota_spot_checks(text, sat):
    f = parse_formula(text)
    assert (oracle(f) is not None) == sat
    out, _ = eliminate_iota(f)
    verdict = search_quasimodel(normalize(internalize(out)))
    assert (verdict.status == SAT) == sat
    if sat:
        model = extract_model(verdict.certificate)
        assert satisfying_states(model, f)


def test_iota_elimination_equisatisfiable_against_oracle():
    rng = random.Random(33)
    seen = 0
    while seen < 40:
        f = desugar_assertions(random_formula(rng, 1, iota=True))
        if not contains_iota(f):
            continue
        out, _ = eliminate_iota(f)
        c = normalize(internalize(out))
        if len(TypeSpace(closure(c)).free) > 20:
            continue
        found = oracle(f)
        verdict = search_quasimodel(c)
        if found is not None:
            assert verdict.status not in UNSAT_VERDICTS, pretty(f)
        if verdict.status == SAT:
            assert satisfying_states(extract_model(verdict.certificate), f), pretty(f)
        seen += 1


def test_iota_definitions_pin_fresh_concept():
    body = ConceptName("A")
    f = parse_formula("[TOP <= some u.{iota A}]")
    out, report = eliminate_iota(f)
    fresh = report.entries[0].concept
    checked = 0
    for model, states in iter_models(out, OracleBounds(2, 2, signature_of(out), all_partitions=False)):
        for w in states:
            pinned = model.states[w].concepts.get(fresh, frozenset())
            value = term_value(model, w, Iota(body))
            assert pinned == (frozenset() if value is None else {value})
            checked += 1
    assert checked > 0


# ------------------------------------------------------------------ pipeline


def test_pipeline_stages_compose():
    f = parse_formula("A(a)")
    expected = normalize(internalize(desugar_assertions(f)))
    assert pipeline(f) == expected
    res = run_pipeline(f, PipelineOptions("total", True))
    assert pretty(res.axiomatized).count("BOX+") == 2


def test_axioms_use_original_names_only():
    f = parse_formula("B(iota A)")
    res = run_pipeline(f, PipelineOptions("total", True))
    assert res.original_signature.individuals == frozenset()
    assert res.axiomatized == res.iota_free
    assert added_axioms(["a"], PipelineOptions("partial", False), "s5") == []


def test_pipeline_agrees_with_oracle_under_all_options():
    rng = random.Random(34)
    options = [PipelineOptions(s, r) for s in ("partial", "total") for r in (False, True)]
    seen = 0
    while seen < 320:
        f = random_formula(rng, 2)
        opts = options[seen % 4]
        res = run_pipeline(f, opts)
        if len(closure(res.concept)) > 24:
            continue
        verdict = search_quasimodel(res.concept)
        found = oracle(f, total=opts.semantics == "total", rigid=opts.rda, limit=200_000)
        if found is not None:
            assert verdict.status not in UNSAT_VERDICTS, (pretty(f), opts)
        if verdict.status == SAT:
            model = extract_model(verdict.certificate)
            check = conjoin([f] + added_axioms(res.original_signature.individuals, opts, "s5"))
            assert satisfying_states(model, check), (pretty(f), opts)
        seen += 1
