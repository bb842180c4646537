import random

import pytest

from freedl.grammar import parse_concept
from freedl.oracle import OracleBounds, brute_force_sat, candidate_count
from freedl.quasimodel import (
    CONDITIONS,
    SAT,
    UNSAT,
    UNSAT_UP_TO,
    UNKNOWN,
    Quasimodel,
    SearchConfig,
    TypeSpace,
    brute_force_types,
    check_quasistate,
    check_run,
    coherent_types,
    condition_summary,
    enumerate_types,
    extract_model,
    model_to_quasimodel,
    search_quasimodel,
    theoretical_world_bound,
    verify_quasimodel,
)
from freedl.reductions import PipelineOptions, pipeline
from freedl.semantics import PartialInterpretation, concept_extension, make_state, restrict_to_block
from freedl.syntax import Nominal, closure, concept_goal, normalize, signature_of

from certificates import BASE, BASE_ROOT, EXT, T1, T2, TX, TY, base_certificate, extended_certificate
from generators import random_concept, random_formula


def types_of(text):
    return enumerate_types(closure(normalize(parse_concept(text))))


# ------------------------------------------------------------------ types


def test_type_counts():
    assert len(types_of("(A & dia B)")) == 8
    cl = closure(normalize(parse_concept("A")))
    assert sorted(types_of("A")) == sorted([1 << cl.index(parse_concept("A")), 1 << cl.index(parse_concept("~A"))])


def test_type_enumeration_matches_brute_force():
    rng = random.Random(41)
    done = 0
    while done < 80:
        cl = closure(normalize(random_concept(rng, 3)))
        if len(cl) > 12:
            continue
        fast = enumerate_types(cl)
        assert sorted(fast) == brute_force_types(cl)
        assert len(fast) == len(set(fast)) <= 2 ** len(cl)
        done += 1


def test_coherent_types_are_the_coherent_subset():
    rng = random.Random(42)
    for _ in range(40):
        cl = closure(normalize(random_concept(rng, 3)))
        sp = TypeSpace(cl)
        expected = [t for t in enumerate_types(cl) if sp.locally_coherent(t)]
        assert coherent_types(sp, chunk=4) == expected


@pytest.mark.parametrize("n,bound", [(1, 4), (2, 64), (6, 147456)])
def test_world_bound(n, bound):
    assert theoretical_world_bound(n) == bound


def test_world_bound_saturates():
    assert theoretical_world_bound(1000) == 2**63 - 1


# ---------------------------------------------------------- diagnostics


def test_quasistate_checks():
    assert check_quasistate([TX, TY], EXT) == []
    assert [v.condition for v in check_quasistate([TX], EXT)] == ["Q2"]
    second = TY | (1 << EXT.index(parse_concept("B")))
    second &= ~(1 << EXT.index(parse_concept("~B")))
    assert "Q1" in {v.condition for v in check_quasistate([TX, TY, second], EXT)}


def test_run_checks():
    q = (tuple([T1]), tuple([T2]))
    assert check_run((T1, T2), q, BASE) == []
    bad = check_run((T1,), (tuple([T1]),), BASE)
    assert {v.condition for v in bad} == {"R1"}
    with pytest.raises(ValueError):
        check_run((T2, T2), q, BASE)


def test_run_r1_both_directions():
    cl = closure(normalize(parse_concept("(A | dia A)")))
    dia = 1 << cl.index(normalize(parse_concept("dia A")))
    types = enumerate_types(cl)
    without = next(t for t in types if not t & dia and not t >> cl.index(parse_concept("A")) & 1)
    with_a = next(t for t in types if not t & dia and t >> cl.index(parse_concept("A")) & 1)
    bad = check_run((without, with_a), ((without,), (with_a,)), cl)
    assert bad and all(v.condition == "R1" for v in bad)
    assert {v.world for v in bad} == {0, 1}


def test_hand_built_certificates_verify():
    assert verify_quasimodel(base_certificate(), BASE_ROOT) == []
    assert verify_quasimodel(extended_certificate()) == []
    assert all(condition_summary([]).values()) and set(condition_summary([])) == set(CONDITIONS)


def test_dropping_the_run_breaks_m1():
    qm = base_certificate()
    dropped = Quasimodel(qm.closure, qm.quasistates, ())
    assert {v.condition for v in verify_quasimodel(dropped)} == {"M1"}


def test_duplicate_nominal_run_breaks_m2():
    qm = extended_certificate()
    dup = Quasimodel(qm.closure, qm.quasistates, qm.runs + (qm.runs[1],))
    assert {v.condition for v in verify_quasimodel(dup)} == {"M2"}


def test_verify_rejects_foreign_root():
    with pytest.raises(ValueError):
        verify_quasimodel(base_certificate(), normalize(parse_concept("A")))


# ------------------------------------------------------------------ search


def test_contradiction_unsat():
    v = search_quasimodel(normalize(parse_concept("(A & ~A)")))
    assert v.status == UNSAT and v.certificate is None


def test_diamonds_sat_with_two_worlds_one_run():
    v = search_quasimodel(BASE_ROOT)
    assert v.status == SAT
    assert v.certificate.worlds == 2 and len(v.certificate.runs) == 1
    assert verify_quasimodel(v.certificate) == []


def test_non_rigid_example():
    text = "(some u.(C & dia {a}) & some u.(~C & dia {a}))"
    assert search_quasimodel(normalize(parse_concept(text))).status == SAT
    rigid = pipeline(concept_goal(parse_concept(text)), PipelineOptions(rda=True))
    assert search_quasimodel(rigid).status in (UNSAT, UNSAT_UP_TO)


def test_node_ceiling_gives_unknown():
    c = normalize(parse_concept("(some u.(C & dia {a}) & some u.(~C & dia {a}))"))
    v = search_quasimodel(c, SearchConfig(node_ceiling=1))
    assert v.status == UNKNOWN


def test_search_preconditions():
    with pytest.raises(ValueError):
        search_quasimodel(normalize(parse_concept("{iota A}")))
    with pytest.raises(ValueError):
        search_quasimodel(normalize(parse_concept("X A")))
    with pytest.raises(ValueError):
        search_quasimodel(parse_concept("box A"))
    with pytest.raises(ValueError):
        SearchConfig(max_worlds=0)


def test_elimination_refutes_regardless_of_caps():
    v = search_quasimodel(normalize(parse_concept("(A & ~A)")), SearchConfig(max_worlds=1, max_runs=1))
    assert v.status == UNSAT


# ------------------------------------------------------------- extraction


def test_extracted_base_model():
    m = extract_model(base_certificate())
    assert m.domain_size == 1 and m.worlds == 2
    assert concept_extension(m, 0, parse_concept("A")) == {0}
    assert concept_extension(m, 1, parse_concept("A")) == frozenset()
    assert concept_extension(m, 0, BASE_ROOT) == {0}


def test_extract_rejects_bad_certificate():
    qm = base_certificate()
    with pytest.raises(ValueError):
        extract_model(Quasimodel(qm.closure, qm.quasistates, ()))


def test_nominal_denotes_where_held():
    m = extract_model(extended_certificate())
    assert m.states[0].names["a"] == 1


def certificates_from_random_search(seed, count):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        c = pipeline(random_formula(rng, 2))
        if len(closure(c)) > 24:
            continue
        v = search_quasimodel(c)
        if v.status == SAT:
            out.append(v.certificate)
    return out


def test_extraction_faithful_and_nominals_functional():
    for qm in certificates_from_random_search(43, 80):
        m = extract_model(qm)
        cl = qm.closure
        for i, c in enumerate(cl.members):
            for w in range(qm.worlds):
                ext = concept_extension(m, w, c)
                for n, run in enumerate(qm.runs):
                    assert (n in ext) == bool(run[w] >> i & 1)
        for i, c in enumerate(cl.members):
            if isinstance(c, Nominal):
                for w in range(qm.worlds):
                    held = any(t >> i & 1 for t in qm.quasistates[w])
                    assert (m.states[w].names.get(c.term.name) is not None) == held
                    assert len(concept_extension(m, w, c)) <= 1


def test_model_roundtrip():
    m = extract_model(base_certificate())
    assert verify_quasimodel(model_to_quasimodel(m, BASE_ROOT)) == []
    one = PartialInterpretation(1, [make_state(concepts={"A": {0}})])
    qm = model_to_quasimodel(one, normalize(parse_concept("A")))
    assert len(qm.types()) == 1
    assert {v.condition for v in verify_quasimodel(model_to_quasimodel(one, normalize(parse_concept("~A"))))} == {"B1"}


def test_model_to_quasimodel_needs_universal_partition():
    m = PartialInterpretation(1, [make_state(), make_state()], ((0,), (1,)))
    with pytest.raises(ValueError):
        model_to_quasimodel(m, normalize(parse_concept("A")))


def test_oracle_witnesses_give_quasimodels():
    rng = random.Random(44)
    done = 0
    while done < 150:
        f = random_formula(rng, 2)
        c = pipeline(f)
        if len(closure(c)) > 20:
            continue
        bounds = OracleBounds(2, 2, signature_of(f))
        if candidate_count(bounds) > 300_000:
            continue
        found = brute_force_sat(f, bounds)
        if found is None:
            continue
        model, w = found
        qm = model_to_quasimodel(restrict_to_block(model, w), c)
        assert verify_quasimodel(qm) == []
        assert search_quasimodel(c).status not in (UNSAT, UNSAT_UP_TO)
        done += 1

