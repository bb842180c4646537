import pytest

from freedl.grammar import pretty
from freedl.minsky import (
    CapExceeded,
    Computation,
    Configuration,
    Dec,
    Inc,
    MinskyMachine,
    a_name,
    b_name,
    build_trace,
    decode_trace,
    encode,
    encode_families,
    flip_membership,
    run_machine,
    single_point_mutations,
    step,
    swap_labels,
    truncate,
    validate,
)
from freedl.semantics import formula_sat, is_total
from freedl.syntax import LTLF, infer_logic

from machines import HAND_TRACES, M1, M2, M3, M4


def test_step_rules():
    inc = MinskyMachine(2, [Inc(1, 1)])
    dec = MinskyMachine(3, [Dec(1, 2, 1)])
    assert step(inc, Configuration(0)) == Configuration(1, 1, 0)
    assert step(dec, Configuration(0)) == Configuration(1, 0, 0)
    assert step(dec, Configuration(0, 3, 5)) == Configuration(2, 2, 5)
    assert step(dec, Configuration(2, 3, 5)) is None
    with pytest.raises(ValueError):
        step(dec, Configuration(7))


def test_validation():
    assert validate(M1) == []
    assert validate(MinskyMachine(2, [Inc(1, 4)]))
    assert validate(MinskyMachine(2, [Inc(3, 1)]))
    assert validate(MinskyMachine(3, [Inc(1, 1)]))
    assert validate(MinskyMachine(1, [])) == []


def test_degenerate_machine_is_already_halted():
    comp = run_machine(MinskyMachine(1, []))
    assert comp.halted and [c.as_tuple() for c in comp.configurations] == [(0, 0, 0)]


@pytest.mark.parametrize("name", sorted(HAND_TRACES))
def test_hand_traces(name):
    machine, expected = HAND_TRACES[name]
    comp = run_machine(machine)
    assert isinstance(comp, Computation) and comp.halted
    assert [c.as_tuple() for c in comp.configurations] == expected


def test_cap():
    res = run_machine(M3, 10)
    assert isinstance(res, CapExceeded)
    assert len(res.prefix) == 11 and not res.prefix.halted
    with pytest.raises(ValueError):
        run_machine(M3, 0)


def test_family_counts():
    for machine, _ in HAND_TRACES.values():
        incs = sum(isinstance(i, Inc) for i in machine.instructions)
        decs = len(machine.instructions) - incs
        assert len(encode_families(machine)) == 6 + 5 * incs + 7 * decs
    assert infer_logic(encode(M2)) == LTLF


def test_quoted_instances():
    texts = [pretty(f) for _, f in encode_families(M1)]
    assert "BOX+ [(Q0 & ~some u.R1) <= X Q1]" in texts
    texts = [pretty(f) for _, f in encode_families(M2)]
    assert "BOX+ [Q0 <= some u.(~R1 & X R1)]" in texts


def test_state_families_range_over_all_states():
    text = dict(encode_families(M2))
    cover = pretty(text["S4"])
    assert "Q0" in cover and "Q2" in cover


@pytest.mark.parametrize("name", sorted(HAND_TRACES))
def test_trace_roundtrip(name):
    machine, expected = HAND_TRACES[name]
    comp = run_machine(machine)
    trace = build_trace(machine, comp)
    assert trace.length == len(comp)
    assert is_total(trace, [a_name(1), a_name(2), b_name(1), b_name(2)])
    assert formula_sat(trace, 0, encode(machine))
    for t, c in enumerate(comp.configurations):
        for k in (1, 2):
            assert len(trace.states[t].concepts.get(f"R{k}", ())) == c.value(k)
    decoded = decode_trace(machine, trace)
    assert decoded.accepted and decoded.computation == comp


def test_witnesses_track_register_changes():
    comp = run_machine(M4)
    trace = build_trace(M4, comp)
    for t in range(trace.length - 1):
        now, nxt = trace.states[t], trace.states[t + 1]
        for k in (1, 2):
            before = now.concepts.get(f"R{k}", frozenset())
            after = nxt.concepts.get(f"R{k}", frozenset())
            if after - before:
                assert after - before == {now.names[a_name(k)]}
                assert now.names[a_name(k)] not in before
            if before - after:
                assert before - after == {now.names[b_name(k)]}


def test_m1_and_m2_traces():
    t1 = build_trace(M1, run_machine(M1))
    full = frozenset(range(t1.domain_size))
    assert t1.length == 2
    assert t1.states[0].concepts["Q0"] == full and t1.states[1].concepts["Q1"] == full
    t2 = build_trace(M2, run_machine(M2))
    assert [len(s.concepts.get("R1", ())) for s in t2.states] == [0, 1, 0]


def test_build_trace_rejects_partial_computation():
    with pytest.raises(ValueError):
        build_trace(M3, run_machine(M3, 5).prefix)


def test_decode_rejections():
    trace = build_trace(M2, run_machine(M2))
    jump = flip_membership(trace, 1, "R1", next(d for d in range(trace.domain_size)
                                                if d not in trace.states[1].concepts["R1"]))
    res = decode_trace(M2, jump)
    assert not res.accepted and "increment check" in res.reason
    res = decode_trace(M2, truncate(trace))
    assert not res.accepted and res.reason.startswith("S6")
    res = decode_trace(M2, swap_labels(trace, 1, "Q1", "Q0"))
    assert not res.accepted


def test_accepted_decodes_are_genuine():
    for machine, _ in HAND_TRACES.values():
        trace = build_trace(machine, run_machine(machine))
        for label, mutated in single_point_mutations(machine, trace):
            res = decode_trace(machine, mutated)
            if res.accepted:
                configs = res.computation.configurations
                assert configs[0] == Configuration(0)
                assert all(step(machine, a) == b for a, b in zip(configs, configs[1:]))
                assert configs[-1].state == machine.halting


def test_mutations_falsify_encoding():
    trace = build_trace(M2, run_machine(M2))
    chi = encode(M2)
    mutations = single_point_mutations(M2, trace)
    assert len(mutations) >= 12
    for label, mutated in mutations:
        assert not formula_sat(mutated, 0, chi), label
