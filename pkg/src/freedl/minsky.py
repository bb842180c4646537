"""Two-counter Minsky machines and their encoding on finite traces.

A machine has states ``q0..qL`` with instruction ``I_i`` executed at
``q_i`` for ``i < L``; ``qL`` halts. :func:`encode` produces the temporal
formula whose finite total traces mirror halting computations from
``(q0, 0, 0)``; :func:`build_trace` constructs such a trace from a
computation and :func:`decode_trace` reads a computation back.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .semantics import FiniteTrace, State
from .syntax import (
    BOTTOM,
    LAST,
    TOP,
    And,
    ConceptName,
    ExistsU,
    FBoxPlus,
    ForallU,
    Implies,
    Inclusion,
    Individual,
    Next,
    Nominal,
    Not,
    concept_conjoin,
    concept_disjoin,
    conjoin,
    equivalence,
)


@dataclass(frozen=True)
class Inc:
    register: int
    target: int


@dataclass(frozen=True)
class Dec:
    register: int
    nonzero: int
    zero: int


Instruction = Union[Inc, Dec]


@dataclass(frozen=True)
class MinskyMachine:
    """``states`` is ``L + 1``; ``instructions[i]`` runs at state ``i``."""

    states: int
    instructions: tuple

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))

    @property
    def halting(self) -> int:
        return self.states - 1


@dataclass(frozen=True)
class Configuration:
    state: int
    r1: int = 0
    r2: int = 0

    def value(self, k: int) -> int:
        return self.r1 if k == 1 else self.r2

    def with_value(self, k: int, v: int, state: int) -> "Configuration":
        return Configuration(state, v, self.r2) if k == 1 else Configuration(state, self.r1, v)

    def as_tuple(self) -> tuple:
        return (self.state, self.r1, self.r2)


@dataclass(frozen=True)
class Computation:
    configurations: tuple
    halted: bool

    def __len__(self) -> int:
        return len(self.configurations)


@dataclass(frozen=True)
class CapExceeded:
    prefix: Computation


def validate(machine: MinskyMachine) -> list:
    problems = []
    if machine.states < 1:
        problems.append("a machine needs at least one state")
        return problems
    L = machine.halting
    if len(machine.instructions) != L:
        problems.append(f"expected {L} instructions, found {len(machine.instructions)}")
    for i, ins in enumerate(machine.instructions):
        if isinstance(ins, Inc):
            targets = [ins.target]
        elif isinstance(ins, Dec):
            targets = [ins.nonzero, ins.zero]
        else:
            problems.append(f"I{i}: unknown instruction {ins!r}")
            continue
        if ins.register not in (1, 2):
            problems.append(f"I{i}: register must be 1 or 2, not {ins.register}")
        for q in targets:
            if not 0 <= q <= L:
                problems.append(f"I{i}: target state q{q} does not exist (states are q0..q{L})")
    return problems


def _require_valid(machine: MinskyMachine) -> None:
    problems = validate(machine)
    if problems:
        raise ValueError("invalid machine: " + "; ".join(problems))


def step(machine: MinskyMachine, c: Configuration) -> Optional[Configuration]:
    """The successor configuration, or ``None`` at the halting state."""
    if not 0 <= c.state < machine.states:
        raise ValueError(f"state q{c.state} does not exist")
    if c.state == machine.halting:
        return None
    ins = machine.instructions[c.state]
    if isinstance(ins, Inc):
        return c.with_value(ins.register, c.value(ins.register) + 1, ins.target)
    v = c.value(ins.register)
    if v > 0:
        return c.with_value(ins.register, v - 1, ins.nonzero)
    return Configuration(ins.zero, c.r1, c.r2)


def run_machine(machine: MinskyMachine, step_cap: int = 10_000) -> Union[Computation, CapExceeded]:
    """Run from ``(q0, 0, 0)`` for at most ``step_cap`` steps."""
    if step_cap < 1:
        raise ValueError("step_cap must be at least 1")
    _require_valid(machine)
    configs = [Configuration(0, 0, 0)]
    for _ in range(step_cap):
        nxt = step(machine, configs[-1])
        if nxt is None:
            return Computation(tuple(configs), True)
        configs.append(nxt)
    if configs[-1].state == machine.halting:
        return Computation(tuple(configs), True)
    return CapExceeded(Computation(tuple(configs), False))


# ---------------------------------------------------------------- encoding


def q(i: int) -> ConceptName:
    return ConceptName(f"Q{i}")


def reg(k: int) -> ConceptName:
    return ConceptName(f"R{k}")


def a_name(k: int) -> str:
    return f"a_r{k}"


def b_name(k: int) -> str:
    return f"b_r{k}"


def _iff(x, y):
    return And(Implies(x, y), Implies(y, x))


def _always(sub, sup):
    return FBoxPlus(Inclusion(sub, sup))


def encode_families(machine: MinskyMachine) -> list:
    """``(label, formula)`` pairs: S1-S6, then I1-I5 or D1-D7 per instruction.

    The state-cover and disjointness families range over every state
    ``q0..qL`` so that they are consistent with the initial-state axiom.
    """
    _require_valid(machine)
    L = machine.halting
    states = range(L + 1)
    fams = [
        ("S1", Inclusion(reg(1), BOTTOM)),
        ("S2", Inclusion(reg(2), BOTTOM)),
        ("S3", Inclusion(TOP, q(0))),
        ("S4", _always(TOP, concept_disjoin(q(i) for i in states))),
        ("S5", conjoin(_always(q(i), concept_conjoin(Not(q(j)) for j in states if j != i)) for i in states)),
        ("S6", FBoxPlus(equivalence(q(L), LAST))),
    ]
    for i, ins in enumerate(machine.instructions):
        k = ins.register
        rk, other = reg(k), reg(3 - k)
        tag = f"I{i}"
        if isinstance(ins, Inc):
            gained = And(Not(rk), Next(rk))
            fams += [
                (f"{tag}.I1", _always(q(i), ExistsU(gained))),
                (f"{tag}.I2", _always(q(i), ForallU(Implies(gained, Nominal(Individual(a_name(k))))))),
                (f"{tag}.I3", _always(q(i), ForallU(Implies(rk, Next(rk))))),
                (f"{tag}.I4", _always(q(i), ForallU(_iff(other, Next(other))))),
                (f"{tag}.I5", _always(q(i), Next(q(ins.target)))),
            ]
        else:
            lost = And(rk, Next(Not(rk)))
            busy = And(q(i), ExistsU(rk))
            idle = And(q(i), Not(ExistsU(rk)))
            keep = And(ForallU(_iff(reg(1), Next(reg(1)))), ForallU(_iff(reg(2), Next(reg(2)))))
            fams += [
                (f"{tag}.D1", _always(busy, ExistsU(lost))),
                (f"{tag}.D2", _always(busy, ForallU(Implies(lost, Nominal(Individual(b_name(k))))))),
                (f"{tag}.D3", _always(busy, ForallU(Implies(Next(rk), rk)))),
                (f"{tag}.D4", _always(busy, ForallU(_iff(other, Next(other))))),
                (f"{tag}.D5", _always(idle, keep)),
                (f"{tag}.D6", _always(busy, Next(q(ins.nonzero)))),
                (f"{tag}.D7", _always(idle, Next(q(ins.zero)))),
            ]
    return fams


def encode(machine: MinskyMachine):
    return conjoin(f for _, f in encode_families(machine))


# ------------------------------------------------------------------ traces


def _check_computation(machine: MinskyMachine, comp: Computation) -> None:
    cs = comp.configurations
    if not cs or cs[0] != Configuration(0, 0, 0):
        raise ValueError("a computation starts at (q0, 0, 0)")
    for x, y in zip(cs, cs[1:]):
        if step(machine, x) != y:
            raise ValueError(f"{x.as_tuple()} does not step to {y.as_tuple()}")
    if cs[-1].state != machine.halting:
        raise ValueError("the computation does not reach the halting state")


def build_trace(machine: MinskyMachine, comp: Computation) -> FiniteTrace:
    """A finite total trace satisfying the encoding at instant 0.

    The domain holds one pool per register, sized by the largest value the
    register takes, plus two spare elements. ``a_rk`` always points at a
    free element (the one added by the next increment) and ``b_rk`` at a
    member of ``R_k`` (the one removed by the next decrement).
    """
    _require_valid(machine)
    _check_computation(machine, comp)
    cs = comp.configurations
    size = {k: max(c.value(k) for c in cs) for k in (1, 2)}
    pool = {1: list(range(size[1])), 2: list(range(size[1], size[1] + size[2]))}
    spare = (size[1] + size[2], size[1] + size[2] + 1)
    n = size[1] + size[2] + 2

    def free_element(k, members):
        return next((d for d in pool[k] if d not in members), spare[0])

    R = {1: set(), 2: set()}
    a = {k: free_element(k, R[k]) for k in (1, 2)}
    b = {k: spare[1] for k in (1, 2)}
    states = []
    for t, c in enumerate(cs):
        concepts = {f"Q{i}": frozenset(range(n)) if i == c.state else frozenset() for i in range(machine.states)}
        concepts["R1"], concepts["R2"] = frozenset(R[1]), frozenset(R[2])
        names = {a_name(k): a[k] for k in (1, 2)}
        names.update({b_name(k): b[k] for k in (1, 2)})
        states.append(State(concepts, {}, names))
        if t == len(cs) - 1:
            break
        ins = machine.instructions[c.state]
        k = ins.register
        if isinstance(ins, Inc):
            d = a[k]
            R[k] = R[k] | {d}
            b[k] = d
            a[k] = free_element(k, R[k])
        elif R[k]:
            R[k] = R[k] - {b[k]}
            if R[k]:
                b[k] = min(R[k])
    return FiniteTrace(n, tuple(states))


@dataclass(frozen=True)
class DecodeResult:
    accepted: bool
    computation: Optional[Computation] = None
    reason: str = ""
    instant: Optional[int] = None


def decode_trace(machine: MinskyMachine, trace: FiniteTrace) -> DecodeResult:
    """Read one configuration per instant and check it against the machine."""
    _require_valid(machine)
    full = frozenset(range(trace.domain_size))
    configs = []
    for t, s in enumerate(trace.states):
        exts = {i: frozenset(s.concepts.get(f"Q{i}", ())) for i in range(machine.states)}
        full_states = [i for i, e in exts.items() if e == full]
        if len(full_states) != 1 or any(e and i not in full_states for i, e in exts.items()):
            return DecodeResult(False, reason="S4/S5: no unique state concept covers the domain", instant=t)
        r1 = len(s.concepts.get("R1", ()))
        r2 = len(s.concepts.get("R2", ()))
        configs.append(Configuration(full_states[0], r1, r2))
    first = configs[0]
    if first.state != 0:
        return DecodeResult(False, reason="S3: the first instant is not in q0", instant=0)
    if first.r1 or first.r2:
        return DecodeResult(False, reason="S1/S2: registers are not empty at the first instant", instant=0)
    for t in range(len(configs) - 1):
        c, nxt = configs[t], configs[t + 1]
        expected = step(machine, c)
        if expected is None:
            return DecodeResult(False, reason="S6: the halting state occurs before the last instant", instant=t)
        if expected != nxt:
            ins = machine.instructions[c.state]
            kind = "increment" if isinstance(ins, Inc) else "decrement"
            return DecodeResult(
                False,
                reason=f"{kind} check: I{c.state} takes {c.as_tuple()} to {expected.as_tuple()}, "
                f"the trace shows {nxt.as_tuple()}",
                instant=t + 1,
            )
    if configs[-1].state != machine.halting:
        return DecodeResult(False, reason="S6: the last instant is not in the halting state", instant=len(configs) - 1)
    return DecodeResult(True, Computation(tuple(configs), True))


# --------------------------------------------------------------- mutations


def _replace_state(trace: FiniteTrace, t: int, state: State) -> FiniteTrace:
    states = list(trace.states)
    states[t] = state
    return FiniteTrace(trace.domain_size, tuple(states))


def flip_membership(trace: FiniteTrace, t: int, concept: str, d: int) -> FiniteTrace:
    s = trace.states[t]
    ext = set(s.concepts.get(concept, ()))
    ext ^= {d}
    concepts = dict(s.concepts)
    concepts[concept] = frozenset(ext)
    return _replace_state(trace, t, State(concepts, s.roles, s.names))


def swap_labels(trace: FiniteTrace, t: int, x: str, y: str) -> FiniteTrace:
    s = trace.states[t]
    concepts = dict(s.concepts)
    concepts[x], concepts[y] = s.concepts.get(y, frozenset()), s.concepts.get(x, frozenset())
    return _replace_state(trace, t, State(concepts, s.roles, s.names))


def truncate(trace: FiniteTrace) -> FiniteTrace:
    if len(trace.states) < 2:
        raise ValueError("cannot drop the only instant")
    return FiniteTrace(trace.domain_size, trace.states[:-1])


def single_point_mutations(machine: MinskyMachine, trace: FiniteTrace) -> list:
    """``(label, trace)`` pairs: every register flip, one state swap per instant, truncation."""
    out = []
    for t in range(len(trace.states)):
        for concept in ("R1", "R2"):
            for d in range(trace.domain_size):
                out.append((f"flip {concept} of {d} at {t}", flip_membership(trace, t, concept, d)))
    for t, s in enumerate(trace.states):
        current = next(i for i in range(machine.states) if s.concepts.get(f"Q{i}"))
        other = (current + 1) % machine.states
        if other != current:
            out.append((f"swap Q{current}/Q{other} at {t}", swap_labels(trace, t, f"Q{current}", f"Q{other}")))
    if len(trace.states) > 1:
        out.append(("truncate last instant", truncate(trace)))
    return out
