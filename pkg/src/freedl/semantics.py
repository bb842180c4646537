"""Evaluation over finite partial interpretations and finite traces.

Elements of the domain are the integers ``0..domain_size-1``. Each state
carries its own concept and role extensions and a partial name map in which
``None`` marks an undefined name, so total and partial models share one
representation. Inputs are normalized before evaluation, so sugar is fine.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .syntax import (
    LTLF,
    S5,
    And,
    Concept,
    ConceptAssertion,
    ConceptName,
    Diamond,
    Exists,
    ExistsU,
    FAnd,
    FDiamond,
    FNot,
    Formula,
    FUntil,
    Inclusion,
    Individual,
    Iota,
    LogicError,
    Nominal,
    Not,
    RoleAssertion,
    Term,
    Until,
    normalize,
)


@dataclass(frozen=True)
class State:
    """One world or instant: local extensions and a partial name map."""

    concepts: Mapping[str, frozenset] = field(default_factory=dict)
    roles: Mapping[str, frozenset] = field(default_factory=dict)
    names: Mapping[str, Optional[int]] = field(default_factory=dict)

    def validate(self, domain_size: int) -> None:
        for name, ext in self.concepts.items():
            if any(not 0 <= d < domain_size for d in ext):
                raise ValueError(f"extension of {name} leaves the domain")
        for name, pairs in self.roles.items():
            if any(not (0 <= d < domain_size and 0 <= e < domain_size) for d, e in pairs):
                raise ValueError(f"extension of role {name} leaves the domain")
        for name, value in self.names.items():
            if value is not None and not 0 <= value < domain_size:
                raise ValueError(f"name {name} points outside the domain")


def make_state(concepts=None, roles=None, names=None) -> State:
    return State(
        {k: frozenset(v) for k, v in (concepts or {}).items()},
        {k: frozenset(tuple(p) for p in v) for k, v in (roles or {}).items()},
        dict(names or {}),
    )


@dataclass(frozen=True)
class PartialInterpretation:
    """An S5 model with constant domain; ``partition`` lists the ∼-classes."""

    domain_size: int
    states: tuple
    partition: Optional[tuple] = None

    kind = S5
    logic = S5

    def __post_init__(self):
        if self.domain_size < 1:
            raise ValueError("the domain must be nonempty")
        if not self.states:
            raise ValueError("at least one world is required")
        object.__setattr__(self, "states", tuple(self.states))
        if self.partition is None:
            object.__setattr__(self, "partition", (tuple(range(len(self.states))),))
        else:
            object.__setattr__(self, "partition", tuple(tuple(b) for b in self.partition))
        seen = sorted(w for block in self.partition for w in block)
        if seen != list(range(len(self.states))) or any(not b for b in self.partition):
            raise ValueError("the partition must cover the worlds exactly once")
        for s in self.states:
            s.validate(self.domain_size)

    @property
    def worlds(self) -> int:
        return len(self.states)

    def block_of(self, w: int) -> tuple:
        for block in self.partition:
            if w in block:
                return block
        raise IndexError(w)

    def is_universal(self) -> bool:
        return len(self.partition) == 1


@dataclass(frozen=True)
class FiniteTrace:
    """A finite trace over instants ``0..len(states)-1``."""

    domain_size: int
    states: tuple

    kind = "trace"
    logic = LTLF

    def __post_init__(self):
        if self.domain_size < 1:
            raise ValueError("the domain must be nonempty")
        if not self.states:
            raise ValueError("a trace has at least one instant")
        object.__setattr__(self, "states", tuple(self.states))
        for s in self.states:
            s.validate(self.domain_size)

    @property
    def length(self) -> int:
        return len(self.states)


class _Evaluator:
    """Computes extensions at every state at once, memoized per subterm."""

    def __init__(self, model):
        self.m = model
        self.n = len(model.states)
        self.full = frozenset(range(model.domain_size))
        self.memo: dict = {}
        self.fmemo: dict = {}

    def normalize(self, x):
        return normalize(x, self.m.logic)

    def term(self, t: Term) -> list:
        if isinstance(t, Individual):
            return [s.names.get(t.name) for s in self.m.states]
        if isinstance(t, Iota):
            out = []
            for ext in self.concept(t.body):
                out.append(next(iter(ext)) if len(ext) == 1 else None)
            return out
        raise TypeError(f"not a term: {t!r}")

    def concept(self, c: Concept) -> list:
        if c in self.memo:
            return self.memo[c]
        states = self.m.states
        if isinstance(c, ConceptName):
            res = [frozenset(s.concepts.get(c.name, ())) for s in states]
        elif isinstance(c, Nominal):
            res = [frozenset() if v is None else frozenset({v}) for v in self.term(c.term)]
        elif isinstance(c, Not):
            res = [self.full - e for e in self.concept(c.arg)]
        elif isinstance(c, And):
            res = [l & r for l, r in zip(self.concept(c.left), self.concept(c.right))]
        elif isinstance(c, Exists):
            body = self.concept(c.body)
            res = [
                frozenset(d for d, e in s.roles.get(c.role, ()) if e in body[i])
                for i, s in enumerate(states)
            ]
        elif isinstance(c, ExistsU):
            res = [self.full if e else frozenset() for e in self.concept(c.body)]
        elif isinstance(c, Diamond):
            if self.m.logic != S5:
                raise LogicError("the epistemic diamond is not defined on traces")
            body = self.concept(c.body)
            res = [frozenset().union(*(body[v] for v in self.m.block_of(w))) for w in range(self.n)]
        elif isinstance(c, Until):
            if self.m.logic != LTLF:
                raise LogicError("until is not defined on S5 interpretations")
            left, right = self.concept(c.left), self.concept(c.right)
            res = [frozenset()] * self.n
            for t in range(self.n - 2, -1, -1):
                res[t] = right[t + 1] | (left[t + 1] & res[t + 1])
        else:
            raise TypeError(f"unexpected concept {c!r}")
        self.memo[c] = res
        return res

    def formula(self, f: Formula) -> list:
        if f in self.fmemo:
            return self.fmemo[f]
        if isinstance(f, Inclusion):
            res = [a <= b for a, b in zip(self.concept(f.sub), self.concept(f.sup))]
        elif isinstance(f, ConceptAssertion):
            ext = self.concept(f.concept)
            res = [v is not None and v in ext[i] for i, v in enumerate(self.term(f.term))]
        elif isinstance(f, RoleAssertion):
            subj, obj = self.term(f.subject), self.term(f.object)
            res = [
                x is not None and y is not None and (x, y) in s.roles.get(f.role, ())
                for s, x, y in zip(self.m.states, subj, obj)
            ]
        elif isinstance(f, FNot):
            res = [not v for v in self.formula(f.arg)]
        elif isinstance(f, FAnd):
            res = [l and r for l, r in zip(self.formula(f.left), self.formula(f.right))]
        elif isinstance(f, FDiamond):
            if self.m.logic != S5:
                raise LogicError("the epistemic diamond is not defined on traces")
            arg = self.formula(f.arg)
            res = [any(arg[v] for v in self.m.block_of(w)) for w in range(self.n)]
        elif isinstance(f, FUntil):
            if self.m.logic != LTLF:
                raise LogicError("until is not defined on S5 interpretations")
            left, right = self.formula(f.left), self.formula(f.right)
            res = [False] * self.n
            for t in range(self.n - 2, -1, -1):
                res[t] = right[t + 1] or (left[t + 1] and res[t + 1])
        else:
            raise TypeError(f"unexpected formula {f!r}")
        self.fmemo[f] = res
        return res


def _check_state(model, state: int) -> None:
    if not 0 <= state < len(model.states):
        raise IndexError(f"state {state} out of range 0..{len(model.states) - 1}")


def term_value(model, state: int, term: Term) -> Optional[int]:
    _check_state(model, state)
    ev = _Evaluator(model)
    return ev.term(ev.normalize(term))[state]


def concept_extension(model, state: int, concept: Concept) -> frozenset:
    _check_state(model, state)
    ev = _Evaluator(model)
    return ev.concept(ev.normalize(concept))[state]


def concept_extensions(model, concept: Concept) -> list:
    """Extensions of ``concept`` at every state, in state order."""
    ev = _Evaluator(model)
    return ev.concept(ev.normalize(concept))


def formula_sat(model, state: int, formula: Formula) -> bool:
    _check_state(model, state)
    ev = _Evaluator(model)
    return ev.formula(ev.normalize(formula))[state]


def formula_truth(model, formula: Formula) -> list:
    ev = _Evaluator(model)
    return ev.formula(ev.normalize(formula))


def _values(model, name: str) -> list:
    return [s.names.get(name) for s in model.states]


def check_rda(model, names: Iterable[str]) -> bool:
    """Rigid designators: defined everywhere or nowhere, and always the same value."""
    for name in names:
        vals = _values(model, name)
        defined = {v for v in vals if v is not None}
        if len(defined) > 1:
            return False
        if defined and None in vals:
            return False
    return True


def is_ghost(model, name: str) -> bool:
    return all(v is None for v in _values(model, name))


def is_total(model, names: Iterable[str]) -> bool:
    return all(v is not None for name in names for v in _values(model, name))


def satisfying_states(model, formula: Formula) -> list:
    return [i for i, v in enumerate(formula_truth(model, formula)) if v]


def restrict_to_block(model: PartialInterpretation, w: int) -> PartialInterpretation:
    """The sub-model on the ∼-class of ``w``, with a universal relation."""
    block = model.block_of(w)
    return PartialInterpretation(model.domain_size, tuple(model.states[v] for v in block))

