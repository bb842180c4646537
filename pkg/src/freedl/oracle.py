"""Exhaustive model enumeration used as an independent satisfiability oracle.

Candidate models are numbered and decoded in numpy batches; every subterm is
evaluated as an integer bitmask per state over the whole batch. This shares
no code with the scalar evaluator in :mod:`freedl.semantics`, so each can be
checked against the other.

Enumeration order: domain size ascending, then number of states ascending,
then partitions (coarsest first), then candidate index. A candidate index is
a mixed-radix number whose most significant digit is state 0; inside a
state, the extension bitmap outranks the name assignment, and the digit 0 of
a name means "undefined" under partial semantics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .semantics import FiniteTrace, PartialInterpretation, State
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
    Nominal,
    Not,
    RoleAssertion,
    Signature,
    Until,
    concept_goal,
    normalize,
    signature_of,
)

DEFAULT_CEILING = 10**8
BATCH = 1 << 16


class OracleOverflow(RuntimeError):
    """The number of candidates exceeds the configured ceiling."""


@dataclass(frozen=True)
class OracleBounds:
    max_states: int
    max_domain: int
    signature: Signature
    kind: str = S5  # "s5" or "trace"
    total: bool = False
    rigid: bool = False
    all_partitions: bool = True
    ceiling: int = DEFAULT_CEILING

    def __post_init__(self):
        if self.max_states < 1 or self.max_domain < 1:
            raise ValueError("oracle bounds must be at least 1")
        if self.kind not in (S5, "trace"):
            raise ValueError(f"unknown model kind {self.kind!r}")


def set_partitions(k: int) -> list:
    """All partitions of ``range(k)``, fewest blocks first, then lexicographic."""
    out = []

    def grow(i, blocks):
        if i == k:
            out.append(tuple(tuple(b) for b in blocks))
            return
        for b in blocks:
            b.append(i)
            grow(i + 1, blocks)
            b.pop()
        blocks.append([i])
        grow(i + 1, blocks)
        blocks.pop()

    grow(0, [])
    return sorted(out, key=lambda p: (len(p), p))


class _Space:
    """The candidate models for one (domain size, state count, partition)."""

    def __init__(self, bounds: OracleBounds, n: int, k: int, partition):
        sig = bounds.signature
        self.n, self.k, self.partition = n, k, partition
        self.kind = bounds.kind
        self.concepts = sorted(sig.concepts)
        self.roles = sorted(sig.roles)
        self.names = sorted(sig.individuals)
        self.total, self.rigid = bounds.total, bounds.rigid
        self.full = (1 << n) - 1
        self.ext_bits = len(self.concepts) * n + len(self.roles) * n * n
        self.ext_radix = 1 << self.ext_bits
        self.name_radix = n if self.total else n + 1
        self.names_radix = self.name_radix ** len(self.names)
        if self.rigid:
            self.local_radix = self.ext_radix
            self.size = self.names_radix * self.local_radix**k
        else:
            self.local_radix = self.ext_radix * self.names_radix
            self.size = self.local_radix**k
        self.blocks = [next(b for b in partition if j in b) for j in range(k)] if partition else None
        # element index of a singleton mask, -1 otherwise
        table = np.full(1 << n, -1, dtype=np.int64)
        for d in range(n):
            table[1 << d] = d
        self.singleton = table

    # -- decoding
    def decode(self, idx: np.ndarray):
        """Split candidate indices into per-state extension and name digits."""
        k = self.k
        if self.rigid:
            shared = idx // (self.local_radix**k)
            rest = idx % (self.local_radix**k)
        else:
            rest = idx
        ext, nms = [], []
        for j in range(k):
            digit = (rest // (self.local_radix ** (k - 1 - j))) % self.local_radix
            if self.rigid:
                ext.append(digit)
                nms.append(shared)
            else:
                ext.append(digit // self.names_radix)
                nms.append(digit % self.names_radix)
        return ext, nms

    def name_value(self, nm: np.ndarray, i: int) -> np.ndarray:
        digit = (nm // (self.name_radix**i)) % self.name_radix
        return digit if self.total else digit - 1

    def model(self, index: int):
        ext, nms = self.decode(np.array([index], dtype=np.int64))
        n = self.n
        states = []
        for j in range(self.k):
            e = int(ext[j][0])
            concepts = {}
            for i, name in enumerate(self.concepts):
                mask = (e >> (i * n)) & self.full
                concepts[name] = frozenset(d for d in range(n) if mask >> d & 1)
            roles = {}
            base = len(self.concepts) * n
            for i, name in enumerate(self.roles):
                mask = e >> (base + i * n * n)
                roles[name] = frozenset(
                    (d, x) for d in range(n) for x in range(n) if mask >> (d * n + x) & 1
                )
            names = {}
            for i, name in enumerate(self.names):
                v = int(self.name_value(nms[j], i)[0])
                names[name] = None if v < 0 else v
            states.append(State(concepts, roles, names))
        if self.kind == "trace":
            return FiniteTrace(n, tuple(states))
        return PartialInterpretation(n, tuple(states), self.partition)


class _BatchEvaluator:
    def __init__(self, space: _Space, idx: np.ndarray):
        self.s = space
        self.ext, self.nms = space.decode(idx)
        self.zero = np.zeros_like(idx)
        self.memo: dict = {}

    def term(self, t) -> list:
        s = self.s
        if isinstance(t, Individual):
            if t.name not in s.names:
                return [self.zero - 1] * s.k
            i = s.names.index(t.name)
            return [s.name_value(self.nms[j], i) for j in range(s.k)]
        if isinstance(t, Iota):
            return [s.singleton[m] for m in self.concept(t.body)]
        raise TypeError(t)

    def concept(self, c: Concept) -> list:
        key = ("c", c)
        if key in self.memo:
            return self.memo[key]
        s, k, n = self.s, self.s.k, self.s.n
        if isinstance(c, ConceptName):
            if c.name in s.concepts:
                i = s.concepts.index(c.name)
                res = [(self.ext[j] >> (i * n)) & s.full for j in range(k)]
            else:
                res = [self.zero] * k
        elif isinstance(c, Nominal):
            res = [np.where(v >= 0, np.left_shift(1, np.maximum(v, 0)), 0) for v in self.term(c.term)]
        elif isinstance(c, Not):
            res = [s.full & ~m for m in self.concept(c.arg)]
        elif isinstance(c, And):
            res = [a & b for a, b in zip(self.concept(c.left), self.concept(c.right))]
        elif isinstance(c, Exists):
            body = self.concept(c.body)
            if c.role in s.roles:
                base = len(s.concepts) * n + s.roles.index(c.role) * n * n
                res = []
                for j in range(k):
                    rel = self.ext[j] >> base
                    out = self.zero
                    for d in range(n):
                        for e in range(n):
                            hit = (rel >> (d * n + e)) & (body[j] >> e) & 1
                            out = out | (hit << d)
                    res.append(out)
            else:
                res = [self.zero] * k
        elif isinstance(c, ExistsU):
            res = [np.where(m != 0, s.full, 0) for m in self.concept(c.body)]
        elif isinstance(c, Diamond):
            body = self.concept(c.body)
            res = []
            for j in range(k):
                out = self.zero
                for v in s.blocks[j]:
                    out = out | body[v]
                res.append(out)
        elif isinstance(c, Until):
            left, right = self.concept(c.left), self.concept(c.right)
            res = [self.zero] * k
            for t in range(k - 2, -1, -1):
                res[t] = right[t + 1] | (left[t + 1] & res[t + 1])
        else:
            raise TypeError(c)
        self.memo[key] = res
        return res

    def formula(self, f: Formula) -> list:
        key = ("f", f)
        if key in self.memo:
            return self.memo[key]
        s, k, n = self.s, self.s.k, self.s.n
        if isinstance(f, Inclusion):
            res = [(a & ~b) == 0 for a, b in zip(self.concept(f.sub), self.concept(f.sup))]
        elif isinstance(f, ConceptAssertion):
            ext = self.concept(f.concept)
            res = [
                (v >= 0) & (((m >> np.maximum(v, 0)) & 1) == 1)
                for v, m in zip(self.term(f.term), ext)
            ]
        elif isinstance(f, RoleAssertion):
            subj, obj = self.term(f.subject), self.term(f.object)
            res = []
            for j in range(k):
                ok = (subj[j] >= 0) & (obj[j] >= 0)
                if f.role in s.roles:
                    base = len(s.concepts) * n + s.roles.index(f.role) * n * n
                    bit = np.maximum(subj[j], 0) * n + np.maximum(obj[j], 0)
                    res.append(ok & (((self.ext[j] >> (base + bit)) & 1) == 1))
                else:
                    res.append(ok & False)
        elif isinstance(f, FNot):
            res = [~v for v in self.formula(f.arg)]
        elif isinstance(f, FAnd):
            res = [a & b for a, b in zip(self.formula(f.left), self.formula(f.right))]
        elif isinstance(f, FDiamond):
            arg = self.formula(f.arg)
            res = []
            for j in range(k):
                out = self.zero != 0
                for v in s.blocks[j]:
                    out = out | arg[v]
                res.append(out)
        elif isinstance(f, FUntil):
            left, right = self.formula(f.left), self.formula(f.right)
            res = [self.zero != 0] * k
            for t in range(k - 2, -1, -1):
                res[t] = right[t + 1] | (left[t + 1] & res[t + 1])
        else:
            raise TypeError(f)
        self.memo[key] = res
        return res


def _prepare(goal, bounds: OracleBounds) -> Formula:
    logic = S5 if bounds.kind == S5 else LTLF
    if isinstance(goal, Concept):
        goal = concept_goal(goal)
    if not signature_of(goal) <= bounds.signature:
        raise ValueError("the goal uses symbols outside the oracle signature")
    return normalize(goal, logic)


def _spaces(bounds: OracleBounds) -> list:
    out = []
    for n in range(1, bounds.max_domain + 1):
        for k in range(1, bounds.max_states + 1):
            if bounds.kind == "trace":
                parts = [None]
            elif bounds.all_partitions:
                parts = set_partitions(k)
            else:
                parts = [(tuple(range(k)),)]
            for p in parts:
                out.append(_Space(bounds, n, k, p))
    return out


def candidate_count(bounds: OracleBounds) -> int:
    return sum(sp.size for sp in _spaces(bounds))


def _check_ceiling(spaces, bounds) -> None:
    total = sum(sp.size for sp in spaces)
    if total > bounds.ceiling:
        raise OracleOverflow(f"{total} candidates exceed the ceiling of {bounds.ceiling}")


def _satisfied(space: _Space, truth: list) -> np.ndarray:
    if space.kind == "trace":
        return truth[0]
    out = truth[0]
    for t in truth[1:]:
        out = out | t
    return out


def iter_models(goal, bounds: OracleBounds) -> Iterator[tuple]:
    """Yield every ``(model, satisfying states)`` within bounds, in enumeration order."""
    formula = _prepare(goal, bounds)
    spaces = _spaces(bounds)
    _check_ceiling(spaces, bounds)
    for space in spaces:
        for start in range(0, space.size, BATCH):
            idx = np.arange(start, min(start + BATCH, space.size), dtype=np.int64)
            truth = _BatchEvaluator(space, idx).formula(formula)
            hits = np.nonzero(_satisfied(space, truth))[0]
            for h in hits:
                states = [j for j in range(space.k) if truth[j][h]]
                if space.kind == "trace":
                    states = [0]
                yield space.model(int(idx[h])), states


def brute_force_sat(goal, bounds: OracleBounds) -> Optional[tuple]:
    """First ``(model, state)`` satisfying ``goal`` within bounds, or ``None``.

    ``None`` only means that nothing was found inside the bounds.
    """
    for model, states in iter_models(goal, bounds):
        return model, states[0]
    return None
