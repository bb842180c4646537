"""Abstract syntax for the epistemic (S5) and temporal (LTLf) free description logics.

Concepts, terms and formulas are immutable dataclasses. A small set of
*primitive* constructors is understood by every other module; the remaining
ones are abbreviations that :func:`normalize` rewrites away.

Primitive concepts::

    ConceptName  Nominal  Not  And  Exists  ExistsU  Diamond  Until

Primitive formulas::

    Inclusion  ConceptAssertion  RoleAssertion  FNot  FAnd  FDiamond  FUntil

Concept-level ``Diamond``/``Box`` (and their reflexive versions) belong to S5;
``Next``/``Eventually``/``Always``/``Last``/``Until`` belong to LTLf. The
formula-level ``FDiamond``/``FBox``/``FBoxPlus`` are modality-generic: under
LTLf they read as the strict temporal future.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Union

S5 = "s5"
LTLF = "ltlf"
LOGICS = (S5, LTLF)

UNIVERSAL_ROLE = "u"
FRESH_BOTTOM = "__bot"
RESERVED_PREFIX = "__"


class LogicError(ValueError):
    """Raised when operators of both logics are mixed or used in the wrong logic."""


# --------------------------------------------------------------------------- terms


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Individual(Term):
    name: str


@dataclass(frozen=True)
class Iota(Term):
    body: "Concept"


# ------------------------------------------------------------------------ concepts


class Concept:
    __slots__ = ()


@dataclass(frozen=True)
class ConceptName(Concept):
    name: str


@dataclass(frozen=True)
class Nominal(Concept):
    term: Term


@dataclass(frozen=True)
class Not(Concept):
    arg: Concept


@dataclass(frozen=True)
class And(Concept):
    left: Concept
    right: Concept


@dataclass(frozen=True)
class Exists(Concept):
    role: str
    body: Concept


@dataclass(frozen=True)
class ExistsU(Concept):
    body: Concept


@dataclass(frozen=True)
class Diamond(Concept):
    body: Concept


@dataclass(frozen=True)
class Until(Concept):
    left: Concept
    right: Concept


# abbreviations


@dataclass(frozen=True)
class Top(Concept):
    pass


@dataclass(frozen=True)
class Bottom(Concept):
    pass


@dataclass(frozen=True)
class Or(Concept):
    left: Concept
    right: Concept


@dataclass(frozen=True)
class Implies(Concept):
    left: Concept
    right: Concept


@dataclass(frozen=True)
class Forall(Concept):
    role: str
    body: Concept


@dataclass(frozen=True)
class ForallU(Concept):
    body: Concept


@dataclass(frozen=True)
class Box(Concept):
    body: Concept


@dataclass(frozen=True)
class DiamondPlus(Concept):
    body: Concept


@dataclass(frozen=True)
class BoxPlus(Concept):
    body: Concept


@dataclass(frozen=True)
class Next(Concept):
    body: Concept


@dataclass(frozen=True)
class Eventually(Concept):
    body: Concept


@dataclass(frozen=True)
class Always(Concept):
    body: Concept


@dataclass(frozen=True)
class EventuallyPlus(Concept):
    body: Concept


@dataclass(frozen=True)
class AlwaysPlus(Concept):
    body: Concept


@dataclass(frozen=True)
class Last(Concept):
    pass


TOP = Top()
BOTTOM = Bottom()
LAST = Last()

PRIMITIVE_CONCEPTS = (ConceptName, Nominal, Not, And, Exists, ExistsU, Diamond, Until)
S5_CONCEPT_OPS = (Diamond, Box, DiamondPlus, BoxPlus)
LTLF_CONCEPT_OPS = (Until, Next, Eventually, Always, EventuallyPlus, AlwaysPlus, Last)

# ------------------------------------------------------------------------ formulas


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Inclusion(Formula):
    sub: Concept
    sup: Concept


@dataclass(frozen=True)
class ConceptAssertion(Formula):
    concept: Concept
    term: Term


@dataclass(frozen=True)
class RoleAssertion(Formula):
    role: str
    subject: Term
    object: Term


@dataclass(frozen=True)
class FNot(Formula):
    arg: Formula


@dataclass(frozen=True)
class FAnd(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class FOr(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class FDiamond(Formula):
    arg: Formula


@dataclass(frozen=True)
class FBox(Formula):
    arg: Formula


@dataclass(frozen=True)
class FBoxPlus(Formula):
    arg: Formula


@dataclass(frozen=True)
class FNext(Formula):
    arg: Formula


@dataclass(frozen=True)
class FUntil(Formula):
    left: Formula
    right: Formula


PRIMITIVE_FORMULAS = (Inclusion, ConceptAssertion, RoleAssertion, FNot, FAnd, FDiamond, FUntil)

Syntax = Union[Concept, Formula, Term]

TRUE_FORMULA = Inclusion(TOP, TOP)


def conjoin(formulas) -> Formula:
    """Right-nested conjunction; the empty conjunction is ``[true <= true]``."""
    formulas = list(formulas)
    if not formulas:
        return TRUE_FORMULA
    result = formulas[-1]
    for f in reversed(formulas[:-1]):
        result = FAnd(f, result)
    return result


def conjuncts(formula: Formula) -> list[Formula]:
    if isinstance(formula, FAnd):
        return conjuncts(formula.left) + conjuncts(formula.right)
    return [formula]


def concept_conjoin(concepts) -> Concept:
    concepts = list(concepts)
    if not concepts:
        return TOP
    result = concepts[-1]
    for c in reversed(concepts[:-1]):
        result = And(c, result)
    return result


def concept_disjoin(concepts) -> Concept:
    concepts = list(concepts)
    if not concepts:
        return BOTTOM
    result = concepts[-1]
    for c in reversed(concepts[:-1]):
        result = Or(c, result)
    return result


def equivalence(left: Concept, right: Concept) -> Formula:
    return FAnd(Inclusion(left, right), Inclusion(right, left))


def concept_goal(concept: Concept) -> Formula:
    """The formula that holds exactly where ``concept`` has a nonempty extension."""
    return FNot(Inclusion(concept, BOTTOM))


# ----------------------------------------------------------------------- traversal


def children(x: Syntax) -> tuple:
    if isinstance(x, (ConceptName, Top, Bottom, Last, Individual)):
        return ()
    if isinstance(x, Iota):
        return (x.body,)
    if isinstance(x, Nominal):
        return (x.term,)
    if isinstance(x, (Not, FNot, FDiamond, FBox, FBoxPlus, FNext)):
        return (x.arg,)
    if isinstance(x, (And, Or, Implies, Until, FAnd, FOr, FUntil)):
        return (x.left, x.right)
    if isinstance(x, Inclusion):
        return (x.sub, x.sup)
    if isinstance(x, ConceptAssertion):
        return (x.concept, x.term)
    if isinstance(x, RoleAssertion):
        return (x.subject, x.object)
    if hasattr(x, "body"):
        return (x.body,)
    raise TypeError(f"not a syntax node: {x!r}")


def walk(x: Syntax) -> Iterator[Syntax]:
    """Pre-order traversal over every node, terms included."""
    stack = [x]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def contains_iota(x: Syntax) -> bool:
    return any(isinstance(n, Iota) for n in walk(x))


def contains_assertion(x: Syntax) -> bool:
    return any(isinstance(n, (ConceptAssertion, RoleAssertion)) for n in walk(x))


def infer_logic(x: Syntax) -> Optional[str]:
    """Return ``"s5"``, ``"ltlf"`` or ``None`` when the input is modality-neutral."""
    s5 = ltlf = False
    for node in walk(x):
        if isinstance(node, S5_CONCEPT_OPS):
            s5 = True
        elif isinstance(node, LTLF_CONCEPT_OPS + (FNext, FUntil)):
            ltlf = True
    if s5 and ltlf:
        raise LogicError("input mixes epistemic (dia/box) and temporal operators")
    return S5 if s5 else LTLF if ltlf else None


def resolve_logic(x: Syntax, logic: Optional[str]) -> str:
    inferred = infer_logic(x)
    if logic is None:
        return inferred or S5
    if logic not in LOGICS:
        raise ValueError(f"unknown logic {logic!r}")
    if inferred is not None and inferred != logic:
        raise LogicError(f"{inferred} operator used under logic {logic}")
    return logic


# ----------------------------------------------------------------------- signature


@dataclass(frozen=True)
class Signature:
    concepts: frozenset = frozenset()
    roles: frozenset = frozenset()
    individuals: frozenset = frozenset()

    def __post_init__(self):
        if UNIVERSAL_ROLE in self.roles:
            raise ValueError("the universal role is not a role name")

    def __or__(self, other: "Signature") -> "Signature":
        return Signature(
            self.concepts | other.concepts,
            self.roles | other.roles,
            self.individuals | other.individuals,
        )

    def __le__(self, other: "Signature") -> bool:
        return (
            self.concepts <= other.concepts
            and self.roles <= other.roles
            and self.individuals <= other.individuals
        )


def signature_of(x: Syntax) -> Signature:
    concepts, roles, individuals = set(), set(), set()
    for node in walk(x):
        if isinstance(node, ConceptName):
            concepts.add(node.name)
        elif isinstance(node, Individual):
            individuals.add(node.name)
        elif isinstance(node, (Exists, Forall, RoleAssertion)):
            roles.add(node.role)
    return Signature(frozenset(concepts), frozenset(roles), frozenset(individuals))


def bottom_name(x: Syntax) -> str:
    names = signature_of(x).concepts
    return min(names) if names else FRESH_BOTTOM


# ------------------------------------------------------------------- normalization


def negate(c: Concept) -> Concept:
    """Single negation with double negations collapsed."""
    return c.arg if isinstance(c, Not) else Not(c)


def fnegate(f: Formula) -> Formula:
    return f.arg if isinstance(f, FNot) else FNot(f)


class _Normalizer:
    def __init__(self, logic: str, bottom: str):
        self.logic = logic
        a0 = ConceptName(bottom)
        self.bot = And(a0, Not(a0))
        self.top = Not(self.bot)
        self.ftop = Inclusion(self.top, self.top)
        self.fbot = FNot(self.ftop)

    def _require(self, logic: str, node) -> None:
        if self.logic != logic:
            raise LogicError(f"{type(node).__name__} is not available under logic {self.logic}")

    def term(self, t: Term) -> Term:
        if isinstance(t, Iota):
            return Iota(self.concept(t.body))
        return t

    def concept(self, c: Concept) -> Concept:
        n = self.concept
        if isinstance(c, ConceptName):
            return c
        if isinstance(c, Nominal):
            return Nominal(self.term(c.term))
        if isinstance(c, Not):
            return negate(n(c.arg))
        if isinstance(c, And):
            return And(n(c.left), n(c.right))
        if isinstance(c, Exists):
            if c.role == UNIVERSAL_ROLE:
                return ExistsU(n(c.body))
            return Exists(c.role, n(c.body))
        if isinstance(c, ExistsU):
            return ExistsU(n(c.body))
        if isinstance(c, Top):
            return self.top
        if isinstance(c, Bottom):
            return self.bot
        if isinstance(c, Or):
            return negate(And(negate(n(c.left)), negate(n(c.right))))
        if isinstance(c, Implies):
            return negate(And(n(c.left), negate(n(c.right))))
        if isinstance(c, Forall):
            inner = negate(n(c.body))
            if c.role == UNIVERSAL_ROLE:
                return negate(ExistsU(inner))
            return negate(Exists(c.role, inner))
        if isinstance(c, ForallU):
            return negate(ExistsU(negate(n(c.body))))
        if isinstance(c, Diamond):
            self._require(S5, c)
            return Diamond(n(c.body))
        if isinstance(c, Box):
            self._require(S5, c)
            return negate(Diamond(negate(n(c.body))))
        if isinstance(c, DiamondPlus):
            self._require(S5, c)
            body = n(c.body)
            return negate(And(negate(body), negate(Diamond(body))))
        if isinstance(c, BoxPlus):
            self._require(S5, c)
            body = n(c.body)
            return And(body, negate(Diamond(negate(body))))
        if isinstance(c, Until):
            self._require(LTLF, c)
            return Until(n(c.left), n(c.right))
        if isinstance(c, Next):
            self._require(LTLF, c)
            return Until(self.bot, n(c.body))
        if isinstance(c, Eventually):
            self._require(LTLF, c)
            return Until(self.top, n(c.body))
        if isinstance(c, Always):
            self._require(LTLF, c)
            return negate(Until(self.top, negate(n(c.body))))
        if isinstance(c, EventuallyPlus):
            self._require(LTLF, c)
            body = n(c.body)
            return negate(And(negate(body), negate(Until(self.top, body))))
        if isinstance(c, AlwaysPlus):
            self._require(LTLF, c)
            body = n(c.body)
            return And(body, negate(Until(self.top, negate(body))))
        if isinstance(c, Last):
            self._require(LTLF, c)
            return negate(Until(self.top, negate(self.bot)))
        raise TypeError(f"not a concept: {c!r}")

    def formula(self, f: Formula) -> Formula:
        n = self.formula
        if isinstance(f, Inclusion):
            return Inclusion(self.concept(f.sub), self.concept(f.sup))
        if isinstance(f, ConceptAssertion):
            return ConceptAssertion(self.concept(f.concept), self.term(f.term))
        if isinstance(f, RoleAssertion):
            return RoleAssertion(f.role, self.term(f.subject), self.term(f.object))
        if isinstance(f, FNot):
            return fnegate(n(f.arg))
        if isinstance(f, FAnd):
            return FAnd(n(f.left), n(f.right))
        if isinstance(f, FOr):
            return fnegate(FAnd(fnegate(n(f.left)), fnegate(n(f.right))))
        if isinstance(f, FDiamond):
            if self.logic == S5:
                return FDiamond(n(f.arg))
            return FUntil(self.ftop, n(f.arg))
        if isinstance(f, FBox):
            return fnegate(self.formula(FDiamond(FNot(f.arg))))
        if isinstance(f, FBoxPlus):
            arg = n(f.arg)
            return FAnd(arg, self.formula(FBox(arg)))
        if isinstance(f, FNext):
            self._require(LTLF, f)
            return FUntil(self.fbot, n(f.arg))
        if isinstance(f, FUntil):
            self._require(LTLF, f)
            return FUntil(n(f.left), n(f.right))
        raise TypeError(f"not a formula: {f!r}")


def normalize(x, logic: Optional[str] = None, bottom: Optional[str] = None):
    """Rewrite ``x`` (a concept or formula) into primitive constructors.

    ``bottom`` is the concept name used to materialize ``false`` as
    ``A & ~A``; by default the lexicographically first concept name of ``x``
    (or ``__bot`` when there is none).
    """
    logic = resolve_logic(x, logic)
    norm = _Normalizer(logic, bottom or bottom_name(x))
    if isinstance(x, Concept):
        return norm.concept(x)
    if isinstance(x, Formula):
        return norm.formula(x)
    if isinstance(x, Term):
        return norm.term(x)
    raise TypeError(f"cannot normalize {x!r}")


def is_normalized(x: Syntax) -> bool:
    for node in walk(x):
        if isinstance(node, (Concept,)) and not isinstance(node, PRIMITIVE_CONCEPTS):
            return False
        if isinstance(node, Formula) and not isinstance(node, PRIMITIVE_FORMULAS):
            return False
        if isinstance(node, Not) and isinstance(node.arg, Not):
            return False
        if isinstance(node, FNot) and isinstance(node.arg, FNot):
            return False
    return True


# --------------------------------------------------------------------- desugaring


def desugar_assertions(f: Formula) -> Formula:
    """Replace every assertion by the equivalent pair of concept inclusions."""
    if isinstance(f, ConceptAssertion):
        nom = Nominal(f.term)
        return FAnd(Inclusion(TOP, ExistsU(nom)), Inclusion(nom, f.concept))
    if isinstance(f, RoleAssertion):
        nom = Nominal(f.subject)
        return FAnd(
            Inclusion(TOP, ExistsU(nom)),
            Inclusion(nom, Exists(f.role, Nominal(f.object))),
        )
    if isinstance(f, Inclusion):
        return f
    if isinstance(f, (FNot, FDiamond, FBox, FBoxPlus, FNext)):
        return type(f)(desugar_assertions(f.arg))
    if isinstance(f, (FAnd, FOr, FUntil)):
        return type(f)(desugar_assertions(f.left), desugar_assertions(f.right))
    raise TypeError(f"not a formula: {f!r}")


def internalize(f: Formula, logic: Optional[str] = None) -> Concept:
    """Turn an assertion-free formula into a concept whose extension is ∅ or Δ.

    ``C <= D`` becomes ``all u.(~C | D)``; the Boolean and modal/temporal
    formula operators become their concept counterparts.
    """
    if contains_assertion(f):
        raise ValueError("internalize expects an assertion-free formula; desugar first")
    logic = resolve_logic(f, logic)
    bottom = bottom_name(f)
    prim = normalize(f, logic, bottom)

    def go(g: Formula) -> Concept:
        if isinstance(g, Inclusion):
            return ForallU(Or(Not(g.sub), g.sup))
        if isinstance(g, FNot):
            return Not(go(g.arg))
        if isinstance(g, FAnd):
            return And(go(g.left), go(g.right))
        if isinstance(g, FDiamond):
            return Diamond(go(g.arg))
        if isinstance(g, FUntil):
            return Until(go(g.left), go(g.right))
        raise TypeError(f"unexpected formula node {g!r}")

    return normalize(go(prim), logic, bottom)


# ------------------------------------------------------------------------ closure


def subconcepts(c: Concept) -> list[Concept]:
    """Distinct subconcepts in pre-order (descriptions are not entered)."""
    seen: dict = {}
    stack = [c]
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen[node] = None
        if isinstance(node, Nominal):
            continue
        stack.extend(reversed([ch for ch in children(node) if isinstance(ch, Concept)]))
    return list(seen)


@dataclass(frozen=True)
class ClosureSet:
    """``con(root)``: subconcepts of ``root`` closed under single negation."""

    root: Concept
    members: tuple
    partner: tuple

    def __post_init__(self):
        object.__setattr__(self, "_index", {m: i for i, m in enumerate(self.members)})

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, c) -> bool:
        return c in self._index

    def index(self, c: Concept) -> int:
        return self._index[c]

    def get(self, c: Concept) -> Optional[int]:
        return self._index.get(c)


def closure(root: Concept) -> ClosureSet:
    members: list = []
    index: dict = {}

    def add(c):
        if c not in index:
            index[c] = len(members)
            members.append(c)

    for sub in subconcepts(root):
        if sub in index:
            continue
        add(sub)
        add(negate(sub))
    partner = tuple(index[negate(m)] for m in members)
    return ClosureSet(root, tuple(members), partner)
