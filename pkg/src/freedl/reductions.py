"""Satisfiability-preserving translations and the preprocessing pipeline.

* :func:`total_to_partial` makes every name denote at every state.
* :func:`eliminate_iota` replaces each description ``{iota C}`` by a fresh
  concept name pinned to it by a definitional formula.
* :func:`rda_axioms` enforces rigid designators.
* :func:`pipeline` chains these with desugaring and internalization and
  produces a single concept for the S5 engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .syntax import (
    BOTTOM,
    S5,
    TOP,
    And,
    AlwaysPlus,
    BoxPlus,
    Concept,
    ConceptName,
    DiamondPlus,
    EventuallyPlus,
    ExistsU,
    FAnd,
    FBoxPlus,
    FOr,
    Formula,
    Inclusion,
    Individual,
    Iota,
    Nominal,
    Not,
    Signature,
    bottom_name,
    children,
    conjoin,
    contains_assertion,
    desugar_assertions,
    internalize,
    normalize,
    resolve_logic,
    signature_of,
)

IOTA_PREFIX = "__iota_"
SEMANTICS = ("partial", "total")


def is_internal(name: str) -> bool:
    return name.startswith("__")


# ------------------------------------------------------------------ axioms


def denotes_everywhere_axiom(name: str) -> Formula:
    """``BOX+ [true <= some u.{a}]``."""
    return FBoxPlus(Inclusion(TOP, ExistsU(Nominal(Individual(name)))))


def denotes_somewhere_axiom(name: str, logic: str = S5) -> Formula:
    """``[true <= dia+ some u.{a}]``, or ``F+`` on traces."""
    plus = DiamondPlus if logic == S5 else EventuallyPlus
    return Inclusion(TOP, plus(ExistsU(Nominal(Individual(name)))))


def rda_axiom(name: str, logic: str = S5) -> Formula:
    nom = Nominal(Individual(name))
    if logic == S5:
        return FBoxPlus(Inclusion(DiamondPlus(nom), BoxPlus(nom)))
    return FBoxPlus(Inclusion(EventuallyPlus(nom), AlwaysPlus(nom)))


def rda_axioms(names: Iterable[str], logic: str = S5) -> Formula:
    """Conjunction of the rigidity axioms; the empty conjunction is ``[true <= true]``."""
    return conjoin(rda_axiom(a, logic) for a in sorted(set(names)))


def total_to_partial(formula: Formula) -> Formula:
    names = sorted(signature_of(formula).individuals)
    if not names:
        return formula
    return conjoin([formula] + [denotes_everywhere_axiom(a) for a in names])


# ----------------------------------------------------------- iota elimination


@dataclass(frozen=True)
class IotaSymbols:
    body: Concept
    concept: str
    witness: str
    splitter: str


@dataclass(frozen=True)
class IotaReport:
    entries: tuple = ()

    @property
    def fresh_concepts(self) -> frozenset:
        return frozenset(e.concept for e in self.entries)

    @property
    def fresh_individuals(self) -> frozenset:
        return frozenset(n for e in self.entries for n in (e.witness, e.splitter))

    def __len__(self) -> int:
        return len(self.entries)


def iota_axiom(body: Concept, sym: IotaSymbols) -> Formula:
    """``BOX+ (S || N)`` tying ``sym.concept`` to the description of ``body``."""
    a = ConceptName(sym.concept)
    b = Nominal(Individual(sym.witness))
    b2 = Nominal(Individual(sym.splitter))
    single = conjoin([
        Inclusion(TOP, ExistsU(And(b, body))),
        Inclusion(body, b),
        Inclusion(a, body),
        Inclusion(body, a),
    ])
    split = FAnd(Inclusion(TOP, ExistsU(And(body, b2))), Inclusion(TOP, ExistsU(And(body, Not(b2)))))
    other = FAnd(FOr(Inclusion(body, BOTTOM), split), Inclusion(a, BOTTOM))
    return FBoxPlus(FOr(single, other))


class _IotaEliminator:
    def __init__(self, logic: str, bottom: str):
        self.logic, self.bottom = logic, bottom
        self.table: dict = {}
        self.entries: list = []

    def symbols(self, body: Concept) -> IotaSymbols:
        key = normalize(body, self.logic, self.bottom)
        if key not in self.table:
            k = len(self.entries)
            sym = IotaSymbols(body, f"{IOTA_PREFIX}A{k}", f"{IOTA_PREFIX}b{k}", f"{IOTA_PREFIX}c{k}")
            self.table[key] = sym
            self.entries.append(sym)
        return self.table[key]

    def concept(self, c: Concept) -> Concept:
        if isinstance(c, Nominal):
            if isinstance(c.term, Iota):
                body = self.concept(c.term.body)
                return ConceptName(self.symbols(body).concept)
            return c
        return self._rebuild(c, self.concept)

    def formula(self, f: Formula) -> Formula:
        if isinstance(f, Inclusion):
            return Inclusion(self.concept(f.sub), self.concept(f.sup))
        return self._rebuild(f, self.formula)

    @staticmethod
    def _rebuild(node, go):
        if not children(node):
            return node
        values = [getattr(node, name) for name in node.__dataclass_fields__]
        return type(node)(*(go(v) if isinstance(v, (Concept, Formula)) else v for v in values))


def eliminate_iota(formula: Formula, logic: Optional[str] = None) -> tuple:
    """Return ``(formula without descriptions, IotaReport)``.

    Descriptions are replaced innermost first; bodies that normalize to the
    same concept share one fresh triple.
    """
    if contains_assertion(formula):
        raise ValueError("eliminate_iota expects a desugared formula")
    logic = resolve_logic(formula, logic)
    elim = _IotaEliminator(logic, bottom_name(formula))
    out = elim.formula(formula)
    if not elim.entries:
        return formula, IotaReport()
    axioms = [iota_axiom(sym.body, sym) for sym in elim.entries]
    return conjoin([out] + axioms), IotaReport(tuple(elim.entries))


# ------------------------------------------------------------------ pipeline


@dataclass(frozen=True)
class PipelineOptions:
    semantics: str = "partial"
    rda: bool = False
    logic: Optional[str] = None

    def __post_init__(self):
        if self.semantics not in SEMANTICS:
            raise ValueError(f"unknown semantics {self.semantics!r}")


@dataclass(frozen=True)
class PipelineResult:
    concept: Concept
    logic: str
    desugared: Formula
    iota_free: Formula
    axiomatized: Formula
    original_signature: Signature
    report: IotaReport = field(default_factory=IotaReport)


def added_axioms(names: Iterable[str], opts: PipelineOptions, logic: str) -> list:
    names = sorted(set(names))
    out = []
    if opts.semantics == "total":
        out += [denotes_everywhere_axiom(a) for a in names]
    if opts.rda:
        out += [rda_axiom(a, logic) for a in names]
    return out


def run_pipeline(formula: Formula, opts: PipelineOptions = PipelineOptions()) -> PipelineResult:
    logic = resolve_logic(formula, opts.logic)
    desugared = desugar_assertions(formula)
    original = signature_of(desugared)
    iota_free, report = eliminate_iota(desugared, logic)
    axioms = added_axioms(original.individuals, opts, logic)
    axiomatized = conjoin([iota_free] + axioms) if axioms else iota_free
    concept = normalize(internalize(axiomatized, logic), logic)
    return PipelineResult(concept, logic, desugared, iota_free, axiomatized, original, report)


def pipeline(formula: Formula, opts: PipelineOptions = PipelineOptions()) -> Concept:
    return run_pipeline(formula, opts).concept
