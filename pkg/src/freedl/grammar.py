"""Concrete text syntax: a recursive-descent parser and the matching printer.

Concepts::

    true  false  last  Name  {a}  {iota C}  ~C  (C & D)  (C | D)  (C => D)
    some r.C  all r.C  some u.C  all u.C  dia C  box C  dia+ C  box+ C
    X C  (C U D)  F C  G C  F+ C  G+ C

Formulas::

    [C <= D]  C(t)  r(t1,t2)  !f  (f && g)  (f || g)  DIA f  BOX f  BOX+ f
    X f  (f U g)

``TOP`` and ``BOTTOM`` are accepted as spellings of ``true`` and ``false``.
Terms are individual names or ``iota C``. Concept names start with an upper
case letter, individual and role names with a lower case one. Binary forms
always carry their parentheses. At formula position an assertion is tried
first, so ``X A(a)`` is the assertion ``(X A)(a)``; write ``X (A(a))`` for the
temporal next of the assertion.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    And,
    Always,
    AlwaysPlus,
    Bottom,
    Box,
    BoxPlus,
    Concept,
    ConceptAssertion,
    ConceptName,
    Diamond,
    DiamondPlus,
    Eventually,
    EventuallyPlus,
    Exists,
    ExistsU,
    FAnd,
    FBox,
    FBoxPlus,
    FDiamond,
    FNext,
    FNot,
    FOr,
    Forall,
    ForallU,
    Formula,
    FUntil,
    Implies,
    Inclusion,
    Individual,
    Iota,
    Last,
    Next,
    Nominal,
    Not,
    Or,
    RoleAssertion,
    Term,
    Top,
    UNIVERSAL_ROLE,
    Until,
)

KEYWORDS = {
    "true", "false", "last", "iota", "some", "all", "dia", "box",
    "dia+", "box+", "X", "U", "F", "G", "F+", "G+", "DIA", "BOX", "BOX+",
    "TOP", "BOTTOM",
}
_PLUS_ABLE = {"dia", "box", "F", "G", "BOX"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*\+?)
  | (?P<sym>&&|\|\||<=|=>|[\[\](){}~!&|.,])
    """,
    re.VERBOSE,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(sorted(set(expected)))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at line {line}, column {column}{detail}")


@dataclass(frozen=True)
class Token:
    kind: str  # "kw", "cname", "iname", "sym", "eof"
    text: str
    line: int
    column: int


def identifier_kind(name: str) -> str:
    """Classify an identifier as a concept name or an individual/role name."""
    if name.startswith("__"):
        rest = name[2:]
        if rest == "bot":
            return "cname"
        if rest.startswith("iota_"):
            rest = rest[5:]
        if rest[:1].isupper():
            return "cname"
        if rest[:1].islower():
            return "iname"
        raise ValueError(f"malformed reserved identifier {name!r}")
    return "cname" if name[0].isupper() else "iname"


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        chunk = m.group(0)
        if m.lastgroup == "ident":
            word = chunk
            if word.endswith("+") and word[:-1] not in _PLUS_ABLE:
                raise ParseError(f"unexpected '+' after {word[:-1]!r}", line, col + len(word) - 1)
            if word in KEYWORDS:
                tokens.append(Token("kw", word, line, col))
            elif word.startswith("_") and not word.startswith("__"):
                raise ParseError(f"identifier {word!r} may not start with '_'", line, col)
            else:
                try:
                    kind = identifier_kind(word)
                except ValueError as exc:
                    raise ParseError(str(exc), line, col) from None
                tokens.append(Token(kind, word, line, col))
        elif m.lastgroup == "sym":
            tokens.append(Token("sym", chunk, line, col))
        for ch in chunk:
            if ch == "\n":
                line, col = line + 1, 1
            else:
                col += 1
        pos = m.end()
    tokens.append(Token("eof", "<end of input>", line, col))
    return tokens


class _Fail(Exception):
    pass


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.far_pos = -1
        self.far_expected: set = set()

    # -- helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def fail(self, *expected):
        if self.pos > self.far_pos:
            self.far_pos, self.far_expected = self.pos, set(expected)
        elif self.pos == self.far_pos:
            self.far_expected.update(expected)
        raise _Fail()

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("sym", "kw") and t.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(repr(text))
        t = self.tok
        self.pos += 1
        return t

    def error(self) -> ParseError:
        tok = self.tokens[max(self.far_pos, 0)]
        return ParseError(f"unexpected {tok.text!r}", tok.line, tok.column, self.far_expected)

    def finish(self):
        if self.tok.kind != "eof":
            self.fail("<end of input>")

    # -- terms
    def term(self) -> Term:
        if self.at("iota"):
            self.pos += 1
            return Iota(self.concept())
        if self.tok.kind == "iname" and self.tok.text != UNIVERSAL_ROLE:
            name = self.tok.text
            self.pos += 1
            return Individual(name)
        self.fail("individual name", "'iota'")

    def role(self) -> str:
        if self.tok.kind == "iname" and self.tok.text != UNIVERSAL_ROLE:
            name = self.tok.text
            self.pos += 1
            return name
        self.fail("role name")

    # -- concepts
    _CONCEPT_BINOPS = {"&": And, "|": Or, "=>": Implies, "U": Until}
    _CONCEPT_UNARY = {
        "~": Not, "dia": Diamond, "box": Box, "dia+": DiamondPlus, "box+": BoxPlus,
        "X": Next, "F": Eventually, "G": Always, "F+": EventuallyPlus, "G+": AlwaysPlus,
    }

    def concept(self) -> Concept:
        t = self.tok
        if t.kind == "cname":
            self.pos += 1
            return ConceptName(t.text)
        if t.kind in ("kw", "sym"):
            if t.text in ("true", "TOP"):
                self.pos += 1
                return Top()
            if t.text in ("false", "BOTTOM"):
                self.pos += 1
                return Bottom()
            if t.text == "last":
                self.pos += 1
                return Last()
            if t.text in self._CONCEPT_UNARY:
                self.pos += 1
                return self._CONCEPT_UNARY[t.text](self.concept())
            if t.text in ("some", "all"):
                self.pos += 1
                if self.tok.kind == "iname" and self.tok.text == UNIVERSAL_ROLE:
                    self.pos += 1
                    self.expect(".")
                    body = self.concept()
                    return ExistsU(body) if t.text == "some" else ForallU(body)
                role = self.role()
                self.expect(".")
                body = self.concept()
                return Exists(role, body) if t.text == "some" else Forall(role, body)
            if t.text == "{":
                self.pos += 1
                term = self.term()
                self.expect("}")
                return Nominal(term)
            if t.text == "(":
                self.pos += 1
                left = self.concept()
                if self.at(")"):
                    self.pos += 1
                    return left
                for op, cls in self._CONCEPT_BINOPS.items():
                    if self.at(op):
                        self.pos += 1
                        right = self.concept()
                        self.expect(")")
                        return cls(left, right)
                self.fail(*(repr(op) for op in self._CONCEPT_BINOPS), "')'")
        self.fail("concept")

    # -- formulas
    _FORMULA_BINOPS = {"&&": FAnd, "||": FOr, "U": FUntil}
    _FORMULA_UNARY = {"!": FNot, "DIA": FDiamond, "BOX": FBox, "BOX+": FBoxPlus, "X": FNext}

    def assertion(self) -> Formula:
        if self.tok.kind == "iname" and self.tokens[self.pos + 1].text == "(" and self.tok.text != UNIVERSAL_ROLE:
            role = self.role()
            self.expect("(")
            subject = self.term()
            self.expect(",")
            obj = self.term()
            self.expect(")")
            return RoleAssertion(role, subject, obj)
        concept = self.concept()
        self.expect("(")
        term = self.term()
        self.expect(")")
        return ConceptAssertion(concept, term)

    def formula(self) -> Formula:
        start = self.pos
        try:
            return self.assertion()
        except _Fail:
            self.pos = start
        t = self.tok
        if t.text == "[" and t.kind == "sym":
            self.pos += 1
            sub = self.concept()
            self.expect("<=")
            sup = self.concept()
            self.expect("]")
            return Inclusion(sub, sup)
        if t.kind in ("sym", "kw") and t.text in self._FORMULA_UNARY:
            self.pos += 1
            return self._FORMULA_UNARY[t.text](self.formula())
        if t.kind == "sym" and t.text == "(":
            self.pos += 1
            left = self.formula()
            if self.at(")"):
                self.pos += 1
                return left
            for op, cls in self._FORMULA_BINOPS.items():
                if self.at(op):
                    self.pos += 1
                    right = self.formula()
                    self.expect(")")
                    return cls(left, right)
            self.fail(*(repr(op) for op in self._FORMULA_BINOPS), "')'")
        self.fail("formula")


def _run(text: str, rule: str):
    p = _Parser(text)
    try:
        result = getattr(p, rule)()
        p.finish()
    except _Fail:
        raise p.error() from None
    return result


def parse_concept(text: str) -> Concept:
    return _run(text, "concept")


def parse_formula(text: str) -> Formula:
    return _run(text, "formula")


def parse_term(text: str) -> Term:
    return _run(text, "term")


# -------------------------------------------------------------------------- printer


def print_term(t: Term) -> str:
    if isinstance(t, Individual):
        return t.name
    if isinstance(t, Iota):
        return f"iota {print_concept(t.body)}"
    raise TypeError(f"not a term: {t!r}")


_UNARY_SYMBOLS = {
    Not: "~", Diamond: "dia ", Box: "box ", DiamondPlus: "dia+ ", BoxPlus: "box+ ",
    Next: "X ", Eventually: "F ", Always: "G ", EventuallyPlus: "F+ ", AlwaysPlus: "G+ ",
}
_BINARY_SYMBOLS = {And: "&", Or: "|", Implies: "=>", Until: "U"}


def print_concept(c: Concept) -> str:
    if isinstance(c, ConceptName):
        return c.name
    if isinstance(c, Top):
        return "true"
    if isinstance(c, Bottom):
        return "false"
    if isinstance(c, Last):
        return "last"
    if isinstance(c, Nominal):
        return "{" + print_term(c.term) + "}"
    cls = type(c)
    if cls in _UNARY_SYMBOLS:
        inner = c.arg if isinstance(c, Not) else c.body
        return _UNARY_SYMBOLS[cls] + print_concept(inner)
    if cls in _BINARY_SYMBOLS:
        return f"({print_concept(c.left)} {_BINARY_SYMBOLS[cls]} {print_concept(c.right)})"
    if isinstance(c, (Exists, Forall)):
        q = "some" if isinstance(c, Exists) else "all"
        return f"{q} {c.role}.{print_concept(c.body)}"
    if isinstance(c, (ExistsU, ForallU)):
        q = "some" if isinstance(c, ExistsU) else "all"
        return f"{q} u.{print_concept(c.body)}"
    raise TypeError(f"not a concept: {c!r}")


_FORMULA_UNARY_SYMBOLS = {FNot: "!", FDiamond: "DIA ", FBox: "BOX ", FBoxPlus: "BOX+ ", FNext: "X "}
_FORMULA_BINARY_SYMBOLS = {FAnd: "&&", FOr: "||", FUntil: "U"}


def print_formula(f: Formula) -> str:
    if isinstance(f, Inclusion):
        return f"[{print_concept(f.sub)} <= {print_concept(f.sup)}]"
    if isinstance(f, ConceptAssertion):
        return f"{print_concept(f.concept)}({print_term(f.term)})"
    if isinstance(f, RoleAssertion):
        return f"{f.role}({print_term(f.subject)},{print_term(f.object)})"
    cls = type(f)
    if cls in _FORMULA_UNARY_SYMBOLS:
        inner = print_formula(f.arg)
        # a concept assertion after a prefix would be read as an assertion of a bigger concept
        if isinstance(f.arg, ConceptAssertion) and cls in (FNext,):
            inner = f"({inner})"
        return _FORMULA_UNARY_SYMBOLS[cls] + inner
    if cls in _FORMULA_BINARY_SYMBOLS:
        return f"({print_formula(f.left)} {_FORMULA_BINARY_SYMBOLS[cls]} {print_formula(f.right)})"
    raise TypeError(f"not a formula: {f!r}")


def pretty(x) -> str:
    if isinstance(x, Concept):
        return print_concept(x)
    if isinstance(x, Formula):
        return print_formula(x)
    if isinstance(x, Term):
        return print_term(x)
    raise TypeError(f"cannot print {x!r}")
