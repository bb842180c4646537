"""JSON documents for models and certificates, and the machine text format."""

from __future__ import annotations

import json
import re

from .grammar import parse_concept, pretty
from .minsky import Dec, Inc, MinskyMachine
from .quasimodel import Quasimodel
from .semantics import FiniteTrace, PartialInterpretation, State
from .syntax import closure


class SchemaError(ValueError):
    """A document does not follow the expected layout."""


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _hidden(name: str) -> bool:
    return name.startswith("__")


# ------------------------------------------------------------------ models


def state_to_doc(s: State, show_internal: bool = True) -> dict:
    keep = (lambda n: True) if show_internal else (lambda n: not _hidden(n))
    return {
        "concepts": {k: sorted(v) for k, v in sorted(s.concepts.items()) if keep(k)},
        "roles": {k: sorted([list(p) for p in v]) for k, v in sorted(s.roles.items()) if keep(k)},
        "names": {k: v for k, v in sorted(s.names.items()) if keep(k)},
    }


def model_to_doc(model, show_internal: bool = True) -> dict:
    doc = {
        "domain_size": model.domain_size,
        "states": [state_to_doc(s, show_internal) for s in model.states],
    }
    if isinstance(model, FiniteTrace):
        doc.update(kind="trace", length=len(model.states))
    else:
        doc.update(kind="s5", worlds=len(model.states), partition=[list(b) for b in model.partition])
    return doc


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise SchemaError(message)


def state_from_doc(doc) -> State:
    _require(isinstance(doc, dict), "each state must be an object")
    concepts = doc.get("concepts", {})
    roles = doc.get("roles", {})
    names = doc.get("names", {})
    _require(all(isinstance(x, dict) for x in (concepts, roles, names)), "concepts, roles and names must be objects")
    try:
        return State(
            {k: frozenset(int(d) for d in v) for k, v in concepts.items()},
            {k: frozenset((int(p[0]), int(p[1])) for p in v) for k, v in roles.items()},
            {k: (None if v is None else int(v)) for k, v in names.items()},
        )
    except (TypeError, ValueError, IndexError) as exc:
        raise SchemaError(f"malformed state: {exc}") from None


def model_from_doc(doc):
    _require(isinstance(doc, dict), "a model document must be an object")
    kind = doc.get("kind")
    _require(kind in ("s5", "trace"), "kind must be 's5' or 'trace'")
    _require(isinstance(doc.get("domain_size"), int), "domain_size must be an integer")
    _require(isinstance(doc.get("states"), list), "states must be a list")
    states = tuple(state_from_doc(s) for s in doc["states"])
    try:
        if kind == "trace":
            if "length" in doc:
                _require(doc["length"] == len(states), "length disagrees with the number of states")
            return FiniteTrace(doc["domain_size"], states)
        if "worlds" in doc:
            _require(doc["worlds"] == len(states), "worlds disagrees with the number of states")
        partition = doc.get("partition")
        part = None if partition is None else tuple(tuple(int(w) for w in b) for b in partition)
        return PartialInterpretation(doc["domain_size"], states, part)
    except SchemaError:
        raise
    except (TypeError, ValueError) as exc:
        raise SchemaError(str(exc)) from None


def load_model(path: str):
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: {exc}") from None
    return model_from_doc(doc)


# ------------------------------------------------------------ certificates


def _indices(t: int) -> list:
    return [i for i in range(t.bit_length()) if t >> i & 1]


def certificate_to_doc(qm: Quasimodel) -> dict:
    types = qm.types()
    pos = {t: n for n, t in enumerate(types)}
    return {
        "root": pretty(qm.closure.root),
        "closure": [pretty(c) for c in qm.closure.members],
        "types": [_indices(t) for t in types],
        "quasistates": [[pos[t] for t in q] for q in qm.quasistates],
        "runs": [[pos[t] for t in run] for run in qm.runs],
    }


def certificate_from_doc(doc) -> Quasimodel:
    _require(isinstance(doc, dict), "a certificate must be an object")
    for key in ("root", "closure", "types", "quasistates", "runs"):
        _require(key in doc, f"certificate lacks {key!r}")
    root = parse_concept(doc["root"])
    cl = closure(root)
    listed = [parse_concept(c) for c in doc["closure"]]
    _require(listed == list(cl.members), "the closure listing does not match the closure of the root")
    size = len(cl)
    types = []
    for entry in doc["types"]:
        _require(isinstance(entry, list), "each type is an index array")
        t = 0
        for i in entry:
            _require(isinstance(i, int) and 0 <= i < size, f"type index {i!r} outside the closure")
            t |= 1 << i
        types.append(t)

    def lookup(n):
        _require(isinstance(n, int) and 0 <= n < len(types), f"type reference {n!r} out of range")
        return types[n]

    quasistates = tuple(tuple(sorted({lookup(n) for n in q})) for q in doc["quasistates"])
    runs = tuple(tuple(lookup(n) for n in run) for run in doc["runs"])
    return Quasimodel(cl, quasistates, runs)


def load_json(path: str):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: {exc}") from None


# ---------------------------------------------------------------- machines

_STATES = re.compile(r"^states:\s*(\d+)$")
_INC = re.compile(r"^I(\d+):\s*inc\s+r([12])\s+q(\d+)$")
_DEC = re.compile(r"^I(\d+):\s*dec\s+r([12])\s+q(\d+)\s+q(\d+)$")


def parse_machine(text: str) -> MinskyMachine:
    """Parse ``states: N`` followed by one ``I<k>: inc|dec ...`` line per instruction."""
    lines = [(n, ln.split("#", 1)[0].strip()) for n, ln in enumerate(text.splitlines(), 1)]
    lines = [(n, ln) for n, ln in lines if ln]
    if not lines:
        raise SchemaError("empty machine description")
    n0, head = lines[0]
    m = _STATES.match(head)
    if not m:
        raise SchemaError(f"line {n0}: expected 'states: N'")
    states = int(m.group(1))
    instructions = {}
    for n, ln in lines[1:]:
        if mi := _INC.match(ln):
            k, ins = int(mi.group(1)), Inc(int(mi.group(2)), int(mi.group(3)))
        elif md := _DEC.match(ln):
            k, ins = int(md.group(1)), Dec(int(md.group(2)), int(md.group(3)), int(md.group(4)))
        else:
            raise SchemaError(f"line {n}: expected 'I<k>: inc r<1|2> q<j>' or 'I<k>: dec r<1|2> q<j> q<h>'")
        if k in instructions:
            raise SchemaError(f"line {n}: instruction I{k} defined twice")
        instructions[k] = ins
    if sorted(instructions) != list(range(len(instructions))):
        raise SchemaError("instructions must be numbered I0, I1, ... without gaps")
    return MinskyMachine(states, tuple(instructions[k] for k in range(len(instructions))))


def format_machine(machine: MinskyMachine) -> str:
    out = [f"states: {machine.states}"]
    for k, ins in enumerate(machine.instructions):
        if isinstance(ins, Inc):
            out.append(f"I{k}: inc r{ins.register} q{ins.target}")
        else:
            out.append(f"I{k}: dec r{ins.register} q{ins.nonzero} q{ins.zero}")
    return "\n".join(out) + "\n"
