"""Quasimodels: the certificate-based decision procedure for S5 concepts.

Types are integers used as bitsets over the indices of a :class:`ClosureSet`.
A quasimodel is stored as ``k`` worlds, the quasistate of every world (a
sorted tuple of types) and a list of runs (one type per world).

The search fills a run matrix (rows are runs, columns are worlds) and reads
the quasistates off its columns. Two facts shape it: all types in a column
agree on their ``some u.C`` members (Q3), and all types in a row agree on
their ``dia C`` members (R1), so candidates for a cell are looked up by that
pair of signatures.
"""

from __future__ import annotations

import numpy as np
from dataclasses import dataclass, field
from typing import Optional

from .semantics import PartialInterpretation, State, concept_extensions
from .syntax import (
    And,
    ClosureSet,
    Concept,
    ConceptName,
    Diamond,
    Exists,
    ExistsU,
    Individual,
    Iota,
    Nominal,
    Not,
    closure,
    contains_iota,
    infer_logic,
    is_normalized,
    LTLF,
)

CONDITIONS = ("C1", "C2", "Q1", "Q2", "Q3", "B1", "R1", "M1", "M2")
MAX_BOUND = 2**63 - 1

SAT = "sat"
UNSAT = "unsat"
UNSAT_UP_TO = "unsat-up-to"
UNKNOWN = "unknown"


def theoretical_world_bound(n: int) -> int:
    """``2**(2n) * n**2``, saturated at ``2**63 - 1``."""
    if n < 1:
        raise ValueError("closure size must be at least 1")
    if 2 * n >= 63:
        return MAX_BOUND
    return min(MAX_BOUND, (1 << (2 * n)) * n * n)


# ------------------------------------------------------------------ types


class TypeSpace:
    """Per-closure tables: member kinds, requirement masks, signatures."""

    def __init__(self, cl: ClosureSet):
        self.cl = cl
        members = cl.members
        self.size = len(members)
        self.free = [i for i, c in enumerate(members) if not isinstance(c, (Not, And))]
        self.ands = [i for i, c in enumerate(members) if isinstance(c, And)]
        self.nots = [i for i, c in enumerate(members) if isinstance(c, Not)]
        self.dias = [i for i, c in enumerate(members) if isinstance(c, Diamond)]
        self.eus = [i for i, c in enumerate(members) if isinstance(c, ExistsU)]
        self.exists = [i for i, c in enumerate(members) if isinstance(c, Exists)]
        self.nominals = [i for i, c in enumerate(members) if isinstance(c, Nominal)]
        self.dia_mask = _mask(self.dias)
        self.eu_mask = _mask(self.eus)
        self.nom_mask = _mask(self.nominals)
        self.body = {i: cl.index(members[i].body) for i in self.dias + self.eus + self.exists}
        self.root = cl.index(cl.root)
        self._dia_pairs = [(1 << i, 1 << self.body[i]) for i in self.dias]
        self._eu_pairs = [(1 << i, 1 << self.body[i]) for i in self.eus]
        self._all_pairs = self._dia_pairs + self._eu_pairs

    def bit(self, c: Concept) -> int:
        return 1 << self.cl.index(c)

    # requirement masks of a type
    def u_reqs(self, t: int) -> list:
        return [1 << self.body[i] for i in self.eus if t >> i & 1]

    def d_reqs(self, t: int) -> list:
        return [1 << self.body[i] for i in self.dias if t >> i & 1]

    def r_reqs(self, t: int) -> list:
        members = self.cl.members
        out = []
        for i in self.exists:
            if not t >> i & 1:
                continue
            role = members[i].role
            req = 1 << self.body[i]
            for j in self.exists:
                if members[j].role == role and not t >> j & 1:
                    req |= 1 << self.cl.partner[self.body[j]]
            out.append(req)
        return out

    def realized_dias(self, t: int) -> int:
        """The ``dia C`` members whose body ``C`` is in ``t``."""
        return self._realized(t, self._dia_pairs)

    def realized_eus(self, t: int) -> int:
        return self._realized(t, self._eu_pairs)

    @staticmethod
    def _realized(t: int, pairs) -> int:
        out = 0
        for bit, body in pairs:
            if t & body:
                out |= bit
        return out

    def locally_coherent(self, t: int) -> bool:
        """A type cannot contain ``C`` while denying ``dia C`` or ``some u.C``."""
        for bit, body in self._all_pairs:
            if t & body and not t & bit:
                return False
        return True

    def describe(self, t: int) -> list:
        from .grammar import pretty

        return [pretty(c) for i, c in enumerate(self.cl.members) if t >> i & 1]


def _mask(indices) -> int:
    out = 0
    for i in indices:
        out |= 1 << i
    return out


def _type_table(cl: ClosureSet, start: int, stop: int, free: list, steps: list) -> np.ndarray:
    """Rows ``start..stop-1`` of the type enumeration, one column per closure member.

    Built member-major so that each propagation step touches contiguous memory.
    """
    n = np.arange(start, stop, dtype=np.int64)
    table = np.zeros((len(cl), stop - start), dtype=bool)
    for j, i in enumerate(free):
        table[i] = (n >> (len(free) - 1 - j) & 1) == 0
    for i, x, y in steps:
        if y is None:
            np.logical_not(table[x], out=table[i])
        else:
            np.logical_and(table[x], table[y], out=table[i])
    return table.T


def _pack(table: np.ndarray) -> list:
    packed = np.packbits(table, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def _enumeration_plan(cl: ClosureSet) -> tuple:
    members = cl.members
    free = [i for i, c in enumerate(members) if not isinstance(c, (Not, And))]
    steps = []
    for i in _evaluation_order(cl):
        c = members[i]
        if isinstance(c, Not):
            steps.append((i, cl.index(c.arg), None))
        else:
            steps.append((i, cl.index(c.left), cl.index(c.right)))
    return free, steps


def enumerate_types(cl: ClosureSet) -> list:
    """All C1/C2-consistent subsets of ``cl`` as bitmasks, in a fixed order.

    Truth values are chosen for the non-Boolean members (first member varies
    slowest, true before false) and propagated through negation and
    conjunction.
    """
    free, steps = _enumeration_plan(cl)
    return _pack(_type_table(cl, 0, 1 << len(free), free, steps))


def coherent_types(sp: TypeSpace, chunk: int = 1 << 16) -> list:
    """The types of :func:`enumerate_types` that are locally coherent, in the same order.

    Filters chunk by chunk so that large closures never materialize the
    full table.
    """
    cl = sp.cl
    free, steps = _enumeration_plan(cl)
    pairs = [(i, sp.body[i]) for i in sp.dias + sp.eus]
    out = []
    total = 1 << len(free)
    for start in range(0, total, chunk):
        table = _type_table(cl, start, min(total, start + chunk), free, steps)
        ok = np.ones(len(table), dtype=bool)
        for i, b in pairs:
            ok &= table[:, i] | ~table[:, b]
        out += _pack(table[ok])
    return out


def _evaluation_order(cl: ClosureSet) -> list:
    """Boolean members ordered so that arguments come before compounds."""
    members = cl.members
    done: set = set()
    order: list = []

    def visit(i):
        if i in done:
            return
        done.add(i)
        c = members[i]
        if isinstance(c, Not):
            visit(cl.index(c.arg))
            order.append(i)
        elif isinstance(c, And):
            visit(cl.index(c.left))
            visit(cl.index(c.right))
            order.append(i)

    for i in range(len(members)):
        visit(i)
    return order


def brute_force_types(cl: ClosureSet) -> list:
    """Reference filter over all ``2**|cl|`` subsets (small closures only)."""
    return [t for t in range(1 << len(cl)) if not check_type(t, cl)]


# ------------------------------------------------------------- diagnostics


@dataclass(frozen=True)
class Violation:
    condition: str
    message: str
    world: Optional[int] = None


def check_type(t: int, cl: ClosureSet) -> list:
    out = []
    for i, c in enumerate(cl.members):
        if isinstance(c, Not):
            j = cl.index(c.arg)
            if bool(t >> i & 1) == bool(t >> j & 1):
                out.append(Violation("C1", f"exactly one of member {j} and its negation {i} must hold"))
        elif isinstance(c, And):
            both = t >> cl.index(c.left) & 1 and t >> cl.index(c.right) & 1
            if bool(t >> i & 1) != bool(both):
                out.append(Violation("C2", f"conjunction member {i} disagrees with its conjuncts"))
    return out


def check_quasistate(types, cl: ClosureSet, world: Optional[int] = None) -> list:
    """Q1-Q3 for a set of types (C1/C2 are reported too)."""
    sp = TypeSpace(cl)
    types = sorted(set(types))
    out = []
    if not types:
        out.append(Violation("Q1", "a quasistate must be nonempty", world))
    for t in types:
        out += [Violation(v.condition, v.message, world) for v in check_type(t, cl)]
    for i in sp.nominals:
        holders = [t for t in types if t >> i & 1]
        if len(holders) > 1:
            out.append(Violation("Q1", f"{len(holders)} types contain nominal member {i}", world))
    for t in types:
        for req in sp.r_reqs(t):
            if not any(t2 & req == req for t2 in types):
                out.append(Violation("Q2", f"no witness type for requirement mask {req:#x}", world))
        for i in sp.eus:
            has = bool(t >> i & 1)
            realized = any(t2 >> sp.body[i] & 1 for t2 in types)
            if has != realized:
                out.append(Violation("Q3", f"member {i} (some u) disagrees with the quasistate", world))
    return out


def check_run(run, quasistates, cl: ClosureSet, label: str = "") -> list:
    if len(run) != len(quasistates):
        raise ValueError("a run assigns one type per world")
    for w, t in enumerate(run):
        if t not in quasistates[w]:
            raise ValueError(f"run{label} leaves the quasistate of world {w}")
    sp = TypeSpace(cl)
    out = []
    for i in sp.dias:
        realized = any(t >> sp.body[i] & 1 for t in run)
        for w, t in enumerate(run):
            if bool(t >> i & 1) != realized:
                out.append(Violation("R1", f"run{label}: dia member {i} fails at world {w}", w))
    return out


@dataclass(frozen=True)
class Quasimodel:
    closure: ClosureSet
    quasistates: tuple  # per world: sorted tuple of types
    runs: tuple  # per run: tuple of types, one per world

    @property
    def worlds(self) -> int:
        return len(self.quasistates)

    def types(self) -> list:
        return sorted({t for q in self.quasistates for t in q})


def verify_quasimodel(qm: Quasimodel, root: Optional[Concept] = None) -> list:
    """Every violated condition, in the order C/Q, R1, B1, M1, M2; empty means valid."""
    cl = qm.closure
    if root is not None and root != cl.root:
        raise ValueError("the certificate's closure belongs to a different concept")
    sp = TypeSpace(cl)
    out = []
    if not qm.quasistates:
        out.append(Violation("B1", "there are no worlds"))
    for w, q in enumerate(qm.quasistates):
        out += check_quasistate(q, cl, w)
    for n, run in enumerate(qm.runs):
        if len(run) != qm.worlds:
            out.append(Violation("M1", f"run {n} does not cover every world"))
            continue
        bad = [w for w, t in enumerate(run) if t not in qm.quasistates[w]]
        if bad:
            out.append(Violation("M1", f"run {n} leaves the quasistate at world {bad[0]}", bad[0]))
            continue
        out += check_run(run, qm.quasistates, cl, f" {n}")
    if not any(t >> sp.root & 1 for q in qm.quasistates for t in q):
        out.append(Violation("B1", "no type contains the root concept"))
    for w, q in enumerate(qm.quasistates):
        for t in q:
            if not any(len(run) == qm.worlds and run[w] == t for run in qm.runs):
                out.append(Violation("M1", f"no run passes through a type of world {w}", w))
    for w, q in enumerate(qm.quasistates):
        for i in sp.nominals:
            if any(t >> i & 1 for t in q):
                carriers = sum(1 for run in qm.runs if len(run) == qm.worlds and run[w] >> i & 1)
                if carriers != 1:
                    out.append(Violation("M2", f"{carriers} runs carry nominal member {i} at world {w}", w))
    return out


def condition_summary(violations) -> dict:
    failed = {v.condition for v in violations}
    return {c: c not in failed for c in CONDITIONS}


# ------------------------------------------------------------------ search


@dataclass(frozen=True)
class SearchConfig:
    max_worlds: int = 3
    max_runs: int = 3
    node_ceiling: int = 2_000_000
    use_bound: bool = True

    def __post_init__(self):
        if self.max_worlds < 1 or self.max_runs < 1 or self.node_ceiling < 1:
            raise ValueError("search caps must be at least 1")


@dataclass(frozen=True)
class SatVerdict:
    status: str
    certificate: Optional[Quasimodel] = None
    caps: tuple = ()
    nodes: int = 0
    note: str = ""
    stats: dict = field(default_factory=dict)


class _Exhausted(Exception):
    pass


def eliminate_types(sp: TypeSpace, types: list) -> list:
    """Drop types that cannot occur in any quasimodel (nominals ignored).

    A type needs column-mates with the same ``some u`` signature realizing
    its ``some u`` and ``some r`` requirements, and row-mates with the same
    ``dia`` signature realizing its ``dia`` requirements. Sound, so an empty
    result (or one without the root) refutes satisfiability.
    """
    alive = [t for t in types if sp.locally_coherent(t)]
    ex_mask = _mask(sp.exists)

    def key(t):
        return (t & sp.eu_mask, t & ex_mask, t & sp.dia_mask)

    # whether a type survives a round depends only on its key
    reqs: dict = {}
    for t in alive:
        k = key(t)
        if k not in reqs:
            reqs[k] = (sp.u_reqs(t) + sp.r_reqs(t), sp.d_reqs(t))
    while True:
        by_u: dict = {}
        by_d: dict = {}
        for t in alive:
            by_u.setdefault(t & sp.eu_mask, []).append(t)
            by_d.setdefault(t & sp.dia_mask, []).append(t)
        good = {}
        for k, (ureq, dreq) in reqs.items():
            col, row = by_u.get(k[0], ()), by_d.get(k[2], ())
            good[k] = all(any(t2 & r == r for t2 in col) for r in ureq) and all(
                any(t2 & r == r for t2 in row) for r in dreq
            )
        keep = [t for t in alive if good[key(t)]]
        if len(keep) == len(alive):
            return keep
        alive = keep
        reqs = {k: v for k, v in reqs.items() if good[k]}


class _Search:
    def __init__(self, sp: TypeSpace, types: list, k: int, m: int, budget: list):
        self.sp, self.k, self.m = sp, k, m
        self.budget = budget
        self.by_du: dict = {}
        self.by_d: dict = {}
        self.by_u: dict = {}
        for t in types:
            d, u = t & sp.dia_mask, t & sp.eu_mask
            self.by_du.setdefault((d, u), []).append(t)
            self.by_d.setdefault(d, []).append(t)
            self.by_u.setdefault(u, []).append(t)
        self.roots = [t for t in types if t >> sp.root & 1]
        self.dreal = {t: sp.realized_dias(t) for t in types}
        self.ureal = {t: sp.realized_eus(t) for t in types}
        self.rreqs = {t: sp.r_reqs(t) for t in types}
        self.grid = [[None] * k for _ in range(m)]

    def run(self) -> Optional[list]:
        self.row_real = [0] * self.m
        self.col_real = 0
        self.col_noms = 0
        if self._cell(0, 0):
            return [list(r) for r in self.grid]
        return None

    def _candidates(self, i: int, c: int) -> list:
        if i == 0 and c == 0:
            return self.roots
        if c > 0 and i > 0:
            d = self.grid[i][0] & self.sp.dia_mask
            u = self.grid[0][c] & self.sp.eu_mask
            return self.by_du.get((d, u), [])
        if c > 0:
            return self.by_d.get(self.grid[i][0] & self.sp.dia_mask, [])
        return self.by_u.get(self.grid[0][c] & self.sp.eu_mask, [])

    def _cell(self, i: int, c: int) -> bool:
        k, m, sp, g = self.k, self.m, self.sp, self.grid
        if c == k:
            return True
        ni, nc = (i + 1, c) if i + 1 < m else (0, c + 1)
        last_col, last_row = c == k - 1, i == m - 1
        row_tie = i >= 2 and all(g[i][x] == g[i - 1][x] for x in range(c))
        col_tie = c >= 2 and all(g[y][c] == g[y][c - 1] for y in range(i))
        saved = (self.row_real[i], self.col_real, self.col_noms)
        for t in self._candidates(i, c):
            self.budget[0] -= 1
            if self.budget[0] < 0:
                raise _Exhausted()
            if t & sp.nom_mask & self.col_noms:
                continue
            if row_tie and t < g[i - 1][c]:
                continue
            if col_tie and t < g[i][c - 1]:
                continue
            row_real = saved[0] | self.dreal[t]
            if last_col and (t & sp.dia_mask) & ~row_real:
                continue
            col_real = saved[1] | self.ureal[t]
            if last_row:
                if (t & sp.eu_mask) & ~col_real:
                    continue
                g[i][c] = t
                if not self._column_ok(c):
                    g[i][c] = None
                    continue
                if last_col and not self._rows_distinct():
                    g[i][c] = None
                    continue
            g[i][c] = t
            self.row_real[i] = row_real
            if last_row:
                self.col_real, self.col_noms = 0, 0
            else:
                self.col_real, self.col_noms = col_real, saved[2] | (t & sp.nom_mask)
            if self._cell(ni, nc):
                return True
            self.row_real[i], self.col_real, self.col_noms = saved
            g[i][c] = None
        return False

    def _column_ok(self, c: int) -> bool:
        col = {row[c] for row in self.grid}
        if c >= 1 and c - 1 >= 1 and [r[c] for r in self.grid] == [r[c - 1] for r in self.grid]:
            return False
        if c >= 1 and [r[c] for r in self.grid] == [r[0] for r in self.grid]:
            return False
        for t in col:
            for req in self.rreqs[t]:
                if not any(t2 & req == req for t2 in col):
                    return False
        return True

    def _rows_distinct(self) -> bool:
        rows = [tuple(r) for r in self.grid]
        return len(set(rows)) == len(rows)


def search_quasimodel(concept: Concept, cfg: SearchConfig = SearchConfig()) -> SatVerdict:
    """Look for a quasimodel of ``concept`` with at most the configured worlds and runs."""
    if contains_iota(concept):
        raise ValueError("descriptions must be eliminated before the S5 engine runs")
    if infer_logic(concept) == LTLF:
        raise ValueError("the quasimodel engine handles S5 concepts only")
    if not is_normalized(concept):
        raise ValueError("the concept must be normalized")
    cl = closure(concept)
    sp = TypeSpace(cl)
    coherent = coherent_types(sp)
    types = eliminate_types(sp, coherent)
    caps = (cfg.max_worlds, cfg.max_runs)
    stats = {
        "closure": len(cl),
        "types": 1 << len(sp.free),
        "coherent_types": len(coherent),
        "surviving_types": len(types),
    }
    if not any(t >> sp.root & 1 for t in types):
        return SatVerdict(UNSAT, caps=caps, note="type elimination leaves no type with the root", stats=stats)
    budget = [cfg.node_ceiling]
    pairs = sorted(
        ((k, m) for k in range(1, cfg.max_worlds + 1) for m in range(1, cfg.max_runs + 1)),
        key=lambda p: (p[0] + p[1], p[0]),
    )
    for k, m in pairs:
        try:
            grid = _Search(sp, types, k, m, budget).run()
        except _Exhausted:
            return SatVerdict(
                UNKNOWN, caps=caps, nodes=cfg.node_ceiling, note=f"node ceiling reached at {k} worlds, {m} runs", stats=stats
            )
        if grid is not None:
            qm = _grid_to_quasimodel(cl, grid)
            return SatVerdict(SAT, qm, caps, cfg.node_ceiling - budget[0], stats=stats)
    nodes = cfg.node_ceiling - budget[0]
    bound = theoretical_world_bound(len(cl))
    if cfg.use_bound and cfg.max_worlds >= bound and cfg.max_runs >= bound * max(1, len(types)):
        return SatVerdict(UNSAT, caps=caps, nodes=nodes, note="caps reach the world bound", stats=stats)
    return SatVerdict(
        UNSAT_UP_TO,
        caps=caps,
        nodes=nodes,
        note=f"no quasimodel with at most {cfg.max_worlds} worlds and {cfg.max_runs} runs; "
        f"completeness would need {bound} worlds",
        stats=stats,
    )


def _grid_to_quasimodel(cl: ClosureSet, grid: list) -> Quasimodel:
    k = len(grid[0])
    quasistates = tuple(tuple(sorted({row[c] for row in grid})) for c in range(k))
    runs = tuple(tuple(row) for row in grid)
    return Quasimodel(cl, quasistates, runs)


# -------------------------------------------------------- model conversion


def extract_model(qm: Quasimodel) -> PartialInterpretation:
    """The model whose elements are the runs of a verified quasimodel."""
    problems = verify_quasimodel(qm)
    if problems:
        raise ValueError(f"certificate fails {sorted({v.condition for v in problems})}")
    cl = qm.closure
    sp = TypeSpace(cl)
    members = cl.members
    runs = qm.runs
    states = []
    for w in range(qm.worlds):
        concepts: dict = {}
        roles: dict = {}
        names: dict = {}
        for i, c in enumerate(members):
            if isinstance(c, ConceptName):
                concepts[c.name] = frozenset(n for n, r in enumerate(runs) if r[w] >> i & 1)
            elif isinstance(c, Nominal) and isinstance(c.term, Individual):
                holders = [n for n, r in enumerate(runs) if r[w] >> i & 1]
                names[c.term.name] = holders[0] if len(holders) == 1 else None
        role_names = sorted({members[i].role for i in sp.exists})
        for role in role_names:
            pairs = set()
            for n, r in enumerate(runs):
                need = 0
                for j in sp.exists:
                    if members[j].role == role and not r[w] >> j & 1:
                        need |= 1 << cl.partner[sp.body[j]]
                for n2, r2 in enumerate(runs):
                    if r2[w] & need == need:
                        pairs.add((n, n2))
            roles[role] = frozenset(pairs)
        states.append(State(concepts, roles, names))
    return PartialInterpretation(len(runs), tuple(states))


def model_to_quasimodel(model: PartialInterpretation, concept: Concept) -> Quasimodel:
    """Read types, quasistates and runs off a model with universal ∼."""
    if not isinstance(model, PartialInterpretation):
        raise TypeError("only S5 interpretations have quasimodels")
    if not model.is_universal():
        raise ValueError("the model's ∼ must be universal; restrict to one class first")
    if any(isinstance(n.term, Iota) for n in _nominals(concept)):
        raise ValueError("descriptions must be eliminated first")
    cl = closure(concept)
    exts = [concept_extensions(model, c) for c in cl.members]
    k = len(model.states)
    rows = set()
    for d in range(model.domain_size):
        row = []
        for w in range(k):
            t = 0
            for i, ext in enumerate(exts):
                if d in ext[w]:
                    t |= 1 << i
            row.append(t)
        rows.add(tuple(row))
    runs = tuple(sorted(rows))
    quasistates = tuple(tuple(sorted({r[w] for r in runs})) for w in range(k))
    return Quasimodel(cl, quasistates, runs)


def _nominals(concept: Concept) -> list:
    from .syntax import walk

    return [n for n in walk(concept) if isinstance(n, Nominal)]
