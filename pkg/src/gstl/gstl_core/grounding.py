"""Ground spatial terms over a fixed hierarchy into CNF.

The hierarchy's node set and parent/child structure are taken as given; what
remains propositional is each node's label and the neighbor relation between
same-layer nodes. Existential selectors become disjunctions over candidate
nodes and universal ones conjunctions. Distribution to CNF is exact up to a
size cap, past which a sub-formula is named by a fresh auxiliary variable
(one-directional definition, so satisfiability is preserved).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Mapping

from ..spatial_model import HierGraph
from .syntax import (
    EXISTS, FORALL, Atom, BoolConst, Child, Neighbor, Parent, Ref, RelPattern, SpatialTerm,
    TAnd, TNot, TOr,
)

__all__ = ["GroundAtom", "Literal", "CNF", "ground_term_cnf", "ground_expr", "atom_truth",
           "graph_assignment", "DEFAULT_CAP"]

DEFAULT_CAP = 512


@dataclass(frozen=True)
class GroundAtom:
    """``label``: node has class ``value``; ``adj``: node and ``value`` are
    neighbors; ``rel``: they are neighbors under ``pattern``; ``aux``: a
    Tseitin name. ``t`` optionally indexes the atom by frame."""

    kind: str
    node: str
    value: str = ""
    pattern: RelPattern | None = None
    t: int | None = None

    def at(self, t: int | None) -> "GroundAtom":
        return GroundAtom(self.kind, self.node, self.value, self.pattern, t)

    def __repr__(self) -> str:
        tail = f"@{self.t}" if self.t is not None else ""
        if self.kind == "label":
            return f"{self.node}:{self.value}{tail}"
        if self.kind == "aux":
            return f"aux{self.node}{tail}"
        from .parser import _pattern
        pat = _pattern(self.pattern) if self.pattern is not None else ""
        return f"{self.kind}({self.node},{self.value}){pat}{tail}"

    # RelPattern is hashable but unordered; order via repr when needed
    def __lt__(self, other):  # type: ignore[override]
        return repr(self) < repr(other)


Literal = tuple  # (GroundAtom, bool)


@dataclass
class CNF:
    clauses: list

    def __post_init__(self):
        self.clauses = [frozenset(c) for c in self.clauses]

    @property
    def is_false(self) -> bool:
        return any(len(c) == 0 for c in self.clauses)

    def atoms(self) -> list[GroundAtom]:
        return sorted({a for c in self.clauses for a, _ in c}, key=repr)

    def evaluate(self, assignment: Mapping[GroundAtom, bool]) -> bool:
        return all(any(assignment[a] == pol for a, pol in c) for c in self.clauses)

    def __and__(self, other: "CNF") -> "CNF":
        return CNF(self.clauses + other.clauses)

    def __len__(self) -> int:
        return len(self.clauses)


# expression nodes: ("const", bool) | ("lit", atom, pol) | ("and", [..]) | ("or", [..])
TRUE_E = ("const", True)
FALSE_E = ("const", False)


def _and(parts):
    out = []
    for p in parts:
        if p == FALSE_E:
            return FALSE_E
        if p == TRUE_E:
            continue
        out.extend(p[1] if p[0] == "and" else [p])
    if not out:
        return TRUE_E
    return out[0] if len(out) == 1 else ("and", out)


def _or(parts):
    out = []
    for p in parts:
        if p == TRUE_E:
            return TRUE_E
        if p == FALSE_E:
            continue
        out.extend(p[1] if p[0] == "or" else [p])
    if not out:
        return FALSE_E
    return out[0] if len(out) == 1 else ("or", out)


class _Grounder:
    def __init__(self, g: HierGraph, defs, assume, t):
        self.g, self.defs, self.t = g, defs, t
        self.assume = assume if assume is not None else {}
        self.layer_nodes = {}
        for n in g.nodes.values():
            self.layer_nodes.setdefault(n.layer, []).append(n.id)
        for k in self.layer_nodes:
            self.layer_nodes[k].sort()

    def lit(self, atom: GroundAtom, pos: bool):
        atom = atom.at(self.t)
        if atom in self.assume:
            return TRUE_E if self.assume[atom] == pos else FALSE_E
        return ("lit", atom, pos)

    def expr(self, v: str, tau: SpatialTerm, pos: bool = True):
        g = self.g
        if isinstance(tau, Atom):
            return self.lit(GroundAtom("label", v, tau.label), pos)
        if isinstance(tau, BoolConst):
            return TRUE_E if tau.value == pos else FALSE_E
        if isinstance(tau, Ref):
            from .semantics import _lookup
            return self.expr(v, _lookup(self.defs, tau.name), pos)
        if isinstance(tau, TNot):
            return self.expr(v, tau.arg, not pos)
        if isinstance(tau, (TAnd, TOr)):
            parts = [self.expr(v, a, pos) for a in tau.args]
            conj = isinstance(tau, TAnd) == pos
            return _and(parts) if conj else _or(parts)
        if isinstance(tau, (Parent, Child)):
            if isinstance(tau, Parent):
                p = g.parent_of.get(v)
                related = [p] if p is not None else []
            else:
                related = sorted(g.children_of.get(v, ()))
            if tau.sel in (EXISTS, FORALL):
                parts = [self.expr(w, tau.arg, pos) for w in related]
                conj = (tau.sel == FORALL) == pos
                return _and(parts) if conj else _or(parts)
            parts = [self.expr(w, tau.arg, pos) if w in related else (FALSE_E if pos else TRUE_E)
                     for w in tau.sel]
            return _and(parts) if pos else _or(parts)
        if isinstance(tau, Neighbor):
            layer = g.node(v).layer
            cands = [w for w in self.layer_nodes.get(layer, ()) if w != v]

            def hit(w, p):
                # neighbor under the pattern and operand true (p) or its negation (not p)
                r = self.lit(GroundAtom("rel", v, w, tau.pattern), p)
                return _and([r, self.expr(w, tau.arg, p)]) if p else _or([r, self.expr(w, tau.arg, p)])

            if tau.sel == EXISTS:
                return _or([hit(w, True) for w in cands]) if pos else _and([hit(w, False) for w in cands])
            if tau.sel == FORALL:
                def each(w, p):
                    adj = self.lit(GroundAtom("adj", v, w), not p)
                    return _or([adj, hit(w, True)]) if p else _and([adj, hit(w, False)])
                return _and([each(w, True) for w in cands]) if pos else _or([each(w, False) for w in cands])
            parts = [hit(w, pos) if w in cands else (FALSE_E if pos else TRUE_E) for w in tau.sel]
            return _and(parts) if pos else _or(parts)
        raise TypeError(f"not a spatial term: {tau!r}")


def _clause(lits):
    c = frozenset(lits)
    atoms = {}
    for a, p in c:
        if atoms.setdefault(a, p) != p:
            return None  # tautology
    return c


class _CnfBuilder:
    def __init__(self, cap: int, aux_prefix: str):
        self.cap = cap
        self.aux_prefix = aux_prefix
        self.n_aux = 0
        self.defs: list = []

    def fresh(self) -> GroundAtom:
        self.n_aux += 1
        return GroundAtom("aux", f"{self.aux_prefix}{self.n_aux}")

    def cnf(self, e) -> list:
        kind = e[0]
        if kind == "const":
            return [] if e[1] else [frozenset()]
        if kind == "lit":
            return [frozenset({(e[1], e[2])})]
        if kind == "and":
            out = []
            for p in e[1]:
                out.extend(self.cnf(p))
            return out
        # disjunction: distribute child clause sets
        acc = [frozenset()]
        for p in e[1]:
            sub = self.cnf(p)
            if len(acc) * len(sub) > self.cap and len(sub) > 1:
                x = self.fresh()
                self.defs.extend(c | {(x, False)} for c in sub)
                sub = [frozenset({(x, True)})]
            nxt = []
            for c1, c2 in product(acc, sub):
                c = _clause(c1 | c2)
                if c is not None:
                    nxt.append(c)
            acc = nxt
        return acc


def ground_expr(g: HierGraph, tau: SpatialTerm, v: str | None = None, *, defs=None,
                assume=None, t: int | None = None):
    v = g.root if v is None else v
    g.node(v)
    return _Grounder(g, defs, assume, t).expr(v, tau)


def ground_term_cnf(g: HierGraph, tau: SpatialTerm, v: str | None = None, *, negate=False,
                    defs=None, assume: Mapping | None = None, t: int | None = None,
                    cap: int = DEFAULT_CAP, aux_prefix: str = "") -> CNF:
    """CNF over ground atoms equisatisfiable with ``tau`` (or its negation) at ``v``.

    ``assume`` pins atoms to known values and simplifies them away; ``t``
    stamps every atom with a frame index.
    """
    v = g.root if v is None else v
    g.node(v)
    e = _Grounder(g, defs, assume, t).expr(v, tau, not negate)
    b = _CnfBuilder(cap, aux_prefix if t is None else f"{aux_prefix}{t}.")
    clauses = b.cnf(e)
    out, seen = [], set()
    for c in clauses + b.defs:
        if c not in seen:
            seen.add(c)
            out.append(c)
    return CNF(out)


def atom_truth(g: HierGraph, a: GroundAtom) -> bool:
    if a.kind == "label":
        return g.label(a.node) == a.value
    rels = [r for w, r in g.neighbors_of.get(a.node, ()) if w == a.value]
    if a.kind == "adj":
        return bool(rels)
    if a.kind == "rel":
        return any(a.pattern.matches(r) for r in rels)
    raise ValueError(f"no graph truth for {a.kind} atoms")


def graph_assignment(g: HierGraph, atoms) -> dict:
    return {a: atom_truth(g, a) for a in atoms if a.kind != "aux"}
