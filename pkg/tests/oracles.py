"""Reference implementations and random generators shared by the tests.

Every oracle here is written from the definitions, independently of the
package code it checks: brute force where the space is small, direct
geometry where the package builds intermediate structures.
"""

from __future__ import annotations

import functools
import itertools
import math
import random

import numpy as np

from gstl.interval_algebra import IA, Box3, Direction, Interval1D, Rel3
from gstl.spatial_model import EMPTY, Ontology, Snapshot, Trace, WorldObject
from gstl.gstl_core.syntax import (
    EXISTS, FORALL, Always, And, Atom, BoolConst, Child, Eventually, Neighbor, Not, Or, Parent,
    RelPattern, TAnd, Term, TimeBound, TNot, TOr, Until,
)

# ---------------------------------------------------------------- interval algebra

def allen_by_definition(a: Interval1D, b: Interval1D) -> IA:
    """Exactly one of the thirteen defining conditions holds for proper intervals."""
    x1, x2, y1, y2 = a.lo, a.hi, b.lo, b.hi
    conds = {
        IA.B: x2 < y1, IA.BI: y2 < x1,
        IA.M: x2 == y1, IA.MI: y2 == x1,
        IA.O: x1 < y1 < x2 < y2, IA.OI: y1 < x1 < y2 < x2,
        IA.S: x1 == y1 and x2 < y2, IA.SI: x1 == y1 and y2 < x2,
        IA.F: x2 == y2 and y1 < x1, IA.FI: x2 == y2 and x1 < y1,
        IA.D: y1 < x1 and x2 < y2, IA.DI: x1 < y1 and y2 < x2,
        IA.E: x1 == y1 and x2 == y2,
    }
    hits = [r for r, c in conds.items() if c]
    assert len(hits) == 1, (a, b, hits)
    return hits[0]


def rand_interval(rng: random.Random, lo=0, hi=8) -> Interval1D:
    a = rng.randint(lo, hi - 1)
    return Interval1D(a, rng.randint(a + 1, hi))


def rand_rel3(rng: random.Random) -> Rel3:
    rels = list(IA)
    return Rel3(rng.choice(rels), rng.choice(rels), rng.choice(rels))


# ---------------------------------------------------------------- Boolean signals

ATOMS = ("p", "q", "r")


def rand_signals(rng: random.Random, n: int) -> dict:
    return {a: [rng.random() < 0.5 for _ in range(n)] for a in ATOMS}


def rand_signal_term(rng: random.Random, depth=1):
    if depth == 0 or rng.random() < 0.5:
        t = Atom(rng.choice(ATOMS))
        return TNot(t) if rng.random() < 0.3 else t
    k = rng.choice(("and", "or", "not"))
    if k == "not":
        return TNot(rand_signal_term(rng, depth - 1))
    args = (rand_signal_term(rng, depth - 1), rand_signal_term(rng, depth - 1))
    return TAnd(args) if k == "and" else TOr(args)


def rand_bound(rng, top=4) -> TimeBound:
    a = rng.randint(0, top)
    return TimeBound(a, rng.randint(a, top))


def rand_signal_formula(rng: random.Random, depth=2, unbounded=True):
    if depth == 0 or rng.random() < 0.25:
        return Term(rand_signal_term(rng))
    k = rng.choice(("not", "and", "or", "G", "F", "U", "U"))
    sub = lambda: rand_signal_formula(rng, depth - 1, unbounded)  # noqa: E731
    if k == "not":
        return Not(sub())
    if k in ("and", "or"):
        return (And if k == "and" else Or)((sub(), sub()))
    if k == "G":
        return Always(rand_bound(rng), sub())
    if k == "F":
        return Eventually(rand_bound(rng), sub())
    kinds = ["b", "o", "d", "eq"] + (["m", "s", "f"] if unbounded else [])
    kind = rng.choice(kinds)
    bound = None if kind in ("m", "s", "f") else rand_bound(rng)
    return Until(kind, bound, sub(), sub())


class OutOfRange(Exception):
    pass


def signal_oracle(sig: dict, t: int, f, horizon: int) -> bool:
    """Direct recursive semantics over Boolean signals, frames 0..n-1."""
    n = len(sig[ATOMS[0]])

    def term(k, tau):
        if not 0 <= k < n:
            raise OutOfRange(k)
        if isinstance(tau, Atom):
            return sig[tau.label][k]
        if isinstance(tau, BoolConst):
            return tau.value
        if isinstance(tau, TNot):
            return not term(k, tau.arg)
        if isinstance(tau, TAnd):
            return all([term(k, a) for a in tau.args])
        return any([term(k, a) for a in tau.args])

    def ev(g, k) -> bool:
        if isinstance(g, Term):
            return term(k, g.term)
        if isinstance(g, Not):
            return not ev(g.arg, k)
        if isinstance(g, And):
            return all([ev(a, k) for a in g.args])
        if isinstance(g, Or):
            return any([ev(a, k) for a in g.args])
        if isinstance(g, Always):
            return all([ev(g.arg, j) for j in range(k + g.bound.lo, k + g.bound.hi + 1)])
        if isinstance(g, Eventually):
            return any([ev(g.arg, j) for j in range(k + g.bound.lo, k + g.bound.hi + 1)])
        return until(g, k)

    def state(g, j):
        return ev(g.lhs, j), ev(g.rhs, j)

    def until(g, k):
        both = lambda j: state(g, j) == (True, True)  # noqa: E731
        if g.bound is not None:
            lo, hi = k + g.bound.lo, k + g.bound.hi
            inner = range(lo, hi + 1)
            if g.kind == "b":
                ok = all([state(g, j) == (False, False) for j in inner])
                return ok and state(g, lo - 1) == (True, False) and state(g, hi + 1) == (False, True)
            ok = all([both(j) for j in inner])
            before, after = state(g, lo - 1), state(g, hi + 1)
            return ok and {
                "o": ((True, False), (False, True)),
                "d": ((False, True), (False, True)),
                "eq": ((False, False), (False, False)),
            }[g.kind] == (before, after)
        H = horizon
        if g.kind == "m":
            return any([state(g, k + u - 1) == (True, False) and state(g, k + u) == (False, True)
                        for u in range(1, H + 1)])
        first, last = {"s": ((False, False), (False, True)),
                       "f": ((False, True), (False, False))}[g.kind]
        for a in range(1, H):
            for b in range(a + 1, H):
                if (state(g, k + a - 1) == first and all([both(j) for j in range(k + a, k + b + 1)])
                        and state(g, k + b + 1) == last):
                    return True
        return False

    return ev(f, t)


# ---------------------------------------------------------------- scenes

SMALL_ONTOLOGY = Ontology(
    layers=(("room",), ("tool", "body part"), ("cup", "plate", "fork", "hand")),
    parent_of={"tool": "room", "body part": "room", "cup": "tool", "plate": "tool",
               "fork": "tool", "hand": "body part"},
)
LEAF_CLASSES = ("cup", "plate", "fork", "hand", EMPTY)


def rand_box(rng: random.Random, grid=4) -> Box3:
    lo = [rng.randint(0, grid) * 0.5 for _ in range(3)]
    size = [rng.choice((0.5, 1.0, 1.5)) for _ in range(3)]
    return Box3.from_bounds(*[(lo[i], lo[i] + size[i]) for i in range(3)])


def rand_snapshot(rng: random.Random, max_objects=6, t=0) -> Snapshot:
    n = rng.randint(1, max_objects)
    return Snapshot(t, tuple(WorldObject(f"o{i}", rng.choice(LEAF_CLASSES), rand_box(rng))
                             for i in range(n)))


def rand_pattern(rng: random.Random) -> RelPattern:
    k = rng.random()
    if k < 0.4:
        return RelPattern.of(rng.choice(list(Direction)))
    if k < 0.6:
        return RelPattern.any()
    if k < 0.8:
        return RelPattern.exact(rand_rel3(rng))
    rels = list(IA)
    return RelPattern(tuple(frozenset(rng.sample(rels, rng.randint(1, 6))) for _ in range(3)))


def rand_spatial_term(rng: random.Random, ids=(), depth=3):
    labels = ("cup", "plate", "fork", "hand", EMPTY, "tool", "body part", "room", "vacancy")
    if depth == 0 or rng.random() < 0.25:
        return Atom(rng.choice(labels)) if rng.random() < 0.9 else BoolConst(rng.random() < 0.5)
    k = rng.choice(("not", "and", "or", "P", "C", "C", "N", "N"))
    sub = lambda: rand_spatial_term(rng, ids, depth - 1)  # noqa: E731

    def sel():
        r = rng.random()
        if r < 0.45:
            return EXISTS
        if r < 0.9 or not ids:
            return FORALL
        return tuple(rng.sample(list(ids), rng.randint(1, min(2, len(ids)))))

    if k == "not":
        return TNot(sub())
    if k == "and":
        return TAnd((sub(), sub()))
    if k == "or":
        return TOr((sub(), sub()))
    if k == "P":
        return Parent(sel(), sub())
    if k == "C":
        return Child(sel(), sub())
    return Neighbor(sel(), rand_pattern(rng), sub())


def _dist(a: Box3, b: Box3) -> float:
    gaps = [max(0.0, q.lo - p.hi, p.lo - q.hi) for p, q in zip(a.axes(), b.axes())]
    return math.sqrt(sum(g * g for g in gaps))


class Scene:
    """Hierarchy facts computed straight from the boxes of one snapshot.

    Box coordinates must be exact (grid) values. Category nodes are the
    ontology classes of present objects; two category nodes neighbor under
    every relation some pair of their members has.
    """

    def __init__(self, s: Snapshot, o: Ontology, d: float = 0.3):
        self.leaves = {w.id: w for w in s.objects}
        self.cat = {i: o.parent_of.get(w.cls, "vacancy") for i, w in self.leaves.items()}
        self.cats = sorted(set(self.cat.values()))
        self.root, self.d = o.root, d

    def layer(self, v):
        return 1 if v == self.root else 2 if v in self.cats else 3

    def label(self, v):
        return self.leaves[v].cls if v in self.leaves else v

    def parent(self, v):
        if v == self.root:
            return None
        return self.root if v in self.cats else self.cat[v]

    def kids(self, v):
        if v == self.root:
            return set(self.cats)
        if v in self.cats:
            return {i for i in self.leaves if self.cat[i] == v}
        return set()

    def rels(self, v, w):
        if v == w:
            return []
        if self.layer(v) == 3 and self.layer(w) == 3:
            b, bn = self.leaves[v].box, self.leaves[w].box
            if _dist(b, bn) > self.d:
                return []
            return [Rel3(*(allen_by_definition(x, y) for x, y in zip(bn.axes(), b.axes())))]
        if self.layer(v) == 2 and self.layer(w) == 2:
            return [r for cv in self.kids(v) for cw in self.kids(w) for r in self.rels(cv, cw)]
        return []

    def same_layer(self, v):
        if self.layer(v) == 3:
            return [w for w in self.leaves if w != v]
        if self.layer(v) == 2:
            return [c for c in self.cats if c != v]
        return []

    def atom(self, a) -> bool:
        """Truth of a label/adj/rel ground atom."""
        if a.kind == "label":
            return self.label(a.node) == a.value
        rs = self.rels(a.node, a.value)
        if a.kind == "adj":
            return bool(rs)
        return any(a.pattern.matches(r) for r in rs)

    def ev(self, v, t) -> bool:
        if isinstance(t, Atom):
            return self.label(v) == t.label
        if isinstance(t, BoolConst):
            return t.value
        if isinstance(t, TNot):
            return not self.ev(v, t.arg)
        if isinstance(t, TAnd):
            return all(self.ev(v, a) for a in t.args)
        if isinstance(t, TOr):
            return any(self.ev(v, a) for a in t.args)
        if isinstance(t, (Parent, Child)):
            related = ({self.parent(v)} - {None}) if isinstance(t, Parent) else self.kids(v)
            if t.sel == EXISTS:
                return any(self.ev(w, t.arg) for w in related)
            if t.sel == FORALL:
                return all(self.ev(w, t.arg) for w in related)
            return all(w in related and self.ev(w, t.arg) for w in t.sel)
        assert isinstance(t, Neighbor)
        nbrs = {w: self.rels(v, w) for w in self.same_layer(v)}
        nbrs = {w: rs for w, rs in nbrs.items() if rs}

        def hit(w):
            return any(t.pattern.matches(r) for r in nbrs.get(w, ())) and self.ev(w, t.arg)

        if t.sel == EXISTS:
            return any(hit(w) for w in nbrs)
        if t.sel == FORALL:
            return all(hit(w) for w in nbrs)
        return all(hit(w) for w in t.sel)


def scene_term_oracle(s: Snapshot, o: Ontology, tau, d: float = 0.3) -> bool:
    """Truth of ``tau`` at the scene root."""
    sc = Scene(s, o, d)
    return sc.ev(sc.root, tau)


def cnf_holds(clauses, truth) -> bool:
    """Whether a grounded CNF is satisfiable once its non-auxiliary atoms are
    fixed by ``truth``; remaining auxiliary atoms are enumerated."""
    residual = []
    for c in clauses:
        lits = []
        done = False
        for a, pol in c:
            if a.kind == "aux":
                lits.append((a, pol))
            elif truth(a) == pol:
                done = True
                break
        if done:
            continue
        if not lits:
            return False
        residual.append(lits)
    aux = sorted({a for c in residual for a, _ in c}, key=repr)
    if not aux:
        return True
    assert len(aux) <= 20, "too many auxiliary atoms for enumeration"
    idx = {a: i for i, a in enumerate(aux)}
    return sat_by_enumeration(len(aux), [[(idx[a], pol) for a, pol in c] for c in residual])


# ---------------------------------------------------------------- SAT / linear

def rand_cnf(rng: random.Random, n: int):
    m = rng.randint(1, int(4.3 * n) + 2)
    clauses = []
    for _ in range(m):
        k = rng.randint(1, min(3, n))
        vs = rng.sample(range(n), k)
        clauses.append([(v, rng.random() < 0.5) for v in vs])
    return clauses


def sat_by_enumeration(n: int, clauses) -> bool:
    """Evaluate the formula on all 2^n assignments at once: row j of the
    column for variable i is bit i of j."""
    idx = np.arange(1 << n, dtype=np.uint32)
    cols = [((idx >> i) & 1).astype(bool) for i in range(n)]
    acc = np.ones(1 << n, dtype=bool)
    for c in clauses:
        cl = np.zeros(1 << n, dtype=bool)
        for v, pol in c:
            cl |= cols[v] if pol else ~cols[v]
        acc &= cl
        if not acc.any():
            return False
    return bool(acc.any())


def rand_lin_problem(rng: random.Random):
    from gstl.constraint_solvers import LinAtom, LinProblem
    n = rng.randint(1, 5)
    horizon = min(50, int(round(150000 ** (1 / n))) - 1)
    names = [f"x{i}" for i in range(n)]
    clauses = []
    for _ in range(rng.randint(1, 6)):
        alts = []
        for _ in range(rng.randint(1, 3)):
            vs = rng.sample(names, rng.randint(1, min(3, n)))
            coeffs = {v: rng.choice((-2, -1, 1, 1, 2)) for v in vs}
            op = rng.choice(("<=", "<", "=", ">=", ">"))
            k = rng.randint(-horizon, 2 * horizon)
            alts.append(LinAtom.make(coeffs, op, k))
        clauses.append(alts)
    return LinProblem(clauses, horizon=horizon, extra_vars=tuple(names))


def lin_by_grid(p) -> bool:
    names = p.variables()
    bounds = p.var_bounds()
    axes = [np.arange(bounds[v][0], bounds[v][1] + 1) for v in names]
    grid = np.meshgrid(*axes, indexing="ij")
    col = {v: g.ravel() for v, g in zip(names, grid)}
    ok = np.ones(col[names[0]].shape, dtype=bool)
    for c in p.clauses:
        any_ = np.zeros_like(ok)
        for a in c:
            s = sum(coef * col[v] for v, coef in a.coeffs)
            any_ |= {"<=": s <= a.k, "<": s < a.k, "=": s == a.k,
                     ">=": s >= a.k, ">": s > a.k}[a.op]
        ok &= any_
    return bool(ok.any())


# ---------------------------------------------------------------- schedules

def schedule_exists(moves, deadline: int, horizon: int, hold: int = 1) -> bool:
    """Enumerate grasp times ``u`` and place times ``w`` of a sequential plan
    whose actions use pairwise distinct terms.

    Action ``k`` needs ``w_k >= u_k + m_k + 1``; its pre window must include
    ``u_k - 1`` so ``u_0 >= 1``; consecutive hand windows need a free frame
    pair between them, so ``u_{k+1} >= w_k + m_k + 1``; motions end by the
    deadline and post windows (which last ``max(hold, 1)`` frames past the
    motion) end by the horizon.
    """
    tail = max(hold, 1)

    @functools.lru_cache(maxsize=None)
    def place(k, earliest):
        if k == len(moves):
            return True
        m = moves[k]
        for u in range(earliest, horizon + 1):
            for w in range(u + m + 1, horizon + 1):
                if w + m > deadline or w + m + tail > horizon:
                    break
                if place(k + 1, w + m + 1):
                    return True
        return False

    return place(0, 1)


# ---------------------------------------------------------------- random traces for mining

def rand_trace(rng: random.Random, frames=6, objects=4) -> Trace:
    ids = [f"o{i}" for i in range(rng.randint(1, objects))]
    classes = {i: rng.choice(LEAF_CLASSES) for i in ids}
    boxes = {i: rand_box(rng, 3) for i in ids}
    out = []
    for t in range(frames):
        objs = []
        for i in ids:
            if rng.random() < 0.3:
                boxes[i] = rand_box(rng, 3)
            if rng.random() < 0.9:
                objs.append(WorldObject(i, classes[i], boxes[i]))
        out.append(Snapshot(t, tuple(objs)))
    return Trace(tuple(out), "dm", 1, "random")


def all_subsets(xs):
    return itertools.chain.from_iterable(itertools.combinations(xs, r) for r in range(len(xs) + 1))
