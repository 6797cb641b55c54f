"""Qualitative semantics of GSTL over hierarchical graphs and traces.

Time is discrete. Interval bounds are offsets relative to the evaluation
time, so ``G[a,b] phi`` at ``t`` checks every frame in ``[t+a, t+b]``.

The until kinds take their witnesses at the frames adjacent to the
interval: for ``phi Uo[a,b] psi`` the formula ``phi & !psi`` must hold at
``t+a-1`` and ``!phi & psi`` at ``t+b+1``. This is the discrete reading of
the closed witness windows; the two readings coincide once runs are maximal.
"""

from __future__ import annotations

from typing import Callable, Mapping

from ..spatial_model import (
    DEFAULT_EPS_DIST, HierGraph, Ontology, Trace, UnknownNode, build_hierarchy,
)
from ..interval_algebra import DEFAULT_EPS
from .syntax import (
    EXISTS, FORALL, Always, And, Atom, BoolConst, Child, Eventually, Formula, Neighbor, Not,
    Or, Parent, Ref, SpatialTerm, TAnd, Term, TimeBound, TNot, TOr, Until, params_of,
)

__all__ = ["OutOfTrace", "UnresolvedReference", "SymbolicFormula", "eval_term", "TraceModel",
           "eval_formula", "eval_signal", "Evaluator", "extent", "resolve_refs"]


class OutOfTrace(LookupError):
    """The formula needs frames outside the available trace."""


class UnresolvedReference(KeyError):
    pass


class SymbolicFormula(ValueError):
    """Evaluation requested on a formula that still has symbolic bounds."""


def _lookup(defs, name):
    if defs is None or name not in defs:
        raise UnresolvedReference(name)
    d = defs[name]
    if isinstance(d, Term):
        return d.term
    if isinstance(d, SpatialTerm):
        return d
    raise UnresolvedReference(f"{name} does not name a spatial term")


def resolve_refs(t: SpatialTerm, defs: Mapping) -> SpatialTerm:
    """Inline every :class:`Ref` using ``defs`` (cycles raise RecursionError)."""
    if isinstance(t, Ref):
        return resolve_refs(_lookup(defs, t.name), defs)
    if isinstance(t, TNot):
        return TNot(resolve_refs(t.arg, defs))
    if isinstance(t, (TAnd, TOr)):
        return type(t)(tuple(resolve_refs(a, defs) for a in t.args))
    if isinstance(t, (Parent, Child)):
        return type(t)(t.sel, resolve_refs(t.arg, defs))
    if isinstance(t, Neighbor):
        return Neighbor(t.sel, t.pattern, resolve_refs(t.arg, defs))
    return t


def eval_term(g: HierGraph, v: str, tau: SpatialTerm, defs: Mapping | None = None) -> bool:
    """Truth of the spatial term ``tau`` at node ``v`` of ``g``."""
    g.node(v)  # raises UnknownNode
    return _eval_term(g, v, tau, defs)


def _eval_term(g, v, tau, defs) -> bool:
    if isinstance(tau, Atom):
        return g.label(v) == tau.label
    if isinstance(tau, BoolConst):
        return tau.value
    if isinstance(tau, Ref):
        return _eval_term(g, v, _lookup(defs, tau.name), defs)
    if isinstance(tau, TNot):
        return not _eval_term(g, v, tau.arg, defs)
    if isinstance(tau, TAnd):
        return all(_eval_term(g, v, a, defs) for a in tau.args)
    if isinstance(tau, TOr):
        return any(_eval_term(g, v, a, defs) for a in tau.args)
    if isinstance(tau, (Parent, Child)):
        if isinstance(tau, Parent):
            p = g.parent_of.get(v)
            related = {p} if p is not None else set()
        else:
            related = set(g.children_of.get(v, ()))
        return _quantify(g, tau.sel, related, lambda w: _eval_term(g, w, tau.arg, defs))
    if isinstance(tau, Neighbor):
        matching = {w for w, r in g.neighbors_of.get(v, ()) if tau.pattern.matches(r)}
        if tau.sel == FORALL:
            # every neighbor must sit in the pattern and satisfy the operand
            every = {w for w, _ in g.neighbors_of.get(v, ())}
            return all(w in matching and _eval_term(g, w, tau.arg, defs) for w in every)
        return _quantify(g, tau.sel, matching, lambda w: _eval_term(g, w, tau.arg, defs))
    raise TypeError(f"not a spatial term: {tau!r}")


def _quantify(g, sel, related: set, test: Callable[[str], bool]) -> bool:
    if sel == EXISTS:
        return any(test(w) for w in sorted(related))
    if sel == FORALL:
        return all(test(w) for w in sorted(related))
    # explicit node set: every listed node must be related and satisfy the operand
    return all(w in related and test(w) for w in sel)


# ---------------------------------------------------------------- temporal layer

def _concrete(b: TimeBound) -> tuple[int, int]:
    if not b.concrete:
        raise SymbolicFormula(f"symbolic bound {b}")
    return b.lo, b.hi


def extent(f: Formula, horizon: int | None = None) -> tuple[int, int] | None:
    """Relative frame offsets ``(lo, hi)`` the formula reads, or None for m/s/f
    kinds without a horizon (their witness search is open-ended)."""
    if isinstance(f, Term):
        return 0, 0
    if isinstance(f, Not):
        return extent(f.arg, horizon)
    if isinstance(f, (And, Or)):
        spans = [extent(a, horizon) for a in f.args]
        if any(s is None for s in spans):
            return None
        return min(s[0] for s in spans), max(s[1] for s in spans)
    if isinstance(f, (Always, Eventually)):
        a, b = _concrete(f.bound)
        inner = extent(f.arg, horizon)
        return None if inner is None else (a + inner[0], b + inner[1])
    if isinstance(f, Until):
        spans = [extent(f.lhs, horizon), extent(f.rhs, horizon)]
        if any(s is None for s in spans):
            return None
        lo, hi = min(s[0] for s in spans), max(s[1] for s in spans)
        if f.bound is not None:
            a, b = _concrete(f.bound)
            return a - 1 + lo, b + 1 + hi
        if horizon is None:
            return None
        return lo, horizon + hi
    raise TypeError(f"not a formula: {f!r}")


class Evaluator:
    """Memoizing evaluator over an abstract point-wise term oracle.

    ``term_at(t, tau)`` gives the truth of a spatial term at frame ``t``;
    frames ``first..last`` are available. ``horizon`` bounds the witness
    search of the m/s/f until kinds (default: up to the last frame).
    """

    def __init__(self, term_at: Callable[[int, SpatialTerm], bool], first: int, last: int,
                 horizon: int | None = None):
        self.term_at = term_at
        self.first, self.last = first, last
        self.horizon = horizon
        self._memo: dict = {}

    def check_window(self, f: Formula, t: int):
        span = extent(f, self.horizon)
        if span is None:
            if t < self.first or t > self.last:
                raise OutOfTrace(f"frame {t} outside [{self.first},{self.last}]")
            return
        lo, hi = span
        if t + lo < self.first or t + hi > self.last:
            raise OutOfTrace(
                f"formula reads frames [{t + lo},{t + hi}] outside [{self.first},{self.last}]")

    def __call__(self, f: Formula, t: int) -> bool:
        key = (f, t)
        hit = self._memo.get(key)
        if hit is None:
            hit = self._memo[key] = self._eval(f, t)
        return hit

    def _all(self, f, lo, hi) -> bool:
        return all(self(f, k) for k in range(lo, hi + 1))

    def _eval(self, f: Formula, t: int) -> bool:
        if isinstance(f, Term):
            return self.term_at(t, f.term)
        if isinstance(f, Not):
            return not self(f.arg, t)
        if isinstance(f, And):
            return all(self(a, t) for a in f.args)
        if isinstance(f, Or):
            return any(self(a, t) for a in f.args)
        if isinstance(f, Always):
            a, b = _concrete(f.bound)
            return self._all(f.arg, t + a, t + b)
        if isinstance(f, Eventually):
            a, b = _concrete(f.bound)
            return any(self(f.arg, k) for k in range(t + a, t + b + 1))
        if isinstance(f, Until):
            return self._until(f, t)
        raise TypeError(f"not a formula: {f!r}")

    def _until(self, f: Until, t: int) -> bool:
        phi, psi = f.lhs, f.rhs

        def at(k, want_phi, want_psi):
            return self(phi, k) == want_phi and self(psi, k) == want_psi

        if f.bound is not None:
            a, b = _concrete(f.bound)
            lo, hi = t + a, t + b
            if f.kind == "b":
                inside = all(not self(phi, k) and not self(psi, k) for k in range(lo, hi + 1))
                return inside and at(lo - 1, True, False) and at(hi + 1, False, True)
            both = all(self(phi, k) and self(psi, k) for k in range(lo, hi + 1))
            if not both:
                return False
            if f.kind == "o":
                return at(lo - 1, True, False) and at(hi + 1, False, True)
            if f.kind == "d":
                return at(lo - 1, False, True) and at(hi + 1, False, True)
            return at(lo - 1, False, False) and at(hi + 1, False, False)  # eq

        H = self.last - t if self.horizon is None else self.horizon
        if f.kind == "m":
            return any(at(t + u - 1, True, False) and at(t + u, False, True)
                       for u in range(1, H + 1))
        # s / f: a maximal block of phi & psi strictly inside [t, t+H]
        start_mark = (False, False) if f.kind == "s" else (False, True)
        end_mark = (False, True) if f.kind == "s" else (False, False)
        for a in range(1, H):
            if not at(t + a - 1, *start_mark):
                continue
            for b in range(a, H):
                if not (self(phi, t + b) and self(psi, t + b)):
                    break
                if b > a and at(t + b + 1, *end_mark):
                    return True
        return False


class TraceModel:
    """A trace paired with an ontology; builds frame graphs on demand."""

    def __init__(self, trace: Trace, ontology: Ontology, eps_dist: float = DEFAULT_EPS_DIST,
                 eps: float = DEFAULT_EPS):
        self.trace, self.ontology = trace, ontology
        self.eps_dist, self.eps = eps_dist, eps
        self._graphs: dict[int, HierGraph] = {}

    def graph(self, t: int) -> HierGraph:
        g = self._graphs.get(t)
        if g is None:
            g = self._graphs[t] = build_hierarchy(self.trace.frame(t), self.ontology,
                                                  self.eps_dist, self.eps)
        return g


def eval_formula(trace, v: str | None, t: int, phi: Formula, *, ontology: Ontology | None = None,
                 defs: Mapping | None = None, horizon: int | None = None,
                 eps_dist: float = DEFAULT_EPS_DIST, eps: float = DEFAULT_EPS) -> bool:
    """Truth of ``phi`` at node ``v`` (default: root) and frame ``t``.

    ``trace`` is a :class:`TraceModel`, or a :class:`Trace` together with
    ``ontology``. Frames are addressed by their ``t`` index and must be
    contiguous over the window the formula reads.
    """
    if params_of(phi):
        raise SymbolicFormula("formula has symbolic bounds; substitute first")
    model = trace if isinstance(trace, TraceModel) else TraceModel(trace, ontology, eps_dist, eps)
    node = v if v is not None else model.ontology.root
    tr = model.trace

    def term_at(k: int, tau: SpatialTerm) -> bool:
        try:
            g = model.graph(k)
        except KeyError:
            raise OutOfTrace(f"no frame {k}") from None
        if node not in g.nodes:
            raise UnknownNode(node)
        return _eval_term(g, node, tau, defs)

    ev = Evaluator(term_at, tr.first_t, tr.last_t, horizon)
    ev.check_window(phi, t)
    return ev(phi, t)


def eval_signal(signals: Mapping[str, list], t: int, phi: Formula,
                horizon: int | None = None) -> bool:
    """Evaluate over Boolean signals indexed by atom label (frames 0..n-1).

    Only Boolean term structure is meaningful here; spatial operators raise.
    """
    n = len(next(iter(signals.values()))) if signals else 0

    def term_at(k, tau):
        if not 0 <= k < n:
            raise OutOfTrace(f"no frame {k}")
        return _bool_term(tau, signals, k)

    ev = Evaluator(term_at, 0, n - 1, horizon)
    ev.check_window(phi, t)
    return ev(phi, t)


def _bool_term(tau, signals, k) -> bool:
    if isinstance(tau, Atom):
        return bool(signals[tau.label][k])
    if isinstance(tau, BoolConst):
        return tau.value
    if isinstance(tau, TNot):
        return not _bool_term(tau.arg, signals, k)
    if isinstance(tau, TAnd):
        return all(_bool_term(a, signals, k) for a in tau.args)
    if isinstance(tau, TOr):
        return any(_bool_term(a, signals, k) for a in tau.args)
    raise TypeError(f"spatial operator {type(tau).__name__} needs a graph")
