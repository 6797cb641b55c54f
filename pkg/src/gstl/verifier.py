"""Plan verification: temporal feasibility by linear constraints, spatial
feasibility by CNF satisfiability.

Every spatial term gets one truth window ``[lo[name], hi[name]]``. An action
``n`` with move time ``m`` is scheduled by three integers ``t0``, ``c``,
``d``; with ``u = t0 + c`` and ``w = t0 + d`` its windows are::

    pre   [t0, u + m]        overlap1 [u, u + m]
    hand  [u,  w + m]        overlap2 [w, w + m]
    post  [w,  w + m + eps]

Hand terms of consecutive actions are separated by before-gaps ``e``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

from .constraint_solvers import (
    INFEASIBLE, UNSAT, CnfProblem, LinAtom, LinProblem, lin_solve, sat_solve,
)
from .domain_theory import DomainTheory
from .gstl_core.grounding import GroundAtom, ground_term_cnf
from .gstl_core.parser import render_term
from .gstl_core.rewrite import rewrite_temporal
from .gstl_core.syntax import (
    EXISTS, FORALL, TRUE, Always, And, Atom, BoolConst, Child, Eventually, Formula, Neighbor,
    Not, Or, Param, Parent, Ref, SpatialTerm, TAnd, Term, TimeBound, TNot, TOr, Until, f_and,
)
from .gstl_core.semantics import resolve_refs
from .spatial_model import DEFAULT_EPS_DIST, HierGraph, Ontology, Snapshot, build_hierarchy

__all__ = [
    "UnknownAction", "UnreducedFormula", "VerifierConfig", "Counterexample", "ScheduledAction",
    "ExecutablePlan", "VerificationProblem", "linearize_plan", "build_problem",
    "compile_temporal", "solve_temporal", "ground_spatial", "verify", "check_schedule",
    "schedule_from_assignment", "schedule_from_dict", "attach_spatial_model",
    "theory_pair_satisfiable", "compile_formula",
]


class UnknownAction(KeyError):
    pass


class UnreducedFormula(ValueError):
    pass


@dataclass(frozen=True)
class VerifierConfig:
    epsilon: int = 1              # post-condition hold after the move
    default_move_time: int = 5
    eps_dist: float = DEFAULT_EPS_DIST


@dataclass(frozen=True)
class Counterexample:
    phase: str                    # "temporal" | "spatial"
    conflict: tuple

    def __post_init__(self):
        if not self.conflict:
            raise ValueError("counterexample needs a nonempty conflict set")

    def to_dict(self) -> dict:
        return {"infeasible": {"phase": self.phase, "conflict": list(self.conflict)}}


@dataclass(frozen=True)
class ScheduledAction:
    name: str
    t0: int
    c: int
    d: int
    move_time: int
    pre: tuple
    hand: tuple
    post: tuple
    overlap1: tuple
    overlap2: tuple

    def to_dict(self) -> dict:
        return {"name": self.name, "pre": list(self.pre), "hand": list(self.hand),
                "post": list(self.post), "overlap1": list(self.overlap1),
                "overlap2": list(self.overlap2)}


@dataclass
class ExecutablePlan:
    actions: list
    windows: dict                 # term name -> (lo, hi)
    gaps: list                    # [(e_odd, e_even), ...] between consecutive hand terms
    makespan: int
    assignment: dict = field(default_factory=dict)
    spatial_model: dict = field(default_factory=dict)   # GroundAtom -> bool

    def to_dict(self) -> dict:
        return {"actions": [a.to_dict() for a in self.actions], "makespan": self.makespan,
                "windows": {k: list(v) for k, v in sorted(self.windows.items())},
                "gaps": [list(g) for g in self.gaps]}


# ---------------------------------------------------------------- linear helpers

def _expr(*parts) -> dict:
    """Sum of variables / (var, coeff) pairs / integer constants as {var: c, 1: k}."""
    out: dict = {}
    for p in parts:
        if isinstance(p, int):
            out[1] = out.get(1, 0) + p
        elif isinstance(p, str):
            out[p] = out.get(p, 0) + 1
        elif isinstance(p, dict):
            for k, v in p.items():
                out[k] = out.get(k, 0) + v
        else:
            v, c = p
            out[v] = out.get(v, 0) + c
    return out


def _le(lhs, rhs, label: str, strict: bool = False) -> LinAtom:
    """``lhs <= rhs`` (or ``<``) for expressions built by :func:`_expr`."""
    diff = _expr(lhs, {k: -v for k, v in _expr(rhs).items()})
    k = -diff.pop(1, 0)
    coeffs = {v: c for v, c in diff.items() if c}
    if not coeffs:
        raise ValueError(f"constraint {label!r} has no variables")
    return LinAtom.make(coeffs, "<" if strict else "<=", k, label)


def lo_var(name: str) -> str:
    return f"lo[{name}]"


def hi_var(name: str) -> str:
    return f"hi[{name}]"


class _Builder:
    """Collects labelled clauses over term windows and schedule variables."""

    def __init__(self):
        self.clauses: list[list[LinAtom]] = []
        self.terms: dict[str, SpatialTerm | None] = {}
        self.negative_points: list = []   # (term, expr) where the term must be false
        self.positive_points: list = []

    def term(self, name: str, resolved: SpatialTerm | None = None) -> tuple[str, str]:
        if name not in self.terms:
            self.terms[name] = resolved
            self.add(_le(lo_var(name), hi_var(name), f"{name}: window well formed"))
        return lo_var(name), hi_var(name)

    def add(self, *alts: LinAtom):
        self.clauses.append(list(alts))

    def contains(self, name, lo, hi, why):
        a, b = self.term(name)
        self.add(_le(a, lo, f"{why}: lo[{name}] <= start"))
        self.add(_le(hi, b, f"{why}: end <= hi[{name}]"))

    def holds_at(self, name, t, why):
        self.contains(name, t, t, why)
        self.positive_points.append((name, t))

    def fails_at(self, name, t, why):
        a, b = self.term(name)
        self.add(_le(t, a, f"{why}: before window", strict=True),
                 _le(b, t, f"{why}: after window", strict=True))
        self.negative_points.append((name, t))


# ---------------------------------------------------------------- formulas

def linearize_plan(p, dt: DomainTheory) -> Formula:
    """Hand terms of the plan's actions chained by before-untils with gap parameters."""
    names = list(p.linear if hasattr(p, "linear") else p)
    for n in names:
        if n not in dt.actions:
            raise UnknownAction(n)
    hands = [Term(Ref(dt.actions[n].hand)) for n in names]
    if not hands:
        return TRUE
    parts = [Until("b", TimeBound(Param(f"e{2 * i + 1}"), Param(f"e{2 * i + 2}")),
                   hands[i], hands[i + 1]) for i in range(len(hands) - 1)]
    return f_and(*parts) if parts else hands[0]


def _term_name(b: _Builder, t: SpatialTerm, defs: Mapping) -> str:
    if isinstance(t, Ref):
        b.term(t.name, resolve_refs(t, defs))
        return t.name
    name = render_term(t)
    b.term(name, resolve_refs(t, defs))
    return name


def _end_expr(e):
    if isinstance(e, Param):
        return _expr(e.name, e.offset)
    return _expr(e)


def _split_conj(t: SpatialTerm) -> list:
    return list(t.args) if isinstance(t, TAnd) else [t]


def compile_formula(f: Formula, b: _Builder, defs: Mapping, label: str = "task"):
    """Add the clauses of a formula in the reduced fragment, evaluated at time 0.

    Accepted leaves after rewriting: ``tau``, ``!tau``, ``G[I] tau``,
    ``G[I] !tau`` and their negations. An Eventually over a conjunction of
    terms is encoded per conjunct (each conjunct's window must meet the
    interval), which is the deadline reading ``lo[s] <= D``.
    """
    f = _distribute_eventually(f)
    f = rewrite_temporal(f)
    tree = _nnf(f, True, b, defs, label)
    for clause in _cnf(tree):
        b.add(*clause)


def _distribute_eventually(f: Formula) -> Formula:
    if isinstance(f, Eventually) and isinstance(f.arg, Term) and isinstance(f.arg.term, TAnd):
        return f_and(*(Eventually(f.bound, Term(t)) for t in f.arg.term.args))
    if isinstance(f, And):
        return And(tuple(_distribute_eventually(a) for a in f.args))
    return f


def _nnf(f: Formula, pos: bool, b: _Builder, defs, label):
    if isinstance(f, Not):
        return _nnf(f.arg, not pos, b, defs, label)
    if isinstance(f, (And, Or)):
        kids = [_nnf(a, pos, b, defs, label) for a in f.args]
        conj = isinstance(f, And) == pos
        return ("and" if conj else "or", kids)
    if isinstance(f, Term):
        t = f.term
        if isinstance(t, BoolConst):
            return ("and", []) if t.value == pos else ("or", [])
        if isinstance(t, TNot):
            return _nnf(Term(t.arg), not pos, b, defs, label)
        name = _term_name(b, t, defs)
        lo, hi = lo_var(name), hi_var(name)
        if pos:
            b.positive_points.append((name, _expr(0)))
            return ("and", [("atom", _le(lo, 0, f"{label}: {name} at 0")),
                            ("atom", _le(0, hi, f"{label}: {name} at 0"))])
        b.negative_points.append((name, _expr(0)))
        return ("or", [("atom", _le(0, lo, f"{label}: not {name} at 0", True)),
                       ("atom", _le(hi, 0, f"{label}: not {name} at 0", True))])
    if isinstance(f, Always):
        if not isinstance(f.arg, Term):
            raise UnreducedFormula(f"nested temporal operator under G in {label}")
        t = f.arg.term
        negated = isinstance(t, TNot)
        if negated:
            t = t.arg
        if isinstance(t, BoolConst):
            return ("and", []) if (t.value != negated) == pos else ("or", [])
        name = _term_name(b, t, defs)
        lo, hi = lo_var(name), hi_var(name)
        s, e = _end_expr(f.bound.lo), _end_expr(f.bound.hi)
        tag = f"{label}: {'G!' if negated else 'G'}{name}"
        if not negated and pos:      # window contains [s, e]
            return ("and", [("atom", _le(lo, s, tag)), ("atom", _le(e, hi, tag))])
        if negated and pos:          # window misses [s, e]
            return ("or", [("atom", _le(e, lo, tag, True)), ("atom", _le(hi, s, tag, True))])
        if not negated:              # some frame of [s, e] outside the window
            return ("or", [("atom", _le(s, lo, tag, True)), ("atom", _le(hi, e, tag, True))])
        # some frame of [s, e] inside the window
        return ("and", [("atom", _le(lo, e, tag)), ("atom", _le(s, hi, tag))])
    raise UnreducedFormula(f"{type(f).__name__} left after rewriting in {label}")


def _cnf(tree) -> list[list[LinAtom]]:
    kind = tree[0]
    if kind == "atom":
        return [[tree[1]]]
    if kind == "and":
        out = []
        for k in tree[1]:
            out.extend(_cnf(k))
        return out
    acc = [[]]
    for k in tree[1]:
        sub = _cnf(k)
        acc = [c1 + c2 for c1 in acc for c2 in sub]
    return acc


# ---------------------------------------------------------------- problem

@dataclass
class VerificationProblem:
    plan: tuple
    dt: DomainTheory
    task: Formula | None
    horizon: int
    deadline: int | None
    config: VerifierConfig
    plan_formula: Formula = TRUE
    builder: _Builder = field(default_factory=_Builder)

    def move_time(self, name: str) -> int:
        m = self.dt.actions[name].move_time
        return self.config.default_move_time if m is None else m


def _task_deadline(task: Formula | None) -> int | None:
    if isinstance(task, Eventually) and isinstance(task.bound.hi, int):
        return task.bound.hi
    return None


def _encode_action(b: _Builder, dt: DomainTheory, name: str, m: int, eps: int):
    a = dt.actions[name]
    for t in (a.pre, a.hand, a.post):
        b.term(t, dt.resolved(t))
    # u = t0 + c and w = t0 + d are solved for directly so that every
    # constraint stays a difference constraint
    t0, uv, wv = f"t0[{name}]", f"u[{name}]", f"w[{name}]"
    u, w = _expr(uv), _expr(wv)
    tag = f"{name}"
    b.add(_le(t0, uv, f"{tag}: c >= 0"))
    b.add(_le(_expr(uv, m + 1), wv, f"{tag}: overlap windows disjoint"))
    b.contains(a.pre, t0, _expr(u, m), f"{tag}: pre holds")
    b.contains(a.hand, u, _expr(w, m), f"{tag}: hand holds")
    b.contains(a.post, w, _expr(w, m + eps), f"{tag}: post holds")
    # strict overlap boundaries of both untils
    b.holds_at(a.pre, _expr(u, -1), f"{tag}: pre before overlap1")
    b.fails_at(a.hand, _expr(u, -1), f"{tag}: hand absent before overlap1")
    b.fails_at(a.pre, _expr(u, m + 1), f"{tag}: pre released after overlap1")
    b.fails_at(a.post, _expr(w, -1), f"{tag}: post absent before overlap2")
    b.fails_at(a.hand, _expr(w, m + 1), f"{tag}: hand released after overlap2")
    b.holds_at(a.post, _expr(w, m + 1), f"{tag}: post after overlap2")
    return t0, uv, wv


def build_problem(plan, dt: DomainTheory, task: Formula | None, horizon: int,
                  deadline: int | None = None, config: VerifierConfig = VerifierConfig()
                  ) -> VerificationProblem:
    names = tuple(plan.linear if hasattr(plan, "linear") else plan)
    for n in names:
        if n not in dt.actions:
            raise UnknownAction(n)
    if len(set(names)) != len(names):
        raise ValueError("an action may occur once per plan (one truth window per term)")
    hands = [dt.actions[n].hand for n in names]
    if len(set(hands)) != len(hands):
        raise ValueError("plan actions must use distinct hand terms")
    if deadline is None:
        deadline = _task_deadline(task)
    return VerificationProblem(names, dt, task, horizon, deadline, config,
                               linearize_plan(names, dt))


def compile_temporal(p: VerificationProblem) -> LinProblem:
    b = _Builder()
    p.builder = b
    eps = p.config.epsilon
    for n in p.plan:
        m = p.move_time(n)
        _, _, w = _encode_action(b, p.dt, n, m, eps)
        if p.deadline is not None:
            b.add(_le(_expr(w, m), p.deadline, f"{n}: motion ends by deadline"))
    for i in range(len(p.plan) - 1):
        h1, h2 = p.dt.actions[p.plan[i]].hand, p.dt.actions[p.plan[i + 1]].hand
        e1, e2 = f"e{2 * i + 1}", f"e{2 * i + 2}"
        b.add(_le(hi_var(h1), e1, f"chain: hi[{h1}] <= {e1}"))
        b.add(_le(e1, e2, f"chain: {e1} < {e2}", strict=True))
        b.add(_le(e2, lo_var(h2), f"chain: {e2} <= lo[{h2}]"))
    if p.task is not None:
        compile_formula(p.task, b, p.dt.terms, "task")
    return LinProblem(b.clauses, horizon=p.horizon)


def _conflict(lp: LinProblem) -> tuple:
    """Deletion filter: a subset of clauses that is still infeasible."""
    keep = list(lp.clauses)
    i = 0
    while i < len(keep):
        trial = keep[:i] + keep[i + 1:]
        if lin_solve(LinProblem(trial, lp.horizon, lp.bounds, tuple(lp.variables()))) is INFEASIBLE:
            keep = trial
        else:
            i += 1
    labels = []
    for c in keep:
        labels.append(" | ".join(a.label or str(a) for a in c))
    return tuple(labels)


def solve_temporal(lp: LinProblem, terms: Sequence[str] | None = None, *, explain: bool = True):
    """Windows per term (and the full assignment) or a temporal Counterexample."""
    x = lin_solve(lp)
    if x is INFEASIBLE:
        conflict = _conflict(lp) if explain else ("infeasible",)
        return Counterexample("temporal", conflict or ("infeasible",))
    names = terms if terms is not None else sorted(
        {v[3:-1] for v in x if v.startswith("lo[")})
    return {n: (x[lo_var(n)], x[hi_var(n)]) for n in names}, x


# ---------------------------------------------------------------- spatial phase

def _consistency_clauses(atoms) -> list:
    """Exclusive relation patterns, pair symmetry, and rel => adj, per frame."""
    by_pair: dict = {}
    for a in atoms:
        if a.kind in ("rel", "adj"):
            by_pair.setdefault((a.node, a.value, a.t), []).append(a)
    atom_set = set(atoms)
    out = []
    for (v, w, t), group in by_pair.items():
        rels = [a for a in group if a.kind == "rel"]
        for a, b in combinations(rels, 2):
            if a.pattern.excludes(b.pattern):
                out.append(frozenset({(a, False), (b, False)}))
        adj = GroundAtom("adj", v, w, None, t)
        for a in rels:
            mirror = GroundAtom("rel", w, v, a.pattern.inverse(), t)
            if mirror in atom_set:
                out.append(frozenset({(a, False), (mirror, True)}))
                out.append(frozenset({(a, True), (mirror, False)}))
            if adj in atom_set:
                out.append(frozenset({(a, False), (adj, True)}))
        mirror_adj = GroundAtom("adj", w, v, None, t)
        if adj in atom_set and mirror_adj in atom_set:
            out.append(frozenset({(adj, False), (mirror_adj, True)}))
    return out


def _closed_labels(g: HierGraph) -> "_LabelOracle":
    return _LabelOracle(g)


class _LabelOracle(dict):
    """Maps any label atom to its truth in ``g``; other atoms stay free."""

    def __init__(self, g: HierGraph):
        super().__init__()
        self.g = g

    def __contains__(self, a) -> bool:
        return isinstance(a, GroundAtom) and a.kind == "label" and a.node in self.g.nodes

    def __getitem__(self, a) -> bool:
        return self.g.label(a.node) == a.value


@dataclass
class SpatialProblem:
    cnf: CnfProblem
    atoms: list
    groups: list        # (description, clause indices)


def ground_spatial(bounds: Mapping[str, tuple], snapshot: Snapshot, o: Ontology,
                   terms: Mapping[str, SpatialTerm], *, negative_points=(),
                   eps_dist: float = DEFAULT_EPS_DIST) -> SpatialProblem:
    """CNF requiring every term on every frame of its window.

    Labels are fixed by the snapshot (its objects are the grounding universe);
    neighbor atoms are free per frame. ``negative_points`` lists
    ``(term, t)`` pairs where the term must be false.
    """
    g = build_hierarchy(snapshot, o, eps_dist)
    fixed = _closed_labels(g)
    parts: list = []
    for name in sorted(bounds):
        lo, hi = bounds[name]
        for t in range(lo, hi + 1):
            cnf = ground_term_cnf(g, terms[name], t=t, assume=fixed, aux_prefix=f"{name}.")
            parts.append((f"{name}@{t}", cnf))
    for name, t in negative_points:
        cnf = ground_term_cnf(g, terms[name], t=t, negate=True, assume=fixed,
                              aux_prefix=f"!{name}.")
        parts.append((f"!{name}@{t}", cnf))
    clauses = []
    groups = []
    for desc, cnf in parts:
        start = len(clauses)
        clauses.extend(cnf.clauses)
        groups.append((desc, list(range(start, len(clauses)))))
    atoms = sorted({a for c in clauses for a, _ in c}, key=repr)
    cons = _consistency_clauses(atoms)
    start = len(clauses)
    clauses.extend(cons)
    groups.append(("consistency", list(range(start, len(clauses)))))
    index = {a: i for i, a in enumerate(atoms)}
    p = CnfProblem(len(atoms), [[(index[a], pol) for a, pol in c] for c in clauses],
                   names=[repr(a) for a in atoms])
    return SpatialProblem(p, atoms, groups)


def _spatial_conflict(sp: SpatialProblem) -> tuple:
    groups = [g for g in sp.groups if g[0] != "consistency"]
    base = next((g[1] for g in sp.groups if g[0] == "consistency"), [])

    def unsat(gs) -> bool:
        idx = sorted(set(base).union(*(set(g[1]) for g in gs)))
        p = CnfProblem(sp.cnf.n_vars, [sp.cnf.clauses[i] for i in idx])
        return sat_solve(p) is UNSAT

    for g in groups:
        if unsat([g]):
            return (g[0],)
    keep = list(groups)
    i = 0
    while i < len(keep):
        trial = keep[:i] + keep[i + 1:]
        if unsat(trial):
            keep = trial
        else:
            i += 1
    return tuple(g[0] for g in keep) or ("unsatisfiable",)


# ---------------------------------------------------------------- pipeline

def schedule_from_assignment(p: VerificationProblem, x: Mapping[str, int]) -> ExecutablePlan:
    eps = p.config.epsilon
    acts = []
    for n in p.plan:
        m = p.move_time(n)
        t0, u, w = x[f"t0[{n}]"], x[f"u[{n}]"], x[f"w[{n}]"]
        c, d = u - t0, w - t0
        acts.append(ScheduledAction(n, t0, c, d, m, (t0, u + m), (u, w + m), (w, w + m + eps),
                                    (u, u + m), (w, w + m)))
    windows = {name: (x[lo_var(name)], x[hi_var(name)]) for name in p.builder.terms}
    gaps = [(x[f"e{2 * i + 1}"], x[f"e{2 * i + 2}"]) for i in range(len(p.plan) - 1)]
    makespan = max((a.hand[1] for a in acts), default=0)
    return ExecutablePlan(acts, windows, gaps, makespan, dict(x))


def _resolved_terms(p: VerificationProblem) -> dict:
    return {n: t for n, t in p.builder.terms.items()}


def _points(p: VerificationProblem, x: Mapping[str, int]) -> list:
    out = []
    for name, e in p.builder.negative_points:
        t = sum(c * (1 if v == 1 else x[v]) for v, c in e.items())
        out.append((name, t))
    return sorted(set(out))


def attach_spatial_model(p: VerificationProblem, sched: ExecutablePlan, snapshot: Snapshot,
                         ontology: Ontology):
    """Solve the spatial phase for a schedule's windows and store the atom
    values on it; a spatial Counterexample if no assignment exists."""
    x = dict(sched.assignment)
    for a in sched.actions:
        x.setdefault(f"t0[{a.name}]", a.t0)
        x.setdefault(f"u[{a.name}]", a.t0 + a.c)
        x.setdefault(f"w[{a.name}]", a.t0 + a.d)
    if not p.builder.terms:
        compile_temporal(p)
    terms = _resolved_terms(p)
    bounds = {n: sched.windows[n] for n in terms if n in sched.windows}
    sp = ground_spatial(bounds, snapshot, ontology, terms,
                        negative_points=_points(p, x), eps_dist=p.config.eps_dist)
    model = sat_solve(sp.cnf)
    if model is UNSAT:
        return Counterexample("spatial", _spatial_conflict(sp))
    sched.spatial_model = {a: model[i] for i, a in enumerate(sp.atoms) if a.kind != "aux"}
    return sched


def schedule_from_dict(p: VerificationProblem, data: Mapping) -> ExecutablePlan:
    """Rebuild a schedule from its JSON form (``ExecutablePlan.to_dict``)."""
    acts = []
    for a in data["actions"]:
        m = p.move_time(a["name"])
        t0 = a["pre"][0]
        u, w = a["hand"][0], a["post"][0]
        acts.append(ScheduledAction(a["name"], t0, u - t0, w - t0, m, tuple(a["pre"]),
                                    tuple(a["hand"]), tuple(a["post"]),
                                    tuple(a.get("overlap1", (u, u + m))),
                                    tuple(a.get("overlap2", (w, w + m)))))
    windows = {k: tuple(v) for k, v in data.get("windows", {}).items()}
    gaps = [tuple(g) for g in data.get("gaps", ())]
    return ExecutablePlan(acts, windows, gaps, int(data["makespan"]))


def verify(plan, dt: DomainTheory, task: Formula | None, snapshot: Snapshot, ontology: Ontology,
           horizon: int, deadline: int | None = None,
           config: VerifierConfig = VerifierConfig()):
    """ExecutablePlan or Counterexample for an ordered plan."""
    p = build_problem(plan, dt, task, horizon, deadline, config)
    if p.deadline is not None and p.deadline < 0:
        return Counterexample("temporal", ("negative deadline",))
    lp = compile_temporal(p)
    res = solve_temporal(lp)
    if isinstance(res, Counterexample):
        return res
    sched = schedule_from_assignment(p, res[1])
    res = attach_spatial_model(p, sched, snapshot, ontology)
    if isinstance(res, Counterexample):
        return res
    problems = check_schedule(p, sched, snapshot, ontology)
    if problems:
        raise AssertionError(f"solver output rejected by checker: {problems[:5]}")
    return sched


def theory_pair_satisfiable(dt: DomainTheory, a: str, b: str, horizon: int,
                            config: VerifierConfig = VerifierConfig(),
                            snapshot: Snapshot | None = None, ontology: Ontology | None = None
                            ) -> bool:
    bld = _Builder()
    for name in dict.fromkeys((a, b)):
        if name in dt.actions:
            m = dt.actions[name].move_time
            _encode_action(bld, dt, name, config.default_move_time if m is None else m,
                           config.epsilon)
        else:
            compile_formula(dt.facts[name], bld, dt.terms, name)
    lp = LinProblem(bld.clauses, horizon=horizon)
    x = lin_solve(lp)
    if x is INFEASIBLE:
        return False
    if snapshot is None or ontology is None:
        return True
    bounds = {n: (x[lo_var(n)], x[hi_var(n)]) for n in bld.terms}
    pts = sorted({(n, sum(c * (1 if v == 1 else x[v]) for v, c in e.items()))
                  for n, e in bld.negative_points})
    sp = ground_spatial(bounds, snapshot, ontology, dict(bld.terms), negative_points=pts,
                        eps_dist=config.eps_dist)
    return sat_solve(sp.cnf) is not UNSAT


# ---------------------------------------------------------------- independent checker

def check_schedule(p: VerificationProblem, s: ExecutablePlan, snapshot: Snapshot | None = None,
                   ontology: Ontology | None = None) -> list[str]:
    """Re-derive every timing condition from the plan and theory and test the
    schedule against it with plain integer arithmetic; if a snapshot is given,
    re-evaluate each required term from the schedule's atom values.

    Returns the list of violated conditions (empty when the schedule is valid).
    """
    bad: list[str] = []
    W = s.windows
    H = p.horizon
    eps = p.config.epsilon

    def win(name):
        if name not in W:
            bad.append(f"no window for {name}")
            return None
        lo, hi = W[name]
        if not (0 <= lo <= hi <= H):
            bad.append(f"window of {name} = [{lo},{hi}] outside [0,{H}] or reversed")
        return lo, hi

    def inside(name, t):
        w = win(name)
        return w is not None and w[0] <= t <= w[1]

    def covers(name, lo, hi):
        w = win(name)
        return w is not None and w[0] <= lo and hi <= w[1]

    required_true: list = []
    required_false: list = []
    by_name = {a.name: a for a in s.actions}
    if [a.name for a in s.actions] != list(p.plan):
        bad.append("scheduled actions differ from the plan order")
    for n in p.plan:
        a = by_name.get(n)
        if a is None:
            continue
        spec = p.dt.actions[n]
        m = p.move_time(n)
        u, w = a.t0 + a.c, a.t0 + a.d
        if a.c < 0 or a.d < a.c + m + 1:
            bad.append(f"{n}: c={a.c}, d={a.d} violate 0 <= c, c+{m}+1 <= d")
        for lbl, (lo, hi) in (("pre", (a.t0, u + m)), ("hand", (u, w + m)),
                              ("post", (w, w + m + eps))):
            term = getattr(spec, lbl)
            if getattr(a, lbl) != (lo, hi):
                bad.append(f"{n}: {lbl} interval {getattr(a, lbl)} != {(lo, hi)}")
            if not covers(term, lo, hi):
                bad.append(f"{n}: {term} not true throughout [{lo},{hi}]")
            required_true.extend((term, t) for t in range(max(lo, 0), hi + 1))
        for term, t, want in ((spec.pre, u - 1, True), (spec.hand, u - 1, False),
                              (spec.pre, u + m + 1, False), (spec.post, w - 1, False),
                              (spec.hand, w + m + 1, False), (spec.post, w + m + 1, True)):
            if inside(term, t) != want:
                bad.append(f"{n}: {term} should be {'true' if want else 'false'} at {t}")
            (required_true if want else required_false).append((term, t))
        if p.deadline is not None and w + m > p.deadline:
            bad.append(f"{n}: motion ends at {w + m} after deadline {p.deadline}")
    if len(s.gaps) != max(len(p.plan) - 1, 0):
        bad.append("wrong number of gap pairs")
    for i, (e1, e2) in enumerate(s.gaps):
        h1 = p.dt.actions[p.plan[i]].hand
        h2 = p.dt.actions[p.plan[i + 1]].hand
        w1, w2 = win(h1), win(h2)
        if w1 is None or w2 is None:
            continue
        if not (w1[1] <= e1 < e2 <= w2[0]):
            bad.append(f"gap {i + 1}: need hi[{h1}]={w1[1]} <= {e1} < {e2} <= lo[{h2}]={w2[0]}")
        if not (0 <= e1 <= H and 0 <= e2 <= H):
            bad.append(f"gap {i + 1} outside horizon")
    if p.task is not None:
        bad.extend(_check_task(p.task, W, p.dt))
    if s.makespan != max((a.hand[1] for a in s.actions), default=0):
        bad.append("makespan does not match the schedule")
    if snapshot is not None and ontology is not None:
        bad.extend(_check_spatial(p, s, snapshot, ontology, required_true, required_false))
    return bad


def _check_task(task: Formula, W, dt) -> list[str]:
    """Deadline-style task check: each conjunct of F[a,b](...) meets [a,b]."""
    out = []

    def leaf_names(t):
        if isinstance(t, TAnd):
            return [n for x in t.args for n in leaf_names(x)]
        return [t.name if isinstance(t, Ref) else render_term(t)]

    fs = task.args if isinstance(task, And) else (task,)
    for f in fs:
        if isinstance(f, Eventually) and isinstance(f.arg, Term):
            a, b = f.bound.lo, f.bound.hi
            for n in leaf_names(f.arg.term):
                if n not in W:
                    out.append(f"task term {n} has no window")
                    continue
                lo, hi = W[n]
                if not (lo <= b and hi >= a):
                    out.append(f"task: {n} window [{lo},{hi}] misses [{a},{b}]")
        elif isinstance(f, Always) and isinstance(f.arg, Term):
            for n in leaf_names(f.arg.term):
                lo, hi = W.get(n, (1, 0))
                if not (lo <= f.bound.lo and f.bound.hi <= hi):
                    out.append(f"task: {n} not true on [{f.bound.lo},{f.bound.hi}]")
        else:
            out.append(f"task shape not checkable: {type(f).__name__}")
    return out


def _check_spatial(p, s, snapshot, ontology, required_true, required_false) -> list[str]:
    """Evaluate each required term directly from the schedule's atom values."""
    g = build_hierarchy(snapshot, ontology, p.config.eps_dist)
    model = {}
    for a, v in s.spatial_model.items():
        model[(a.kind, a.node, a.value, a.pattern, a.t)] = v
    out = []
    # the model must respect pattern exclusivity and symmetry
    rels: dict = {}
    for (kind, v, w, pat, t), val in model.items():
        if kind == "rel" and val:
            rels.setdefault((v, w, t), []).append(pat)
    for (v, w, t), pats in rels.items():
        for i in range(len(pats)):
            for j in range(i + 1, len(pats)):
                if any(not (x & y) for x, y in zip(pats[i].axes, pats[j].axes)):
                    out.append(f"model puts {w} in two exclusive relations to {v} at {t}")
    terms = {n: resolve_refs(Ref(n), p.dt.terms) if n in p.dt.terms else None for n in p.dt.terms}

    def rel_value(v, w, pat, t):
        return model.get(("rel", v, w, pat, t), False)

    def adj_value(v, w, t):
        if ("adj", v, w, None, t) in model:
            return model[("adj", v, w, None, t)]
        return any(val for (k, a, b, _, tt), val in model.items()
                   if k == "rel" and a == v and b == w and tt == t)

    def ev(v, tau, t) -> bool:
        if isinstance(tau, Atom):
            return g.nodes[v].label == tau.label
        if isinstance(tau, BoolConst):
            return tau.value
        if isinstance(tau, TNot):
            return not ev(v, tau.arg, t)
        if isinstance(tau, TAnd):
            return all(ev(v, x, t) for x in tau.args)
        if isinstance(tau, TOr):
            return any(ev(v, x, t) for x in tau.args)
        if isinstance(tau, (Parent, Child)):
            if isinstance(tau, Parent):
                rel = [g.parent_of[v]] if g.parent_of[v] is not None else []
            else:
                rel = list(g.children_of[v])
            if tau.sel == EXISTS:
                return any(ev(x, tau.arg, t) for x in rel)
            if tau.sel == FORALL:
                return all(ev(x, tau.arg, t) for x in rel)
            return all(x in rel and ev(x, tau.arg, t) for x in tau.sel)
        if isinstance(tau, Neighbor):
            same = [x for x in g.nodes if x != v and g.nodes[x].layer == g.nodes[v].layer]
            if tau.sel == EXISTS:
                return any(rel_value(v, x, tau.pattern, t) and ev(x, tau.arg, t) for x in same)
            if tau.sel == FORALL:
                return all(not adj_value(v, x, t) or (rel_value(v, x, tau.pattern, t)
                                                      and ev(x, tau.arg, t)) for x in same)
            return all(x in same and rel_value(v, x, tau.pattern, t) and ev(x, tau.arg, t)
                       for x in tau.sel)
        raise TypeError(tau)

    for name, t in sorted(set(required_true)):
        if terms.get(name) is not None and not ev(g.root, terms[name], t):
            out.append(f"{name} not satisfied by the spatial model at {t}")
    for name, t in sorted(set(required_false)):
        if terms.get(name) is not None and ev(g.root, terms[name], t):
            out.append(f"{name} should be false at {t} but the spatial model makes it true")
    return out
