"""Mining GSTL facts and until-chain action schemas from object traces.

Per frame, every template-shaped spatial term that holds is emitted. Runs of
identical term sets are merged, each term's maximal truth intervals become
``Always`` formulas, and hand episodes that overlap a before-state and an
after-state of the handled object become grounded actions. Grounded actions
sharing their three terms collapse into one parametric schema.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .interval_algebra import DEFAULT_EPS, IA, Interval1D, classify, direction_of
from .spatial_model import DEFAULT_EPS_DIST, EMPTY, Ontology, Snapshot, Trace, build_hierarchy
from .gstl_core.parser import render_term
from .gstl_core.syntax import (
    EXISTS, Always, And, Atom, Child, Formula, Neighbor, Param, Parent, RelPattern,
    SpatialTerm, TAnd, Term, TimeBound, Until,
)

__all__ = [
    "MinerConfig", "FrameTermSet", "AlwaysFormula", "GroundedAction", "ParametricAction",
    "pair_term", "parthood_term", "match_pair_term", "term_key", "mine_frame_terms",
    "merge_runs", "mine_always", "mine_actions", "parameterize", "mine", "mine_trace",
    "SCHEMA_PARAMS",
]


@dataclass(frozen=True)
class MinerConfig:
    d: float = DEFAULT_EPS_DIST          # connectivity threshold
    eps: float = DEFAULT_EPS             # endpoint tolerance for IA classification
    hand_atoms: tuple = ("hand",)
    gap: int = 0                         # absent frames tolerated inside one Always interval


# ---------------------------------------------------------------- term shapes

def _c2(inner: SpatialTerm) -> SpatialTerm:
    return Child(EXISTS, Child(EXISTS, inner))


def pair_term(x, pattern: RelPattern, y) -> SpatialTerm:
    """``C2E(x & NE<pattern> y)``; ``x``/``y`` are labels or spatial terms."""
    xt = Atom(x) if isinstance(x, str) else x
    yt = Atom(y) if isinstance(y, str) else y
    return _c2(TAnd((xt, Neighbor(EXISTS, pattern, yt))))


def parthood_term(category: str) -> SpatialTerm:
    return _c2(Parent(EXISTS, Atom(category)))


def match_pair_term(t: SpatialTerm):
    """``(x, pattern, y)`` when ``t`` is ``C2E(x & NE<p> y)`` over plain atoms."""
    if not (isinstance(t, Child) and t.sel == EXISTS and isinstance(t.arg, Child)
            and t.arg.sel == EXISTS and isinstance(t.arg.arg, TAnd)):
        return None
    args = t.arg.arg.args
    if len(args) != 2 or not isinstance(args[0], Atom) or not isinstance(args[1], Neighbor):
        return None
    nb = args[1]
    if nb.sel != EXISTS or not isinstance(nb.arg, Atom):
        return None
    return args[0].label, nb.pattern, nb.arg.label


def term_key(t: SpatialTerm) -> str:
    return render_term(t)


# ---------------------------------------------------------------- data

@dataclass(frozen=True)
class FrameTermSet:
    t: int
    terms: frozenset

    def ordered(self) -> list:
        return sorted(self.terms, key=term_key)


@dataclass(frozen=True)
class AlwaysFormula:
    term: SpatialTerm
    interval: tuple  # (a, b) inclusive frames

    def formula(self) -> Formula:
        return Always(TimeBound(*self.interval), Term(self.term))

    def __str__(self) -> str:
        return f"G[{self.interval[0]},{self.interval[1]}] {term_key(self.term)}"


def _intersect(a, b):
    lo, hi = max(a[0], b[0]), min(a[1], b[1])
    return (lo, hi) if lo <= hi else None


def _allen(a, b) -> IA:
    return classify(Interval1D(*a), Interval1D(*b), eps=0)


@dataclass(frozen=True)
class GroundedAction:
    pre: AlwaysFormula
    hand: AlwaysFormula
    post: AlwaysFormula
    overlap1: tuple
    overlap2: tuple
    source: str = ""

    @property
    def shape(self) -> tuple:
        return (self.pre.term, self.hand.term, self.post.term)

    def formula(self) -> Formula:
        """The chain as a formula evaluated at time 0 (bounds are absolute frames)."""
        pre, hand, post = (Term(x.term) for x in (self.pre, self.hand, self.post))
        return And((
            self.pre.formula(), self.hand.formula(), self.post.formula(),
            Until("o", TimeBound(*self.overlap1), pre, hand),
            Until("o", TimeBound(*self.overlap2), hand, post),
        ))

    def __str__(self) -> str:
        o1, o2 = self.overlap1, self.overlap2
        return f"{self.pre} Uo[{o1[0]},{o1[1]}] {self.hand} Uo[{o2[0]},{o2[1]}] {self.post}"


SCHEMA_PARAMS = ("t1", "t2", "t3", "t4", "t5", "t6", "a1", "b1", "a2", "b2")


@dataclass(frozen=True)
class ParametricAction:
    pre: SpatialTerm
    hand: SpatialTerm
    post: SpatialTerm
    provenance: tuple = field(default=(), compare=False)

    @property
    def shape(self) -> tuple:
        return (self.pre, self.hand, self.post)

    def formula(self) -> Formula:
        P = [Param(n) for n in SCHEMA_PARAMS]
        g = [Always(TimeBound(P[i], P[i + 1]), Term(x))
             for i, x in zip((0, 2, 4), (self.pre, self.hand, self.post))]
        return And((Until("o", TimeBound(P[6], P[7]), g[0], g[1]),
                    Until("o", TimeBound(P[8], P[9]), g[1], g[2])))


# ---------------------------------------------------------------- algorithm steps

def mine_frame_terms(s: Snapshot, o: Ontology, d: float = DEFAULT_EPS_DIST, *,
                     eps: float = DEFAULT_EPS, hand_atoms: Sequence[str] = ("hand",)) -> FrameTermSet:
    """All template-shaped terms holding in one snapshot.

    For every object: its parthood term. For every ordered neighboring pair
    ``(x, y)`` (both orientations) and every pattern describing their
    relation (the exact triple, the direction macro if one matches, and the
    wildcard when ``x`` is a hand): the four connectivity/parthood shapes.
    """
    g = build_hierarchy(s, o, d, eps)
    leaves = g.layers[-1] if g.layers else ()
    terms = set()
    depth = o.depth
    for x in leaves:
        px = g.parent_of[x]
        if depth >= 3:
            terms.add(parthood_term(px))
        lx = g.label(x)
        for y, r in g.neighbors_of[x]:
            ly, py = g.label(y), g.parent_of[y]
            pats = [RelPattern.exact(r)]
            macro = direction_of(r)
            if macro is not None:
                pats.append(RelPattern.of(macro))
            for p in pats:
                terms.add(pair_term(lx, p, ly))
                if depth >= 3:
                    terms.add(pair_term(lx, p, Parent(EXISTS, Atom(py))))
                    terms.add(pair_term(Parent(EXISTS, Atom(px)), p, Parent(EXISTS, Atom(py))))
            if lx in hand_atoms:
                terms.add(pair_term(lx, RelPattern.any(), ly))
                if depth >= 3:
                    terms.add(pair_term(lx, RelPattern.any(), Parent(EXISTS, Atom(py))))
    return FrameTermSet(s.t, frozenset(terms))


def merge_runs(framesets: Sequence[FrameTermSet]) -> list[tuple[int, int, frozenset]]:
    """Maximal runs of consecutive frames carrying identical term sets."""
    runs: list[tuple[int, int, frozenset]] = []
    for fs in framesets:
        if runs and runs[-1][2] == fs.terms and runs[-1][1] + 1 == fs.t:
            runs[-1] = (runs[-1][0], fs.t, fs.terms)
        else:
            runs.append((fs.t, fs.t, fs.terms))
    return runs


def mine_always(runs: Sequence[tuple[int, int, frozenset]], gap: int = 0) -> list[AlwaysFormula]:
    """One formula per maximal truth interval of each term.

    Intervals separated by at most ``gap`` missing frames are joined.
    """
    open_: dict[SpatialTerm, list[int]] = {}
    done: list[AlwaysFormula] = []
    for first, last, terms in runs:
        for term in terms:
            iv = open_.get(term)
            if iv is not None and first - iv[1] - 1 <= gap:
                iv[1] = last
                continue
            if iv is not None:
                done.append(AlwaysFormula(term, tuple(iv)))
            open_[term] = [first, last]
    done.extend(AlwaysFormula(t, tuple(iv)) for t, iv in open_.items())
    return sorted(done, key=lambda f: (f.interval, term_key(f.term)))


def _hand_object(t: SpatialTerm, hand_atoms) -> str | None:
    m = match_pair_term(t)
    if m and m[0] in hand_atoms and m[1].is_any and m[2] not in hand_atoms:
        return m[2]
    return None


def _object_term(t: SpatialTerm, hand_atoms):
    """``(x, macro, y)`` for a direction-macro term between two non-hand objects."""
    m = match_pair_term(t)
    if m and m[1].macro is not None and m[0] not in hand_atoms and m[2] not in hand_atoms:
        return m
    return None


def mine_actions(always: Sequence[AlwaysFormula], hand_atoms: Sequence[str] = ("hand",),
                 source: str = "") -> list[GroundedAction]:
    """Until chains ``pre Uo hand Uo post`` around each hand episode.

    The handled object ``o`` must be the subject of both ``pre`` and
    ``post``, or ``post`` must place ``o`` where ``pre`` had a vacancy
    (``x & N^dir empty`` becoming ``x & N^dir o``). Intervals must stand in
    strict Allen overlap, pre with hand and hand with post.
    """
    hands = [(f, _hand_object(f.term, hand_atoms)) for f in always]
    hands = [(f, o) for f, o in hands if o is not None]
    objs = [(f, _object_term(f.term, hand_atoms)) for f in always]
    objs = [(f, m) for f, m in objs if m is not None]
    out = []
    for h, o in hands:
        pres = [(f, m) for f, m in objs if _allen(f.interval, h.interval) == IA.O]
        posts = [(f, m) for f, m in objs if _allen(h.interval, f.interval) == IA.O]
        for pf, (px, pd, py) in pres:
            for qf, (qx, qd, qy) in posts:
                same_subject = px == o and qx == o
                vacancy = qy == o and py == EMPTY and px == qx and pd == qd
                if not (same_subject or vacancy):
                    continue
                out.append(GroundedAction(
                    pf, h, qf, _intersect(pf.interval, h.interval),
                    _intersect(h.interval, qf.interval), source))
    out.sort(key=lambda a: (a.hand.interval, term_key(a.pre.term), term_key(a.post.term)))
    return out


def parameterize(instances: Iterable[GroundedAction]) -> list[ParametricAction]:
    groups: dict[tuple, list[GroundedAction]] = {}
    for a in instances:
        groups.setdefault(a.shape, []).append(a)
    out = [ParametricAction(*shape, provenance=tuple(g)) for shape, g in groups.items()]
    out.sort(key=lambda p: tuple(term_key(t) for t in p.shape))
    return out


@dataclass
class TraceMining:
    framesets: list
    runs: list
    always: list
    actions: list


def mine_trace(trace: Trace, o: Ontology, cfg: MinerConfig = MinerConfig()) -> TraceMining:
    # scripted and real traces repeat scenes for long stretches
    seen: dict = {}
    fs = []
    for s in trace.frames:
        terms = seen.get(s.objects)
        if terms is None:
            terms = mine_frame_terms(s, o, cfg.d, eps=cfg.eps, hand_atoms=cfg.hand_atoms).terms
            seen[s.objects] = terms
        fs.append(FrameTermSet(s.t, terms))
    runs = merge_runs(fs)
    always = mine_always(runs, cfg.gap)
    actions = mine_actions(always, cfg.hand_atoms, trace.source)
    return TraceMining(fs, runs, always, actions)


def mine(traces: Sequence[Trace], o: Ontology, cfg: MinerConfig = MinerConfig()):
    """Full mining pass; returns a :class:`~gstl.domain_theory.DomainTheory`."""
    from .domain_theory import DomainTheory
    facts: list[AlwaysFormula] = []
    grounded: list[GroundedAction] = []
    for tr in traces:
        res = mine_trace(tr, o, cfg)
        facts.extend(res.always)
        grounded.extend(res.actions)
    return DomainTheory.from_mined(parameterize(grounded), facts)
