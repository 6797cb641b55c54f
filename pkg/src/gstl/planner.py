"""Planning-graph proposer: forward expansion with mutexes, backward extraction.

Terms are literals ``name`` or ``!name``; negative literals are produced by
delete effects so interference checks stay syntactic. Every term level
carries explicit no-op actions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .domain_theory import CompiledAction

__all__ = ["NoSolution", "PlanningExhausted", "Unsolvable", "Step", "Level", "PlanningGraph",
           "Plan", "neg", "expand", "goals_reachable", "extract", "plan", "simulate",
           "initial_graph"]


class NoSolution(Exception):
    pass


class PlanningExhausted(Exception):
    def __init__(self, max_levels: int):
        super().__init__(f"no plan within {max_levels} action levels")
        self.max_levels = max_levels


class Unsolvable(Exception):
    pass


def neg(lit: str) -> str:
    return lit[1:] if lit.startswith("!") else "!" + lit


@dataclass(frozen=True)
class Step:
    """An action-level entry: a real action or the no-op for one term."""

    name: str
    pre: frozenset
    effects: frozenset          # literals made true (adds plus negated deletes)
    noop: bool = False

    @classmethod
    def of(cls, a: CompiledAction) -> "Step":
        eff = frozenset(a.add) | frozenset(neg(d) for d in a.delete)
        return cls(a.name, frozenset(a.pre), eff)

    @classmethod
    def persist(cls, lit: str) -> "Step":
        return cls(f"noop({lit})", frozenset({lit}), frozenset({lit}), True)


def _pair(a, b) -> frozenset:
    return frozenset((a, b))


@dataclass
class Level:
    steps: list                  # Steps of this action level (sorted by name)
    terms: frozenset             # resulting term level
    action_mutex: set            # frozenset pairs of step names
    term_mutex: set              # frozenset pairs of literals
    supporters: dict             # literal -> list of step names


@dataclass
class PlanningGraph:
    initial: frozenset
    actions: list
    levels: list = field(default_factory=list)

    def terms(self, k: int) -> frozenset:
        return self.initial if k == 0 else self.levels[k - 1].terms

    def term_mutex(self, k: int) -> set:
        return set() if k == 0 else self.levels[k - 1].term_mutex

    @property
    def depth(self) -> int:
        return len(self.levels)


def initial_graph(initial: Iterable[str], actions: Sequence[CompiledAction]) -> PlanningGraph:
    return PlanningGraph(frozenset(initial), sorted(actions, key=lambda a: a.name))


def _interfere(a: Step, b: Step) -> bool:
    # an effect negates the other's effect or precondition
    for x, y in ((a, b), (b, a)):
        if any(neg(e) in y.effects or neg(e) in y.pre for e in x.effects):
            return True
    return False


def expand(g: PlanningGraph, actions: Sequence[CompiledAction] | None = None) -> PlanningGraph:
    """Append one action level and one term level (in place; returns ``g``)."""
    if actions is not None:
        g.actions = sorted(actions, key=lambda a: a.name)
    k = g.depth
    terms = g.terms(k)
    tmutex = g.term_mutex(k)

    def applicable(pre) -> bool:
        return pre <= terms and not any(_pair(p, q) in tmutex for p, q in combinations(sorted(pre), 2))

    steps = [Step.of(a) for a in g.actions if applicable(frozenset(a.pre))]
    steps += [Step.persist(t) for t in sorted(terms)]
    steps.sort(key=lambda s: s.name)

    amutex = set()
    for a, b in combinations(steps, 2):
        if _interfere(a, b) or any(_pair(p, q) in tmutex for p in a.pre for q in b.pre if p != q):
            amutex.add(_pair(a.name, b.name))

    supporters: dict[str, list[str]] = {}
    for s in steps:
        for e in s.effects:
            supporters.setdefault(e, []).append(s.name)
    new_terms = frozenset(supporters)

    new_tmutex = set()
    for p, q in combinations(sorted(new_terms), 2):
        if p == neg(q) or all(x != y and _pair(x, y) in amutex
                              for x in supporters[p] for y in supporters[q]):
            new_tmutex.add(_pair(p, q))
    g.levels.append(Level(steps, new_terms, amutex, new_tmutex, supporters))
    return g


def goals_reachable(g: PlanningGraph, goals: Iterable[str], k: int | None = None) -> bool:
    k = g.depth if k is None else k
    goals = sorted(set(goals))
    terms, tm = g.terms(k), g.term_mutex(k)
    return all(x in terms for x in goals) and not any(
        _pair(p, q) in tm for p, q in combinations(goals, 2))


@dataclass(frozen=True)
class Plan:
    levels: tuple   # tuple of tuples of action names (no-ops removed)

    @property
    def linear(self) -> tuple:
        return tuple(n for lvl in self.levels for n in sorted(lvl))

    def to_dict(self) -> dict:
        return {"levels": [sorted(lvl) for lvl in self.levels], "linear": list(self.linear)}


def extract(g: PlanningGraph, goals: Iterable[str], k: int | None = None) -> list[Plan]:
    """All plans found by backward search from level ``k`` (default: top).

    Each goal picks one supporter; chosen steps must be pairwise non-mutex;
    their preconditions, if not mutex among themselves, become the goals one
    level down. Plans are deduplicated by their real actions per level and
    returned sorted by linearization.
    """
    k = g.depth if k is None else k
    goals = frozenset(goals)
    if not goals_reachable(g, goals, k):
        raise NoSolution(f"goals not reachable without mutex at level {k}")
    nogood: set = set()
    results: set = set()

    def solve(level: int, gs: frozenset) -> set:
        if level == 0:
            return {()} if gs <= g.initial else set()
        if (level, gs) in nogood:
            return set()
        lv = g.levels[level - 1]
        by_name = {s.name: s for s in lv.steps}
        ordered = sorted(gs)
        found: set = set()

        def choose(i: int, chosen: tuple):
            if i == len(ordered):
                pre = frozenset().union(*(by_name[n].pre for n in chosen))
                tm = g.term_mutex(level - 1)
                if any(_pair(p, q) in tm for p, q in combinations(sorted(pre), 2)):
                    return
                real = tuple(sorted({n for n in chosen if not by_name[n].noop}))
                for below in solve(level - 1, pre):
                    found.add(below + (real,))
                return
            goal = ordered[i]
            already = [n for n in chosen if goal in by_name[n].effects]
            options = already or sorted(lv.supporters.get(goal, ()))
            for n in options:
                if n in chosen:
                    choose(i + 1, chosen)
                    continue
                if any(_pair(n, m) in lv.action_mutex for m in chosen):
                    continue
                choose(i + 1, chosen + (n,))

        choose(0, ())
        if not found:
            nogood.add((level, gs))
        return found

    for levels in solve(k, goals):
        results.add(levels)
    if not results:
        raise NoSolution(f"no plan extracted at level {k}")
    plans = {Plan(tuple(lv for lv in levels)) for levels in results}
    return _minimal(plans)


def _minimal(plans: set) -> list[Plan]:
    """Drop plans whose action multiset strictly contains another plan's, then sort."""
    def acts(p: Plan):
        return sorted(p.linear)
    keep = []
    for p in plans:
        ap = acts(p)
        dominated = any(q is not p and len(acts(q)) < len(ap) and _sub(acts(q), ap) for q in plans)
        if not dominated:
            keep.append(p)
    uniq = {}
    for p in keep:
        uniq.setdefault(p.linear, p)
    return sorted(uniq.values(), key=lambda p: (len(p.linear), p.linear))


def _sub(small, big) -> bool:
    big = list(big)
    for x in small:
        if x in big:
            big.remove(x)
        else:
            return False
    return True


def _signature(lv: Level) -> tuple:
    return (lv.terms, frozenset(lv.term_mutex))


def plan(initial: Iterable[str], goals: Iterable[str], actions: Sequence[CompiledAction],
         max_levels: int = 10) -> list[Plan]:
    """Alternate expansion and extraction until plans appear."""
    if max_levels < 1:
        raise ValueError("max_levels must be at least 1")
    goals = frozenset(goals)
    g = initial_graph(initial, actions)
    if goals <= g.initial:
        return [Plan(())]
    stable = 0
    for _ in range(max_levels):
        expand(g)
        if goals_reachable(g, goals):
            try:
                return extract(g, goals)
            except NoSolution:
                pass
        if g.depth >= 2 and _signature(g.levels[-1]) == _signature(g.levels[-2]):
            stable += 1
            # levelled off: further expansion can only help while nogoods still change;
            # with identical levels twice in a row and no plan, give up
            if not goals_reachable(g, goals) or stable >= 2:
                raise Unsolvable("planning graph levelled off without a plan")
        else:
            stable = 0
    raise PlanningExhausted(max_levels)


def simulate(initial: Iterable[str], p: Plan, actions: Sequence[CompiledAction]) -> frozenset:
    """STRIPS execution of a leveled plan (delete then add per action)."""
    by_name = {a.name: a for a in actions}
    state = set(initial)
    for lvl in p.levels:
        for n in sorted(lvl):
            a = by_name[n]
            if not set(a.pre) <= state:
                raise ValueError(f"{n} not applicable in {sorted(state)}")
        adds, dels = set(), set()
        for n in lvl:
            adds |= set(by_name[n].add)
            dels |= set(by_name[n].delete)
        state = (state - dels) | adds
    return frozenset(state)
