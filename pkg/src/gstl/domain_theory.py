"""Domain theories: named spatial terms, facts and parametric action schemas.

A theory is stored in the ``.gstl`` text format::

    s1 := CE2 (cup & NE^back plate)
    f1 := G[1,117] s1
    action a1 { pre=s1, hand=a1h, post=s1_star, move_time=5 }

Definitions whose body is a spatial term are *terms*; other definitions are
*facts*. Action blocks may carry explicit ``add``/``del`` lists, which then
replace the derived effects.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .gstl_core.parser import ParseError, parse_definitions, render, render_term
from .gstl_core.syntax import Ref, SpatialTerm, Term, term_refs
from .gstl_core.semantics import resolve_refs
from .miner import AlwaysFormula, ParametricAction, match_pair_term, pair_term
from .spatial_model import EMPTY

__all__ = ["UnknownTerm", "ActionDef", "CompiledAction", "DomainTheory", "compile_action",
           "load", "save", "loads", "dumps", "check_consistency"]


class UnknownTerm(KeyError):
    pass


@dataclass(frozen=True)
class ActionDef:
    name: str
    pre: str
    hand: str
    post: str
    move_time: int | None = None
    add: tuple | None = None
    delete: tuple | None = None

    def __post_init__(self):
        for f in ("add", "delete"):
            v = getattr(self, f)
            if v is not None:
                object.__setattr__(self, f, tuple(v))


@dataclass(frozen=True)
class CompiledAction:
    name: str
    pre: frozenset
    add: frozenset
    delete: frozenset
    move_time: int | None = None
    hand: str | None = None
    post: str | None = None

    def __post_init__(self):
        if not self.pre:
            raise ValueError(f"action {self.name!r} has no precondition")
        if self.add & self.delete:
            raise ValueError(f"action {self.name!r} both adds and deletes "
                             f"{sorted(self.add & self.delete)}")


@dataclass
class DomainTheory:
    terms: dict = field(default_factory=dict)     # name -> SpatialTerm (may contain Refs)
    facts: dict = field(default_factory=dict)     # name -> Formula
    actions: dict = field(default_factory=dict)   # name -> ActionDef

    def __post_init__(self):
        self.validate()

    def validate(self):
        clash = (set(self.terms) & set(self.facts)) | (set(self.actions) & (set(self.terms) | set(self.facts)))
        if clash:
            raise ValueError(f"names defined twice: {sorted(clash)}")
        for a in self.actions.values():
            refs = [a.pre, a.hand, a.post, *(a.add or ()), *(a.delete or ())]
            for r in refs:
                if r not in self.terms:
                    raise UnknownTerm(f"action {a.name!r} references undefined term {r!r}")
        for name, t in self.terms.items():
            for r in term_refs(t):
                if r not in self.terms:
                    raise UnknownTerm(f"term {name!r} references undefined term {r!r}")

    # -- views
    @property
    def hand_terms(self) -> list[str]:
        return sorted({a.hand for a in self.actions.values()})

    def resolved(self, name: str) -> SpatialTerm:
        if name not in self.terms:
            raise UnknownTerm(name)
        return resolve_refs(self.terms[name], self.terms)

    def term_name(self, term: SpatialTerm) -> str | None:
        for n in self.terms:
            if self.resolved(n) == term:
                return n
        return None

    def schema(self, name: str) -> ParametricAction:
        a = self.actions[name]
        return ParametricAction(self.resolved(a.pre), self.resolved(a.hand), self.resolved(a.post))

    def compiled(self) -> list["CompiledAction"]:
        return [compile_action(self, n) for n in sorted(self.actions)]

    # -- construction
    @classmethod
    def from_mined(cls, schemas: Sequence[ParametricAction],
                   facts: Sequence[AlwaysFormula] = ()) -> "DomainTheory":
        """Name the terms used by ``schemas`` and keep the facts about them."""
        terms: dict[str, SpatialTerm] = {}
        by_term: dict[SpatialTerm, str] = {}

        def name_of(t: SpatialTerm, prefix: str) -> str:
            if t not in by_term:
                n = f"{prefix}{sum(1 for k in terms if k.startswith(prefix)) + 1}"
                by_term[t] = n
                terms[n] = t
            return by_term[t]

        actions = {}
        for i, sch in enumerate(schemas, start=1):
            pre, post = name_of(sch.pre, "s"), name_of(sch.post, "s")
            hand = name_of(sch.hand, "h")
            actions[f"a{i}"] = ActionDef(f"a{i}", pre, hand, post)
        fdefs = {}
        for f in facts:
            if f.term in by_term:
                fdefs[f"f{len(fdefs) + 1}"] = AlwaysFormula(Ref(by_term[f.term]), f.interval).formula()
        return cls(terms, fdefs, actions)


def _effects_for(dt: DomainTheory, a: ActionDef) -> tuple[set, set]:
    add, delete = {a.post}, {a.pre}
    hm = match_pair_term(dt.resolved(a.hand))
    if hm is None:
        return add, delete
    moved = hm[2]
    hands = set(dt.hand_terms)
    for name in sorted(dt.terms):
        if name in hands:
            continue
        m = match_pair_term(dt.resolved(name))
        if m is None or m[2] != moved or m[0] == moved:
            continue
        delete.add(name)
        vacancy = dt.term_name(pair_term(m[0], m[1], EMPTY))
        if vacancy is not None:
            add.add(vacancy)
    delete -= add
    return add, delete


def compile_action(dt: DomainTheory, name: str, annotation: Mapping | None = None) -> CompiledAction:
    """Precondition/add/delete form of an action.

    Without an annotation the effects are derived: the post term is added and
    the pre term deleted; every term ``x & N^dir o`` about the moved object
    ``o`` is deleted, and ``x & N^dir empty`` added when the theory names it.
    """
    if name not in dt.actions:
        raise UnknownTerm(f"no action {name!r}")
    a = dt.actions[name]
    ann = dict(annotation or {})
    add = ann.get("add", a.add)
    delete = ann.get("del", ann.get("delete", a.delete))
    for n in (*(add or ()), *(delete or ())):
        if n not in dt.terms:
            raise UnknownTerm(n)
    if add is None or delete is None:
        d_add, d_del = _effects_for(dt, a)
        add = d_add if add is None else add
        delete = d_del if delete is None else delete
    return CompiledAction(name, frozenset({a.pre}), frozenset(add), frozenset(delete),
                          a.move_time, a.hand, a.post)


# ---------------------------------------------------------------- text format

def loads(text: str) -> DomainTheory:
    defs, blocks = parse_definitions(text)
    terms, facts, actions = {}, {}, {}
    for name, f in defs.items():
        if isinstance(f, Term):
            terms[name] = f.term
        else:
            facts[name] = f
    for kw, name, fields, line in blocks:
        if kw != "action":
            raise ParseError(f"unknown block kind {kw!r}", line, 1, ["action"])
        if name in actions:
            raise ParseError(f"duplicate action {name!r}", line, 1)
        missing = {"pre", "hand", "post"} - set(fields)
        if missing:
            raise ParseError(f"action {name!r} lacks {sorted(missing)}", line, 1)
        unknown = set(fields) - {"pre", "hand", "post", "move_time", "add", "del"}
        if unknown:
            raise ParseError(f"action {name!r} has unknown fields {sorted(unknown)}", line, 1)
        mt = fields.get("move_time")
        if mt is not None and not isinstance(mt, int):
            raise ParseError(f"move_time of {name!r} must be an integer", line, 1)
        actions[name] = ActionDef(name, fields["pre"], fields["hand"], fields["post"], mt,
                                  fields.get("add"), fields.get("del"))
    try:
        return DomainTheory(terms, facts, actions)
    except UnknownTerm as exc:
        raise ParseError(str(exc)) from None


def dumps(dt: DomainTheory) -> str:
    lines = []
    if dt.terms:
        lines.append("# spatial terms")
        lines += [f"{n} := {render_term(t)}" for n, t in dt.terms.items()]
    if dt.facts:
        lines.append("# facts")
        lines += [f"{n} := {render(f)}" for n, f in dt.facts.items()]
    if dt.actions:
        lines.append("# actions")
    for a in dt.actions.values():
        fields = [f"pre={a.pre}", f"hand={a.hand}", f"post={a.post}"]
        if a.move_time is not None:
            fields.append(f"move_time={a.move_time}")
        if a.add is not None:
            fields.append("add=[" + ", ".join(a.add) + "]")
        if a.delete is not None:
            fields.append("del=[" + ", ".join(a.delete) + "]")
        lines.append(f"action {a.name} {{ " + ", ".join(fields) + " }")
    return "\n".join(lines) + "\n"


def load(path) -> DomainTheory:
    return loads(Path(path).read_text(encoding="utf-8"))


def save(dt: DomainTheory, path) -> None:
    Path(path).write_text(dumps(dt), encoding="utf-8")


def check_consistency(dt: DomainTheory, horizon: int, **kw):
    """Pairwise joint satisfiability of the theory's facts and action schemas.

    Returns ``(True, None)`` or ``(False, (name_i, name_j))`` for the first
    failing pair (a pair may repeat one name when a formula is unsatisfiable
    on its own).
    """
    from .verifier import theory_pair_satisfiable
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    items = sorted(dt.facts) + sorted(dt.actions)
    for i, a in enumerate(items):
        for b in items[i:]:
            if not theory_pair_satisfiable(dt, a, b, horizon, **kw):
                return False, (a, b)
    return True, None
