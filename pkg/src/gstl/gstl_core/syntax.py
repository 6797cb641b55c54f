"""Abstract syntax for GSTL spatial terms and temporal formulas.

All nodes are frozen dataclasses, so formulas are hashable and compare
structurally. Boolean structure that contains no temporal operator is kept
inside a single :class:`Term`; the ``f_and``/``f_or``/``f_not`` helpers
maintain that normal form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from ..interval_algebra import ALL_RELATIONS, IA, Direction, Rel3, direction_pattern

__all__ = [
    "EXISTS", "FORALL", "Selector", "RelPattern", "SpatialTerm", "Atom", "Ref", "BoolConst",
    "TNot", "TAnd", "TOr", "Parent", "Child", "Neighbor", "Param", "Endpoint", "TimeBound",
    "Formula", "Term", "Not", "And", "Or", "Always", "Eventually", "Until", "UNTIL_KINDS",
    "BOUNDED_KINDS", "UNBOUNDED_KINDS", "f_and", "f_or", "f_not", "t_and", "t_or", "t_not",
    "TRUE", "FALSE", "term_atoms", "term_refs", "params_of", "is_concrete", "walk_terms",
]

EXISTS = "E"
FORALL = "A"
# selector: EXISTS, FORALL, or a sorted tuple of explicit node ids
Selector = Union[str, tuple]


def _selector(sel) -> Selector:
    if sel in (EXISTS, FORALL):
        return sel
    return tuple(sorted(set(sel)))


@dataclass(frozen=True)
class RelPattern:
    """Allowed relation set per axis, optionally named by a direction macro."""

    axes: tuple[frozenset, frozenset, frozenset]
    macro: Direction | None = None

    def __post_init__(self):
        if len(self.axes) != 3 or any(not a for a in self.axes):
            raise ValueError("relation pattern needs three non-empty axis sets")
        object.__setattr__(self, "axes", tuple(frozenset(IA(r) for r in a) for a in self.axes))

    @classmethod
    def of(cls, direction) -> "RelPattern":
        d = Direction(direction)
        return cls(direction_pattern(d), d)

    @classmethod
    def exact(cls, r: Rel3) -> "RelPattern":
        return cls(tuple(frozenset({a}) for a in r))

    @classmethod
    def any(cls) -> "RelPattern":
        return cls((ALL_RELATIONS,) * 3)

    @property
    def is_any(self) -> bool:
        return self.macro is None and all(a == ALL_RELATIONS for a in self.axes)

    def matches(self, r: Rel3) -> bool:
        return all(rel in allowed for rel, allowed in zip(r, self.axes))

    def excludes(self, other: "RelPattern") -> bool:
        """True when no Rel3 can satisfy both patterns."""
        return any(not (a & b) for a, b in zip(self.axes, other.axes))

    def inverse(self) -> "RelPattern":
        from ..interval_algebra import OPPOSITE, inverse
        macro = OPPOSITE[self.macro] if self.macro is not None else None
        return RelPattern(tuple(frozenset(inverse(r) for r in a) for a in self.axes), macro)


# ---------------------------------------------------------------- spatial terms

class SpatialTerm:
    __slots__ = ()


@dataclass(frozen=True)
class Atom(SpatialTerm):
    label: str


@dataclass(frozen=True)
class Ref(SpatialTerm):
    """Reference to a named definition (resolved against a definitions table)."""

    name: str


@dataclass(frozen=True)
class BoolConst(SpatialTerm):
    value: bool


@dataclass(frozen=True)
class TNot(SpatialTerm):
    arg: SpatialTerm


@dataclass(frozen=True)
class TAnd(SpatialTerm):
    args: tuple


@dataclass(frozen=True)
class TOr(SpatialTerm):
    args: tuple


@dataclass(frozen=True)
class Parent(SpatialTerm):
    sel: Selector
    arg: SpatialTerm

    def __post_init__(self):
        object.__setattr__(self, "sel", _selector(self.sel))


@dataclass(frozen=True)
class Child(SpatialTerm):
    sel: Selector
    arg: SpatialTerm

    def __post_init__(self):
        object.__setattr__(self, "sel", _selector(self.sel))


@dataclass(frozen=True)
class Neighbor(SpatialTerm):
    sel: Selector
    pattern: RelPattern
    arg: SpatialTerm

    def __post_init__(self):
        object.__setattr__(self, "sel", _selector(self.sel))


TRUE_T = BoolConst(True)
FALSE_T = BoolConst(False)


def t_not(a: SpatialTerm) -> SpatialTerm:
    return TNot(a)


def t_and(*args: SpatialTerm) -> SpatialTerm:
    flat = []
    for a in args:
        flat.extend(a.args if isinstance(a, TAnd) else (a,))
    return flat[0] if len(flat) == 1 else TAnd(tuple(flat))


def t_or(*args: SpatialTerm) -> SpatialTerm:
    flat = []
    for a in args:
        flat.extend(a.args if isinstance(a, TOr) else (a,))
    return flat[0] if len(flat) == 1 else TOr(tuple(flat))


def walk_terms(t: SpatialTerm):
    yield t
    if isinstance(t, TNot):
        yield from walk_terms(t.arg)
    elif isinstance(t, (TAnd, TOr)):
        for a in t.args:
            yield from walk_terms(a)
    elif isinstance(t, (Parent, Child, Neighbor)):
        yield from walk_terms(t.arg)


def term_atoms(t: SpatialTerm) -> list[str]:
    return [n.label for n in walk_terms(t) if isinstance(n, Atom)]


def term_refs(t: SpatialTerm) -> list[str]:
    return [n.name for n in walk_terms(t) if isinstance(n, Ref)]


# ---------------------------------------------------------------- time bounds

@dataclass(frozen=True)
class Param:
    """Symbolic time parameter plus a constant offset (``?a-1``)."""

    name: str
    offset: int = 0

    def __add__(self, k: int) -> "Param":
        return Param(self.name, self.offset + k)

    def __sub__(self, k: int) -> "Param":
        return Param(self.name, self.offset - k)


Endpoint = Union[int, Param]


def _shift(e: Endpoint, k: int) -> Endpoint:
    return e + k


@dataclass(frozen=True)
class TimeBound:
    lo: Endpoint
    hi: Endpoint

    def __post_init__(self):
        if isinstance(self.lo, int) and isinstance(self.hi, int) and self.lo > self.hi:
            raise ValueError(f"time bound [{self.lo},{self.hi}] has lo > hi")

    @property
    def concrete(self) -> bool:
        return isinstance(self.lo, int) and isinstance(self.hi, int)

    def params(self) -> set[str]:
        return {e.name for e in (self.lo, self.hi) if isinstance(e, Param)}

    def shifted(self, k: int) -> "TimeBound":
        return TimeBound(_shift(self.lo, k), _shift(self.hi, k))


def point(e: Endpoint) -> TimeBound:
    return TimeBound(e, e)


# ---------------------------------------------------------------- formulas

class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Term(Formula):
    term: SpatialTerm


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    args: tuple


@dataclass(frozen=True)
class Or(Formula):
    args: tuple


@dataclass(frozen=True)
class Always(Formula):
    bound: TimeBound
    arg: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    bound: TimeBound
    arg: Formula


BOUNDED_KINDS = ("b", "o", "d", "eq")
UNBOUNDED_KINDS = ("m", "s", "f")
UNTIL_KINDS = BOUNDED_KINDS + UNBOUNDED_KINDS
_INVERSE_KINDS = {"bi": "b", "oi": "o", "di": "d", "mi": "m", "si": "s", "fi": "f"}


@dataclass(frozen=True)
class Until(Formula):
    """``lhs`` until ``rhs`` under an Allen relation ``kind``.

    Inverse kinds (``oi`` etc.) are rewritten on construction by swapping the
    operands; ``bound`` is ``None`` exactly for the m/s/f kinds.
    """

    kind: str
    bound: TimeBound | None
    lhs: Formula
    rhs: Formula

    def __post_init__(self):
        kind = "eq" if self.kind in ("e", "eqi") else self.kind
        if kind in _INVERSE_KINDS:
            lhs, rhs = self.rhs, self.lhs
            object.__setattr__(self, "lhs", lhs)
            object.__setattr__(self, "rhs", rhs)
            kind = _INVERSE_KINDS[kind]
        if kind not in UNTIL_KINDS:
            raise ValueError(f"unknown until kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind in UNBOUNDED_KINDS and self.bound is not None:
            raise ValueError(f"until kind {kind!r} takes no interval")
        if kind in BOUNDED_KINDS and self.bound is None:
            raise ValueError(f"until kind {kind!r} needs an interval")


TRUE = Term(TRUE_T)
FALSE = Term(FALSE_T)


def f_not(a: Formula) -> Formula:
    if isinstance(a, Term):
        if isinstance(a.term, BoolConst):
            return Term(BoolConst(not a.term.value))
        return Term(TNot(a.term))
    return Not(a)


def _flatten(args, cls):
    out = []
    for a in args:
        out.extend(a.args if isinstance(a, cls) else (a,))
    return out


def f_and(*args: Formula) -> Formula:
    flat = _flatten(args, And)
    if not flat:
        return TRUE
    if all(isinstance(a, Term) for a in flat):
        return Term(t_and(*(a.term for a in flat)))
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def f_or(*args: Formula) -> Formula:
    flat = _flatten(args, Or)
    if not flat:
        return FALSE
    if all(isinstance(a, Term) for a in flat):
        return Term(t_or(*(a.term for a in flat)))
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def walk(f: Formula):
    yield f
    if isinstance(f, Not):
        yield from walk(f.arg)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            yield from walk(a)
    elif isinstance(f, (Always, Eventually)):
        yield from walk(f.arg)
    elif isinstance(f, Until):
        yield from walk(f.lhs)
        yield from walk(f.rhs)


def params_of(f: Formula) -> set[str]:
    out: set[str] = set()
    for n in walk(f):
        b = getattr(n, "bound", None)
        if b is not None:
            out |= b.params()
    return out


def is_concrete(f: Formula) -> bool:
    return not params_of(f)
