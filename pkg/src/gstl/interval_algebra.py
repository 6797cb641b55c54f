"""Allen interval algebra over 1D intervals and its axis-wise lift to 3D boxes."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

DEFAULT_EPS = 1e-6


class IA(str, Enum):
    """The 13 basic Allen relations, named by their usual tags."""

    B = "b"
    BI = "bi"
    M = "m"
    MI = "mi"
    O = "o"
    OI = "oi"
    S = "s"
    SI = "si"
    F = "f"
    FI = "fi"
    D = "d"
    DI = "di"
    E = "e"

    def __str__(self) -> str:
        return self.value


_INVERSE = {
    IA.B: IA.BI, IA.M: IA.MI, IA.O: IA.OI, IA.S: IA.SI,
    IA.F: IA.FI, IA.D: IA.DI, IA.E: IA.E,
}
_INVERSE.update({v: k for k, v in list(_INVERSE.items())})

ALL_RELATIONS = frozenset(IA)


def inverse(r: IA) -> IA:
    return _INVERSE[r]


@dataclass(frozen=True)
class Interval1D:
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"malformed interval [{self.lo}, {self.hi}]")


def classify(a: Interval1D, b: Interval1D, eps: float = DEFAULT_EPS) -> IA:
    """Relation of ``a`` with respect to ``b``.

    Endpoints closer than ``eps`` count as equal, and endpoint equalities are
    tested before any strict ordering so that the result is symmetric under
    swapping the arguments (up to ``inverse``).
    """
    if eps < 0:
        raise ValueError("eps must be non-negative")

    def eq(p, q):
        return abs(p - q) <= eps

    lo_eq, hi_eq = eq(a.lo, b.lo), eq(a.hi, b.hi)
    if lo_eq and hi_eq:
        return IA.E
    if lo_eq:
        return IA.S if a.hi < b.hi else IA.SI
    if hi_eq:
        return IA.F if a.lo > b.lo else IA.FI
    if eq(a.hi, b.lo):
        return IA.M
    if eq(a.lo, b.hi):
        return IA.MI
    if a.hi < b.lo:
        return IA.B
    if a.lo > b.hi:
        return IA.BI
    if a.lo < b.lo:
        return IA.O if a.hi < b.hi else IA.DI
    return IA.D if a.hi < b.hi else IA.OI


class Rel3(NamedTuple):
    x: IA
    y: IA
    z: IA

    def inverse(self) -> "Rel3":
        return Rel3(inverse(self.x), inverse(self.y), inverse(self.z))

    def __str__(self) -> str:
        return f"<{self.x},{self.y},{self.z}>"


@dataclass(frozen=True)
class Box3:
    x: Interval1D
    y: Interval1D
    z: Interval1D

    @classmethod
    def from_bounds(cls, x, y, z) -> "Box3":
        return cls(Interval1D(*x), Interval1D(*y), Interval1D(*z))

    def axes(self):
        return (self.x, self.y, self.z)

    def as_dict(self) -> dict:
        return {k: [iv.lo, iv.hi] for k, iv in zip("xyz", self.axes())}


def classify_neighbor(v: Box3, v_n: Box3, eps: float = DEFAULT_EPS) -> Rel3:
    """Per-axis relation of the neighbor ``v_n`` read from the node ``v``."""
    return Rel3(
        classify(v_n.x, v.x, eps),
        classify(v_n.y, v.y, eps),
        classify(v_n.z, v.z, eps),
    )


class Direction(str, Enum):
    LEFT = "left"
    RIGHT = "right"
    FRONT = "front"
    BACK = "back"
    TOP = "top"
    DOWN = "down"

    def __str__(self) -> str:
        return self.value


# x grows rightward, y grows backward, z grows upward
_BEFORE = frozenset({IA.B, IA.M})
_AFTER = frozenset({IA.BI, IA.MI})
_ALIGNED = frozenset({IA.D, IA.E, IA.O, IA.OI})

# (axis index, relation set on that axis); the two other axes must be aligned
_DIRECTION_AXIS = {
    Direction.LEFT: (0, _BEFORE),
    Direction.RIGHT: (0, _AFTER),
    Direction.FRONT: (1, _BEFORE),
    Direction.BACK: (1, _AFTER),
    Direction.DOWN: (2, _BEFORE),
    Direction.TOP: (2, _AFTER),
}

OPPOSITE = {
    Direction.LEFT: Direction.RIGHT, Direction.RIGHT: Direction.LEFT,
    Direction.FRONT: Direction.BACK, Direction.BACK: Direction.FRONT,
    Direction.TOP: Direction.DOWN, Direction.DOWN: Direction.TOP,
}


def direction_pattern(direction: Direction) -> tuple[frozenset, frozenset, frozenset]:
    """Per-axis relation sets that the macro ``direction`` abbreviates."""
    axis, rels = _DIRECTION_AXIS[Direction(direction)]
    return tuple(rels if i == axis else _ALIGNED for i in range(3))


def matches_direction(r: Rel3, direction: Direction) -> bool:
    return all(rel in allowed for rel, allowed in zip(r, direction_pattern(direction)))


def direction_of(r: Rel3) -> Direction | None:
    """The unique direction macro matched by ``r``, if any."""
    for d in Direction:
        if matches_direction(r, d):
            return d
    return None
