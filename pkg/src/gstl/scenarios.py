"""Scripted table-setting scenes rendered into traces.

Each scene is a set of piecewise-constant box tracks: an object keeps a box
from one key frame until the next, and ``None`` removes it from the scene.
Coordinates are in decimeters (x rightward, y backward, z upward); every
object is a unit cube except the hand and the declared empty slot. Relations
read neighbor-relative-to-node, so ``cup & N^top plate`` holds when the
plate sits directly above the cup.

Timelines
---------
``table-setting-v1`` (actions a1, a4, a3): the cup slides clear of the fork,
is lifted and tucked under the plate; the empty slot left of the fork is
then filled by the plate (carrying the cup); finally the spoon moves to the
left of the plate. ``table-setting-v2`` runs a3, a2, a1 from the same start.
The ``-j1``/``-j2`` variants stretch or shrink the idle gaps with a fixed
seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .interval_algebra import Box3
from .spatial_model import EMPTY, Ontology, Snapshot, Trace, WorldObject

__all__ = ["Scenario", "UnknownScenario", "SCENARIOS", "ontology", "synth", "trace_family",
           "initial_snapshot", "STORY_A_KEYS", "STORY_B_KEYS"]


class UnknownScenario(KeyError):
    pass


def box(x, y, z, dx=1.0, dy=1.0, dz=1.0) -> Box3:
    r = lambda v: round(v, 6)  # noqa: E731
    return Box3.from_bounds((r(x), r(x + dx)), (r(y), r(y + dy)), (r(z), r(z + dz)))


def hand_box(x, y, z) -> Box3:
    return box(x, y, z, 0.4, 0.4, 0.4)


SLOT = box(0.0, 0.1, 0.2, 1.0, 0.6, 0.7)   # vacancy left of the fork


def ontology() -> Ontology:
    return Ontology(
        layers=(("kitchen",), ("body part", "tool", "material"),
                ("hand", "head", "cup", "plate", "fork", "spoon", "bowl", "milk", "butter")),
        parent_of={"body part": "kitchen", "tool": "kitchen", "material": "kitchen",
                   "hand": "body part", "head": "body part", "cup": "tool", "plate": "tool",
                   "fork": "tool", "spoon": "tool", "bowl": "tool", "milk": "material",
                   "butter": "material"},
    )


@dataclass
class Scenario:
    name: str
    classes: dict                      # object id -> class
    tracks: dict                       # object id -> [(first frame, Box3 | None), ...]
    first: int = 1
    last: int = 1
    units: str = "dm"

    def __post_init__(self):
        for oid, tr in self.tracks.items():
            starts = [t for t, _ in tr]
            if starts != sorted(starts) or len(set(starts)) != len(starts):
                raise ValueError(f"track of {oid!r} has overlapping moves")

    def box_at(self, oid: str, t: int):
        cur = None
        for start, b in self.tracks[oid]:
            if start > t:
                break
            cur = b
        return cur

    def snapshot(self, t: int) -> Snapshot:
        objs = []
        for oid in sorted(self.tracks):
            b = self.box_at(oid, t)
            if b is not None:
                objs.append(WorldObject(oid, self.classes[oid], b))
        return Snapshot(t, tuple(objs))

    def render(self) -> Trace:
        frames = tuple(self.snapshot(t) for t in range(self.first, self.last + 1))
        return Trace(frames, self.units, 1, self.name)


CLASSES = {"cup": "cup", "plate": "plate", "fork": "fork", "spoon": "spoon",
           "hand": "hand", "slot": EMPTY}

CUP0, PLATE0, FORK0, SPOON0 = box(0, 0, 0), box(-0.3, 1.1, 0), box(1.1, 0, 0), box(2.2, 0, 0)

# grab/lift/place/release of each action, then the last frame
STORY_A_KEYS = {"g1": 75, "l1": 118, "p1": 126, "r1": 184,
                "g4": 274, "l4": 275, "p4": 340, "r4": 387,
                "g3": 458, "l3": 495, "p3": 535, "r3": 585, "end": 669}
STORY_B_KEYS = {"g3": 40, "l3": 60, "p3": 90, "r3": 110,
                "g2": 150, "l2": 170, "p2": 200, "r2": 220,
                "g1": 260, "l1": 280, "p1": 310, "r1": 330, "end": 400}


def story_a(k: dict, name: str) -> Scenario:
    # the cup slides left one frame after the grasp, breaking fork-left-of-cup
    # while the plate stays behind it
    tracks = {
        "cup": [(1, CUP0), (k["g1"] + 1, box(-0.5, 0, 0)), (k["l1"], box(-0.5, 0, 2)),
                (k["p1"], box(-0.4, 1.1, -1.25)), (k["l4"], box(-0.4, 1.1, 1.75)),
                (k["p4"], box(-0.1, 0, -1.25))],
        "plate": [(1, PLATE0), (k["l4"], box(-0.3, 1.1, 3)), (k["p4"], box(0, 0, 0))],
        "fork": [(1, FORK0)],
        "spoon": [(1, SPOON0), (k["l3"], box(-1.1, 0, 3)), (k["p3"], box(-1.1, 0, 0.1))],
        "slot": [(1, None), (k["l1"], SLOT), (k["p4"], None)],
        "hand": [(1, None),
                 (k["g1"], hand_box(0.3, 0.3, 1.1)), (k["g1"] + 1, hand_box(-0.2, 0.3, 1.1)),
                 (k["l1"], hand_box(-0.2, 0.3, 3.1)), (k["p1"], hand_box(-0.1, 1.4, -1.75)),
                 (k["r1"], None),
                 (k["g4"], hand_box(0, 1.4, 1.1)), (k["l4"], hand_box(0, 1.4, 4.1)),
                 (k["p4"], hand_box(0.3, 0.3, 1.1)), (k["r4"], None),
                 (k["g3"], hand_box(2.5, 0.3, 1.1)), (k["l3"], hand_box(-0.8, 0.3, 4.1)),
                 (k["p3"], hand_box(-0.8, 0.3, 1.2)), (k["r3"], None)],
    }
    return Scenario(name, CLASSES, _dedupe(tracks), 1, k["end"])


def story_b(k: dict, name: str) -> Scenario:
    tracks = {
        "cup": [(1, CUP0), (k["l1"], box(-0.4, 1.1, 2.5)), (k["p1"], box(-0.4, 1.1, -1.25))],
        "plate": [(1, PLATE0)],
        "fork": [(1, FORK0), (k["l2"], box(0.8, 1.6, 3)), (k["p2"], box(0.8, 1.6, 0))],
        "spoon": [(1, SPOON0), (k["l3"], box(-1.4, 1.1, 3)), (k["p3"], box(-1.4, 1.1, 0.1))],
        "hand": [(1, None),
                 (k["g3"], hand_box(2.5, 0.3, 1.1)), (k["l3"], hand_box(-1.1, 1.4, 4.1)),
                 (k["p3"], hand_box(-1.1, 1.4, 1.2)), (k["r3"], None),
                 (k["g2"], hand_box(1.4, 0.3, 1.1)), (k["l2"], hand_box(1.1, 1.9, 4.1)),
                 (k["p2"], hand_box(1.1, 1.9, 1.1)), (k["r2"], None),
                 (k["g1"], hand_box(0.3, 0.3, 1.1)), (k["l1"], hand_box(-0.1, 1.4, 3.6)),
                 (k["p1"], hand_box(-0.1, 1.4, -1.75)), (k["r1"], None)],
    }
    return Scenario(name, {k2: v for k2, v in CLASSES.items() if k2 != "slot"},
                    _dedupe(tracks), 1, k["end"])


def _dedupe(tracks: dict) -> dict:
    """Drop key frames that repeat the previous box."""
    out = {}
    for oid, tr in tracks.items():
        kept = []
        for t, b in tr:
            if kept and kept[-1][1] == b:
                continue
            kept.append((t, b))
        out[oid] = kept
    return out


def jitter(keys: dict, seed: int, spread: int = 6) -> dict:
    """Perturb every gap of at least 5 frames by up to ``spread``; one-frame
    steps are kept so the scripted overlaps keep their shape."""
    rng = random.Random(seed)
    names = sorted(keys, key=keys.get)
    out = {names[0]: keys[names[0]]}
    for a, b in zip(names, names[1:]):
        gap = keys[b] - keys[a]
        if gap >= 5:
            gap = max(3, gap + rng.randint(-spread, spread))
        out[b] = out[a] + gap
    return out


def initial_snapshot() -> Snapshot:
    """Starting scene for verification: the hand and the empty slot are
    present, far from everything, so every term's labels can be grounded."""
    return Snapshot(0, (
        WorldObject("cup", "cup", CUP0), WorldObject("plate", "plate", PLATE0),
        WorldObject("fork", "fork", FORK0), WorldObject("spoon", "spoon", SPOON0),
        WorldObject("hand", "hand", hand_box(10, 10, 10)),
        WorldObject("slot", EMPTY, box(-10, -10, 0)),
    ))


def _empty() -> Trace:
    return Trace((Snapshot(1, ()),), "dm", 1, "empty")


SCENARIOS = {
    "table-setting-v1": lambda: story_a(STORY_A_KEYS, "table-setting-v1").render(),
    "table-setting-v2": lambda: story_b(STORY_B_KEYS, "table-setting-v2").render(),
    "table-setting-v1-j1": lambda: story_a(jitter(STORY_A_KEYS, 11), "table-setting-v1-j1").render(),
    "table-setting-v2-j1": lambda: story_b(jitter(STORY_B_KEYS, 12), "table-setting-v2-j1").render(),
    "table-setting-v1-j2": lambda: story_a(jitter(STORY_A_KEYS, 21), "table-setting-v1-j2").render(),
    "table-setting-v2-j2": lambda: story_b(jitter(STORY_B_KEYS, 22), "table-setting-v2-j2").render(),
    "table-setting-init": lambda: Trace((initial_snapshot(),), "dm", 1, "table-setting-init"),
    "empty": _empty,
}

FAMILY = ("table-setting-v1", "table-setting-v2", "table-setting-v1-j1",
          "table-setting-v2-j1", "table-setting-v1-j2", "table-setting-v2-j2")


def synth(name: str) -> Trace:
    try:
        make = SCENARIOS[name]
    except KeyError:
        raise UnknownScenario(name) from None
    return make()


def trace_family() -> list[Trace]:
    """The six traces whose mining yields the four table-setting schemas."""
    return [synth(n) for n in FAMILY]
