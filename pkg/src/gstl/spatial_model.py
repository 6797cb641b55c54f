"""Ontologies, world snapshots and the per-frame hierarchical spatial graph."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .interval_algebra import DEFAULT_EPS, Box3, Rel3, classify_neighbor

EMPTY = "empty"
VACANCY_CATEGORY = "vacancy"
TRACE_FORMAT = "gstl-trace/1"
ONTOLOGY_FORMAT = "gstl-ontology/1"
DEFAULT_EPS_DIST = 0.3


class UnknownClass(KeyError):
    pass


class UnknownNode(KeyError):
    pass


class FormatError(ValueError):
    pass


@dataclass(frozen=True)
class Ontology:
    layers: tuple[tuple[str, ...], ...]
    parent_of: dict[str, str]

    def __post_init__(self):
        if len(self.layers) < 1 or len(self.layers[0]) != 1:
            raise ValueError("ontology needs exactly one layer-1 root class")
        layer_of = self.layer_of
        for child, parent in self.parent_of.items():
            if child not in layer_of or parent not in layer_of:
                raise ValueError(f"parent_of mentions undeclared class {child!r} or {parent!r}")
            if layer_of[parent] != layer_of[child] - 1:
                raise ValueError(f"{child!r} -> {parent!r} skips a layer")
        for k, layer in enumerate(self.layers[1:], start=2):
            for c in layer:
                if c not in self.parent_of:
                    raise ValueError(f"class {c!r} on layer {k} has no parent")

    @property
    def root(self) -> str:
        return self.layers[0][0]

    @property
    def layer_of(self) -> dict[str, int]:
        return {c: k for k, layer in enumerate(self.layers, start=1) for c in layer}

    @property
    def classes(self) -> frozenset[str]:
        return frozenset(c for layer in self.layers for c in layer)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def category_of(self, cls: str) -> str:
        """Parent class of a leaf class; ``empty`` falls back to a vacancy category."""
        if cls in self.parent_of:
            return self.parent_of[cls]
        if cls == EMPTY:
            return VACANCY_CATEGORY
        raise UnknownClass(cls)

    def ancestors(self, cls: str) -> list[str]:
        chain = []
        cur = cls
        while True:
            if cur in self.parent_of:
                cur = self.parent_of[cur]
            elif cur == EMPTY:
                cur = VACANCY_CATEGORY
            elif cur == VACANCY_CATEGORY and self.depth == 3:
                cur = self.root
            else:
                break
            chain.append(cur)
        return chain

    def order_key(self, cls: str) -> tuple[int, int, str]:
        """Declaration order of a class; ``empty`` sorts last."""
        layer_of = self.layer_of
        if cls in layer_of:
            k = layer_of[cls]
            return (0, self.layers[k - 1].index(cls), cls)
        return (1, 0, cls)

    @classmethod
    def from_dict(cls, data: dict) -> "Ontology":
        fmt = data.get("format", ONTOLOGY_FORMAT)
        if fmt != ONTOLOGY_FORMAT:
            raise FormatError(f"unsupported ontology format {fmt!r}")
        try:
            layers = tuple(tuple(layer) for layer in data["layers"])
            parent_of = dict(data["parent_of"])
        except (KeyError, TypeError) as exc:
            raise FormatError(f"malformed ontology: {exc}") from exc
        return cls(layers, parent_of)

    def to_dict(self) -> dict:
        return {
            "format": ONTOLOGY_FORMAT,
            "layers": [list(layer) for layer in self.layers],
            "parent_of": dict(sorted(self.parent_of.items())),
        }


@dataclass(frozen=True)
class WorldObject:
    id: str
    cls: str
    box: Box3


@dataclass(frozen=True)
class Snapshot:
    t: int
    objects: tuple[WorldObject, ...] = ()

    def __post_init__(self):
        ids = [o.id for o in self.objects]
        if len(ids) != len(set(ids)):
            raise ValueError(f"duplicate object ids in frame {self.t}")
        object.__setattr__(self, "objects", tuple(sorted(self.objects, key=lambda o: o.id)))


@dataclass(frozen=True)
class Trace:
    frames: tuple[Snapshot, ...]
    units: str = "m"
    fps: int = 1
    source: str = ""

    def __post_init__(self):
        ts = [f.t for f in self.frames]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("frame indices must be strictly increasing")

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def first_t(self) -> int:
        return self.frames[0].t

    @property
    def last_t(self) -> int:
        return self.frames[-1].t

    def frame(self, t: int) -> Snapshot:
        i = t - self.first_t
        if 0 <= i < len(self.frames) and self.frames[i].t == t:
            return self.frames[i]
        for f in self.frames:
            if f.t == t:
                return f
        raise KeyError(t)

    @classmethod
    def from_dict(cls, data: dict, source: str = "") -> "Trace":
        fmt = data.get("format", TRACE_FORMAT)
        if fmt != TRACE_FORMAT:
            raise FormatError(f"unsupported trace format {fmt!r}")
        try:
            frames = tuple(
                Snapshot(
                    int(fr["t"]),
                    tuple(
                        WorldObject(o["id"], o["class"], Box3.from_bounds(o["box"]["x"], o["box"]["y"], o["box"]["z"]))
                        for o in fr.get("objects", ())
                    ),
                )
                for fr in data["frames"]
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(f"malformed trace: {exc}") from exc
        return cls(frames, data.get("units", "m"), int(data.get("fps", 1)), source)

    def to_dict(self) -> dict:
        return {
            "format": TRACE_FORMAT,
            "units": self.units,
            "fps": self.fps,
            "frames": [
                {"t": f.t, "objects": [{"id": o.id, "class": o.cls, "box": o.box.as_dict()} for o in f.objects]}
                for f in self.frames
            ],
        }


def load_trace(path) -> Trace:
    path = Path(path)
    return Trace.from_dict(json.loads(path.read_text()), source=str(path))


def save_trace(trace: Trace, path) -> None:
    Path(path).write_text(json.dumps(trace.to_dict(), indent=1, sort_keys=True) + "\n")


def load_ontology(path) -> Ontology:
    return Ontology.from_dict(json.loads(Path(path).read_text()))


def save_ontology(o: Ontology, path) -> None:
    Path(path).write_text(json.dumps(o.to_dict(), indent=2) + "\n")


def min_distance(a: Box3, b: Box3) -> float:
    """Euclidean distance between the closest points of two boxes."""
    total = 0.0
    for ia, ib in zip(a.axes(), b.axes()):
        gap = max(0.0, ib.lo - ia.hi, ia.lo - ib.hi)
        total += gap * gap
    return math.sqrt(total)


@dataclass(frozen=True)
class Node:
    id: str
    layer: int
    label: str
    box: Box3 | None = None


@dataclass
class HierGraph:
    nodes: dict[str, Node]
    parent_of: dict[str, str | None]
    children_of: dict[str, tuple[str, ...]]
    neighbors_of: dict[str, tuple[tuple[str, Rel3], ...]]
    root: str
    layers: list[tuple[str, ...]] = field(default_factory=list)

    def node(self, v: str) -> Node:
        try:
            return self.nodes[v]
        except KeyError:
            raise UnknownNode(v) from None

    def label(self, v: str) -> str:
        return self.node(v).label

    def edge_count(self) -> int:
        return sum(1 for p in self.parent_of.values() if p is not None)


def neighbors(g: HierGraph, v: str) -> set[tuple[str, Rel3]]:
    g.node(v)
    return set(g.neighbors_of.get(v, ()))


def parent(g: HierGraph, v: str) -> str | None:
    g.node(v)
    return g.parent_of[v]


def children(g: HierGraph, v: str) -> set[str]:
    g.node(v)
    return set(g.children_of.get(v, ()))


def build_hierarchy(s: Snapshot, o: Ontology, eps_dist: float = DEFAULT_EPS_DIST,
                    eps: float = DEFAULT_EPS) -> HierGraph:
    """Hierarchical graph of one snapshot: root, category layers, one leaf per object."""
    if eps_dist <= 0:
        raise ValueError("eps_dist must be positive")
    nodes: dict[str, Node] = {}
    parent_of: dict[str, str | None] = {}
    kids: dict[str, set[str]] = {}
    depth = o.depth

    def add(node: Node, par: str | None):
        if node.id in nodes:
            if nodes[node.id] != node or parent_of[node.id] != par:
                raise ValueError(f"node id {node.id!r} used twice")
            return
        nodes[node.id] = node
        parent_of[node.id] = par
        kids.setdefault(node.id, set())
        if par is not None:
            kids[par].add(node.id)

    add(Node(o.root, 1, o.root), None)
    for obj in s.objects:
        if obj.cls not in o.classes and obj.cls != EMPTY:
            raise UnknownClass(obj.id)
        # [leaf class, layer L-1 class, ..., root]
        chain = [obj.cls] + o.ancestors(obj.cls)
        if len(chain) != depth or chain[-1] != o.root:
            raise ValueError(f"object {obj.id!r} of class {obj.cls!r} is not a leaf class")
        for layer in range(2, depth):
            cls = chain[depth - layer]
            par = chain[depth - layer + 1]
            add(Node(cls, layer, cls), par)
        if obj.id in nodes:
            raise ValueError(f"object id {obj.id!r} collides with a class node")
        add(Node(obj.id, depth, obj.cls, obj.box), chain[1] if depth > 1 else None)

    layers = [tuple(sorted(v for v, n in nodes.items() if n.layer == k)) for k in range(1, depth + 1)]

    nbrs: dict[str, set[tuple[str, Rel3]]] = {v: set() for v in nodes}
    leaves = layers[-1]
    for i, u in enumerate(leaves):
        for w in leaves[i + 1:]:
            bu, bw = nodes[u].box, nodes[w].box
            if min_distance(bu, bw) <= eps_dist:
                r = classify_neighbor(bu, bw, eps)
                nbrs[u].add((w, r))
                nbrs[w].add((u, r.inverse()))
    # lift leaf adjacency to every ancestor layer, one entry per neighboring child pair
    for k in range(depth - 1, 1, -1):
        for u in layers[k - 1]:
            for cu in kids[u]:
                for cw, r in nbrs[cu]:
                    w = parent_of[cw]
                    if w != u:
                        nbrs[u].add((w, r))

    return HierGraph(
        nodes=nodes,
        parent_of=parent_of,
        children_of={v: tuple(sorted(c)) for v, c in kids.items()},
        neighbors_of={v: tuple(sorted(n, key=lambda p: (p[0], tuple(p[1])))) for v, n in nbrs.items()},
        root=o.root,
        layers=layers,
    )
