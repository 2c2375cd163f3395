"""The graph of a striped atlas and its combinatorial invariants.

Vertices are strips and edges are seams; loops (self-gluings) and parallel
edges are ordinary.  Edge ``beta`` runs from ``tail`` = the strip holding
X_beta to ``head`` = the strip holding Y_beta, matching the attaching map
of the 1-cell I_beta = [-1, 1] (tail at -1, head at +1).
"""

from __future__ import annotations

import re
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Hashable, Iterable, Mapping, Optional, Sequence

from .atlas import ExpandedAtlas, require_valid, seams

MAX_ISO_VERTICES = 10
MAX_ISO_EDGES = 14


class GraphError(Exception):
    pass


class BadParameter(GraphError):
    pass


class TooLarge(GraphError):
    pass


def sort_key(x) -> tuple:
    """Total order on the mixed vertex/edge ids used in this package."""
    if isinstance(x, tuple):
        return (1, tuple(sort_key(y) for y in x))
    if isinstance(x, (int, Fraction)):
        return (0, 0, x, "")
    return (0, 1, 0, str(x))


@dataclass(frozen=True)
class Edge:
    id: Hashable
    tail: Hashable
    head: Hashable

    @property
    def is_loop(self) -> bool:
        return self.tail == self.head

    def endpoints(self, direction: int) -> tuple:
        return (self.tail, self.head) if direction > 0 else (self.head, self.tail)


@dataclass(frozen=True)
class SurfaceGraph:
    vertices: tuple
    edges: tuple[Edge, ...]

    def __post_init__(self):
        verts = tuple(sorted(set(self.vertices), key=sort_key))
        if len(verts) != len(tuple(self.vertices)):
            raise GraphError("duplicate vertex")
        vs = set(verts)
        ids = set()
        for e in self.edges:
            if e.tail not in vs or e.head not in vs:
                raise GraphError(f"edge {e.id!r} has an endpoint outside the graph")
            if e.id in ids:
                raise GraphError(f"duplicate edge id {e.id!r}")
            ids.add(e.id)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", tuple(self.edges))

    @classmethod
    def from_edges(cls, edges: Iterable[tuple], vertices: Iterable = ()) -> "SurfaceGraph":
        es = [Edge(*e) for e in edges]
        vs = set(vertices)
        for e in es:
            vs.update((e.tail, e.head))
        return cls(tuple(vs), tuple(es))

    @cached_property
    def edge(self) -> dict:
        return {e.id: e for e in self.edges}

    @cached_property
    def incidence(self) -> dict:
        """vertex -> sorted list of (edge id, direction) leaving that vertex."""
        out = defaultdict(list)
        for e in self.edges:
            out[e.tail].append((e.id, 1))
            out[e.head].append((e.id, -1))
        return {
            v: sorted(out.get(v, ()), key=lambda d: (sort_key(d[0]), d[1]))
            for v in self.vertices
        }

    def degree(self, v) -> int:
        return len(self.incidence[v])

    @property
    def euler_characteristic(self) -> int:
        return len(self.vertices) - len(self.edges)


def build_graph(expanded: ExpandedAtlas) -> SurfaceGraph:
    require_valid(expanded)
    edges = tuple(Edge(s.beta, s.alpha, s.alpha_prime) for s in seams(expanded))
    return SurfaceGraph(tuple(s.id for s in expanded.strips), edges)


# --------------------------------------------------------------------------
# invariants


@dataclass(frozen=True)
class Component:
    vertices: tuple
    edge_count: int

    @property
    def euler_characteristic(self) -> int:
        return len(self.vertices) - self.edge_count

    @property
    def rank(self) -> int:
        return self.edge_count - len(self.vertices) + 1


@dataclass(frozen=True)
class GraphInvariants:
    components: tuple[Component, ...]
    euler_characteristic: int

    @property
    def rank(self) -> int:
        return sum(c.rank for c in self.components)

    @property
    def ranks(self) -> list[int]:
        return [c.rank for c in self.components]

    def as_dict(self) -> dict:
        return {
            "components": [
                {"vertices": [str(v) for v in c.vertices], "edges": c.edge_count, "rank": c.rank}
                for c in self.components
            ],
            "euler_characteristic": self.euler_characteristic,
            "rank": self.rank,
        }


class _DSU:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def components(g: SurfaceGraph) -> list[tuple]:
    """Vertex sets of the connected components, deterministically ordered."""
    dsu = _DSU(g.vertices)
    for e in g.edges:
        dsu.union(e.tail, e.head)
    groups = defaultdict(list)
    for v in g.vertices:
        groups[dsu.find(v)].append(v)
    comps = [tuple(vs) for vs in groups.values()]
    comps.sort(key=lambda vs: sort_key(vs[0]))
    return comps


def graph_invariants(g: SurfaceGraph) -> GraphInvariants:
    comps = components(g)
    where = {v: i for i, vs in enumerate(comps) for v in vs}
    counts = Counter(where[e.tail] for e in g.edges)
    return GraphInvariants(
        tuple(Component(vs, counts.get(i, 0)) for i, vs in enumerate(comps)),
        g.euler_characteristic,
    )


# --------------------------------------------------------------------------
# subdivision


def subdivide(g: SurfaceGraph, marks: Mapping[Hashable, Sequence]) -> SurfaceGraph:
    """Cut each marked edge at the given parameters of I_beta = [-1, 1].

    The new vertex at parameter t of edge ``b`` is ``(b, t)``; the arcs of
    ``b`` are ``(b, 0), (b, 1), ...`` in increasing parameter order.
    Unmarked edges keep their id.
    """
    for eid in marks:
        if eid not in g.edge:
            raise BadParameter(f"unknown edge {eid!r}")
    vertices = list(g.vertices)
    edges = []
    for e in g.edges:
        ts = [Fraction(t) for t in marks.get(e.id, ())]
        if not ts:
            edges.append(e)
            continue
        if any(not -1 < t < 1 for t in ts):
            raise BadParameter(f"marks on {e.id!r} must lie in (-1, 1)")
        if any(a >= b for a, b in zip(ts, ts[1:])):
            raise BadParameter(f"marks on {e.id!r} must be strictly increasing")
        chain = [e.tail] + [(e.id, t) for t in ts] + [e.head]
        vertices.extend(chain[1:-1])
        for k, (a, b) in enumerate(zip(chain, chain[1:])):
            edges.append(Edge((e.id, k), a, b))
    return SurfaceGraph(tuple(vertices), tuple(edges))


# --------------------------------------------------------------------------
# orientability


def seam_sign(same_side: bool, reversed_: bool) -> int:
    """+1 when the gluing preserves a coherent orientation of the two strips."""
    return 1 if same_side == reversed_ else -1


def orientable(expanded: ExpandedAtlas) -> bool:
    """True iff every cycle of the graph has seam-sign product +1."""
    require_valid(expanded)
    g = build_graph(expanded)
    signs = {s.beta: seam_sign(s.epsilon == s.epsilon_prime, s.reversed) for s in seams(expanded)}
    return signed_two_coloring(g, signs) is not None


def signed_two_coloring(g: SurfaceGraph, signs: Mapping) -> Optional[dict]:
    color: dict = {}
    for root in g.vertices:
        if root in color:
            continue
        color[root] = 1
        stack = [root]
        while stack:
            v = stack.pop()
            for eid, d in g.incidence[v]:
                e = g.edge[eid]
                w = e.head if d > 0 else e.tail
                want = color[v] * signs[eid]
                if w not in color:
                    color[w] = want
                    stack.append(w)
                elif color[w] != want:
                    return None
    return color


# --------------------------------------------------------------------------
# isomorphism (brute force, small graphs only)


@dataclass(frozen=True)
class Isomorphism:
    vertex_map: dict
    edge_map: dict


def _multiplicities(g: SurfaceGraph) -> dict:
    out = defaultdict(list)
    for e in g.edges:
        out[frozenset((e.tail, e.head))].append(e.id)
    return out


def _guard(g: SurfaceGraph) -> None:
    if len(g.vertices) > MAX_ISO_VERTICES or len(g.edges) > MAX_ISO_EDGES:
        raise TooLarge(
            f"graph has {len(g.vertices)} vertices and {len(g.edges)} edges; "
            f"limit is {MAX_ISO_VERTICES} and {MAX_ISO_EDGES}"
        )


def _vertex_bijections(g1: SurfaceGraph, g2: SurfaceGraph):
    """Yield vertex bijections preserving edge multiplicities between pairs."""
    m1, m2 = _multiplicities(g1), _multiplicities(g2)

    def mult(m, a, b):
        return len(m.get(frozenset((a, b)), ()))

    order = sorted(g1.vertices, key=lambda v: (-g1.degree(v), sort_key(v)))
    targets = list(g2.vertices)
    assignment: dict = {}
    used: set = set()

    def extend(i):
        if i == len(order):
            yield dict(assignment)
            return
        v = order[i]
        for w in targets:
            if w in used or g1.degree(v) != g2.degree(w):
                continue
            if mult(m1, v, v) != mult(m2, w, w):
                continue
            if any(mult(m1, v, u) != mult(m2, w, assignment[u]) for u in order[:i]):
                continue
            assignment[v] = w
            used.add(w)
            yield from extend(i + 1)
            del assignment[v]
            used.discard(w)

    yield from extend(0)


def isomorphic(g1: SurfaceGraph, g2: SurfaceGraph) -> Optional[Isomorphism]:
    """A vertex/edge bijection preserving incidence, or None."""
    _guard(g1)
    _guard(g2)
    if len(g1.vertices) != len(g2.vertices) or len(g1.edges) != len(g2.edges):
        return None
    m2 = _multiplicities(g2)
    for vmap in _vertex_bijections(g1, g2):
        emap = {}
        for pair, ids in _multiplicities(g1).items():
            image = frozenset(vmap[v] for v in pair)
            emap.update(zip(ids, m2[image]))
        return Isomorphism(vmap, emap)
    return None


def automorphism_count(g: SurfaceGraph) -> int:
    """Number of incidence-preserving (vertex bijection, edge bijection) pairs."""
    _guard(g)
    per_vertex_map = 1
    for ids in _multiplicities(g).values():
        per_vertex_map *= _factorial(len(ids))
    return sum(per_vertex_map for _ in _vertex_bijections(g, g))


def _factorial(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


# --------------------------------------------------------------------------
# DOT export


_BARE_ID = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _dot_id(x) -> str:
    text = _label(x)
    if _BARE_ID.match(text):
        return text
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _label(x) -> str:
    if isinstance(x, tuple):
        return "(" + ", ".join(_label(y) for y in x) + ")"
    if isinstance(x, Fraction):
        return str(x)
    return str(x)


def to_dot(g: SurfaceGraph, name: str = "G") -> str:
    lines = [f"graph {_dot_id(name)} {{"]
    for v in g.vertices:
        lines.append(f"  {_dot_id(v)};")
    for e in sorted(g.edges, key=lambda e: sort_key(e.id)):
        lines.append(f"  {_dot_id(e.tail)} -- {_dot_id(e.head)} [label={_dot_id(e.id)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


__all__ = [
    "BadParameter",
    "Component",
    "Edge",
    "GraphError",
    "GraphInvariants",
    "Isomorphism",
    "SurfaceGraph",
    "TooLarge",
    "automorphism_count",
    "build_graph",
    "components",
    "graph_invariants",
    "isomorphic",
    "orientable",
    "seam_sign",
    "signed_two_coloring",
    "subdivide",
    "to_dot",
]
