"""Free groupoids on graphs.

A morphism of the fundamental groupoid of a graph is represented by its
unique reduced edge-word: a walk with no letter immediately followed by its
inverse.  Equality of morphisms is therefore equality of reduced words.
"""

from __future__ import annotations

import random
from bisect import bisect_right
from itertools import accumulate
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Iterator, Mapping, Optional, Sequence

from .graph import SurfaceGraph, components, sort_key

Letter = tuple  # (edge id, +1 | -1)


class GroupoidError(Exception):
    pass


class MalformedWord(GroupoidError):
    pass


class EndpointMismatch(GroupoidError):
    pass


class BasepointsMissComponent(GroupoidError):
    pass


class IdCollision(GroupoidError):
    pass


class IllFormedMap(GroupoidError):
    pass


@dataclass(frozen=True)
class EdgeWord:
    graph: SurfaceGraph = field(compare=False, repr=False)
    start: Hashable
    end: Hashable
    letters: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(self.letters))
        v = self.start
        if v not in self.graph.incidence:
            raise MalformedWord(f"{v!r} is not a vertex")
        for k, (eid, d) in enumerate(self.letters):
            e = self.graph.edge.get(eid)
            if e is None or d not in (1, -1):
                raise MalformedWord(f"letter {k} ({eid!r}, {d!r}) is not a directed edge")
            a, b = e.endpoints(d)
            if a != v:
                raise MalformedWord(f"letter {k} leaves {a!r} but the walk is at {v!r}")
            v = b
        if v != self.end:
            raise MalformedWord(f"walk ends at {v!r}, not {self.end!r}")

    @classmethod
    def _trusted(cls, graph: SurfaceGraph, start, end, letters: tuple) -> "EdgeWord":
        # skips validation; only for walks that are valid by construction
        w = object.__new__(cls)
        object.__setattr__(w, "graph", graph)
        object.__setattr__(w, "start", start)
        object.__setattr__(w, "end", end)
        object.__setattr__(w, "letters", letters)
        return w

    @classmethod
    def walk(cls, graph: SurfaceGraph, start, letters: Iterable[Letter]) -> "EdgeWord":
        letters = tuple(letters)
        v = start
        for eid, d in letters:
            e = graph.edge.get(eid)
            if e is None:
                raise MalformedWord(f"unknown edge {eid!r}")
            a, b = e.endpoints(d)
            if a != v:
                raise MalformedWord(f"letter ({eid!r}, {d}) leaves {a!r} but the walk is at {v!r}")
            v = b
        return cls(graph, start, v, letters)

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def is_reduced(self) -> bool:
        return all(a[0] != b[0] or a[1] != -b[1] for a, b in zip(self.letters, self.letters[1:]))

    def vertices(self) -> list:
        out = [self.start]
        for eid, d in self.letters:
            out.append(self.graph.edge[eid].endpoints(d)[1])
        return out

    def __str__(self) -> str:
        if not self.letters:
            return f"id[{self.start}]"
        return " ".join(f"{eid}" if d > 0 else f"{eid}^-1" for eid, d in self.letters)


def free_reduce(letters: Iterable[Letter]) -> tuple:
    stack: list = []
    for eid, d in letters:
        if stack and stack[-1][0] == eid and stack[-1][1] == -d:
            stack.pop()
        else:
            stack.append((eid, d))
    return tuple(stack)


def reduce(w: EdgeWord) -> EdgeWord:
    """Normal form of ``w``: cancel every adjacent ``e e^-1`` pair."""
    return EdgeWord._trusted(w.graph, w.start, w.end, free_reduce(w.letters))


def identity(graph: SurfaceGraph, v) -> EdgeWord:
    return EdgeWord(graph, v, v, ())


def inverse(f: EdgeWord) -> EdgeWord:
    return EdgeWord._trusted(f.graph, f.end, f.start, tuple((eid, -d) for eid, d in reversed(f.letters)))


def compose(f: EdgeWord, g: EdgeWord) -> EdgeWord:
    """``f`` followed by ``g`` (path order), reduced."""
    if f.end != g.start:
        raise EndpointMismatch(f"cannot compose: {f.end!r} != {g.start!r}")
    return EdgeWord._trusted(f.graph, f.start, g.end, free_reduce(f.letters + g.letters))


def ends(m: EdgeWord) -> tuple:
    return (m.start, m.end)


def iter_reduced_words(graph: SurfaceGraph, start, max_len: int) -> Iterator[EdgeWord]:
    """All reduced words leaving ``start`` of length at most ``max_len``."""
    inc = graph.incidence
    edge = graph.edge
    letters: list = []

    def dfs(v):
        yield EdgeWord._trusted(graph, start, v, tuple(letters))
        if len(letters) == max_len:
            return
        for eid, d in inc[v]:
            if letters and letters[-1][0] == eid and letters[-1][1] == -d:
                continue
            letters.append((eid, d))
            yield from dfs(edge[eid].endpoints(d)[1])
            letters.pop()

    yield from dfs(start)


# --------------------------------------------------------------------------
# groupoids


@dataclass(frozen=True)
class PairGroupoid:
    """Exactly one morphism ``(a, b)`` between each ordered pair of objects."""

    objects: frozenset

    def __post_init__(self):
        object.__setattr__(self, "objects", frozenset(self.objects))

    def hom(self, a, b) -> list:
        if a in self.objects and b in self.objects:
            return [(a, b)]
        return []

    def identity(self, a) -> tuple:
        return (a, a)

    def compose(self, f: tuple, g: tuple) -> tuple:
        if f[1] != g[0]:
            raise EndpointMismatch(f"cannot compose {f} with {g}")
        return (f[0], g[1])

    def inverse(self, f: tuple) -> tuple:
        return (f[1], f[0])


@dataclass(frozen=True)
class BasedGroupoid:
    """Fundamental groupoid of ``graph`` on the object set ``basepoints``."""

    graph: SurfaceGraph
    basepoints: tuple

    def __post_init__(self):
        bps = tuple(sorted(set(self.basepoints), key=sort_key))
        for p in bps:
            if p not in self.graph.incidence:
                raise BasepointsMissComponent(f"basepoint {p!r} is not a vertex")
        for comp in components(self.graph):
            if not set(comp) & set(bps):
                raise BasepointsMissComponent(f"no basepoint in the component of {comp[0]!r}")
        object.__setattr__(self, "basepoints", bps)

    def identity(self, p) -> EdgeWord:
        self._check_object(p)
        return identity(self.graph, p)

    def _check_object(self, p) -> None:
        if p not in self.basepoints:
            raise EndpointMismatch(f"{p!r} is not an object")

    def is_morphism(self, w: EdgeWord) -> bool:
        return w.start in self.basepoints and w.end in self.basepoints and w.is_reduced

    def morphisms(self, max_len: int, source=None) -> Iterator[EdgeWord]:
        """Morphisms of length at most ``max_len`` (optionally from ``source``)."""
        starts = self.basepoints if source is None else (source,)
        objs = set(self.basepoints)
        for p in starts:
            for w in iter_reduced_words(self.graph, p, max_len):
                if w.end in objs:
                    yield w

    def hom(self, p, q, max_len: int) -> list[EdgeWord]:
        self._check_object(p)
        self._check_object(q)
        return [w for w in self.morphisms(max_len, p) if w.end == q]


@dataclass(frozen=True)
class ComponentPresentation:
    basepoints: tuple
    vertices: tuple
    rank: int
    generators: tuple  # non-forest edge ids


@dataclass(frozen=True)
class Presentation:
    components: tuple[ComponentPresentation, ...]
    forest: tuple  # spanning-forest edge ids, in discovery order

    @property
    def ranks(self) -> list[int]:
        return [c.rank for c in self.components]


def spanning_forest(graph: SurfaceGraph) -> tuple:
    """Deterministic BFS forest: roots and neighbours in sorted-id order."""
    seen: set = set()
    forest = []
    for root in graph.vertices:
        if root in seen:
            continue
        seen.add(root)
        queue = [root]
        while queue:
            v = queue.pop(0)
            for eid, d in graph.incidence[v]:
                w = graph.edge[eid].endpoints(d)[1]
                if w not in seen:
                    seen.add(w)
                    forest.append(eid)
                    queue.append(w)
    return tuple(forest)


def presentation(g: BasedGroupoid) -> Presentation:
    forest = spanning_forest(g.graph)
    in_forest = set(forest)
    comps = []
    for vs in components(g.graph):
        vset = set(vs)
        gens = tuple(
            e.id for e in sorted(g.graph.edges, key=lambda e: sort_key(e.id))
            if e.tail in vset and e.id not in in_forest
        )
        bps = tuple(p for p in g.basepoints if p in vset)
        comps.append(ComponentPresentation(bps, vs, len(gens), gens))
    return Presentation(tuple(comps), forest)


def coproduct(groupoids: Sequence[BasedGroupoid]) -> BasedGroupoid:
    """Disjoint union; summands must use disjoint vertex and edge ids."""
    groupoids = list(groupoids)
    if len(groupoids) == 1:
        return groupoids[0]
    vertices: list = []
    edges: list = []
    seen_v: set = set()
    seen_e: set = set()
    basepoints: list = []
    for g in groupoids:
        for v in g.graph.vertices:
            if v in seen_v:
                raise IdCollision(f"vertex {v!r} occurs in two summands")
            seen_v.add(v)
            vertices.append(v)
        for e in g.graph.edges:
            if e.id in seen_e:
                raise IdCollision(f"edge {e.id!r} occurs in two summands")
            seen_e.add(e.id)
            edges.append(e)
        basepoints.extend(g.basepoints)
    return BasedGroupoid(SurfaceGraph(tuple(vertices), tuple(edges)), tuple(basepoints))


# --------------------------------------------------------------------------
# functors induced by graph maps


@dataclass(frozen=True)
class GraphMap:
    """Vertices to vertices, each edge to a walk between the image endpoints."""

    source: SurfaceGraph
    target: SurfaceGraph
    vertex_map: Mapping
    edge_map: Mapping  # edge id -> EdgeWord in target

    def __post_init__(self):
        for v in self.source.vertices:
            if v not in self.vertex_map:
                raise IllFormedMap(f"vertex {v!r} has no image")
            if self.vertex_map[v] not in self.target.incidence:
                raise IllFormedMap(f"image of {v!r} is not a target vertex")
        for e in self.source.edges:
            img = self.edge_map.get(e.id)
            if img is None:
                raise IllFormedMap(f"edge {e.id!r} has no image")
            want = (self.vertex_map[e.tail], self.vertex_map[e.head])
            if (img.start, img.end) != want:
                raise IllFormedMap(
                    f"edge {e.id!r} goes to a word from {img.start!r} to {img.end!r}, expected {want}"
                )

    @cached_property
    def _letter_images(self) -> dict:
        out = {}
        for eid, img in self.edge_map.items():
            out[(eid, 1)] = img.letters
            out[(eid, -1)] = tuple((x, -s) for x, s in reversed(img.letters))
        return out

    def __call__(self, w: EdgeWord) -> EdgeWord:
        images = self._letter_images
        out: list = []
        for letter in w.letters:
            out.extend(images[letter])
        return EdgeWord._trusted(self.target, self.vertex_map[w.start], self.vertex_map[w.end], free_reduce(out))


@dataclass
class FunctorReport:
    identities_checked: int = 0
    pairs_checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def induced_functor_check(
    gmap: GraphMap,
    source: BasedGroupoid,
    target: BasedGroupoid,
    samples: Sequence[EdgeWord],
    max_pairs: Optional[int] = None,
    seed: int = 0,
) -> FunctorReport:
    """Check F(id) = id and F(g o f) = F(g) o F(f) on composable sample pairs.

    With ``max_pairs`` set, a seeded random subset of the composable pairs
    is checked instead of all of them.
    """
    for p in source.basepoints:
        if gmap.vertex_map[p] not in target.basepoints:
            raise IllFormedMap(f"basepoint {p!r} maps to non-basepoint {gmap.vertex_map[p]!r}")
    report = FunctorReport()
    for p in source.basepoints:
        report.identities_checked += 1
        img = gmap(identity(source.graph, p))
        if img != identity(target.graph, gmap.vertex_map[p]):
            report.violations.append(("identity", p, str(img)))

    by_start: dict = {}
    for w in samples:
        by_start.setdefault(w.start, []).append(w)
    counts = [len(by_start.get(f.end, ())) for f in samples]
    total = sum(counts)
    if max_pairs is None or total <= max_pairs:
        pairs = ((f, g) for f in samples for g in by_start.get(f.end, ()))
    else:
        pairs = _sample_pairs(samples, by_start, counts, max_pairs, random.Random(seed))
    images = {}
    for f, g in pairs:
        report.pairs_checked += 1
        if f not in images:
            images[f] = gmap(f)
        if g not in images:
            images[g] = gmap(g)
        ff, fg = images[f], images[g]
        lhs = gmap(compose(f, g))
        rhs = compose(ff, fg)
        if lhs != rhs:
            report.violations.append(("composition", str(f), str(g), str(lhs), str(rhs)))
    return report


def _sample_pairs(samples, by_start, counts, k, rng):
    """``k`` distinct composable pairs, uniformly, without listing them all."""
    cum = list(accumulate(counts))
    for idx in sorted(rng.sample(range(cum[-1]), k)):
        i = bisect_right(cum, idx)
        f = samples[i]
        j = idx - (cum[i - 1] if i else 0)
        yield f, by_start[f.end][j]
