"""The standard cover of a striped surface and the groupoid comparison.

The surface Z is covered by strip interiors N_alpha and seam neighbourhoods
N_beta (two thin rectangles glued along the seam).  Pulling this cover back
along the canonical injection phi: G -> Z gives a cover of the graph by
vertex stars and short edge arcs.  Every pairwise intersection component of
either cover holds exactly one cut point and no three sets meet, so the
fundamental groupoid of Z on the cut points is free on the cover graph H.
``verify_phi_iso`` compares it with the groupoid of the subdivided graph.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Hashable, Optional, Union

from .atlas import (
    NEG_INF,
    POS_INF,
    BoundaryInterval,
    ExpandedAtlas,
    SeamDescriptor,
    format_rational,
    gamma,
    gamma_inverse,
    is_finite,
    require_valid,
    seams,
)
from .graph import (
    BadParameter,
    Edge,
    GraphError,
    SurfaceGraph,
    TooLarge,
    build_graph,
    components,
    isomorphic,
    sort_key,
    subdivide,
)
from .groupoid import (
    BasedGroupoid,
    EdgeWord,
    GraphMap,
    induced_functor_check,
    presentation,
)

NB_LEVEL = Fraction(4, 5)  # rectangles of N_beta sit strictly past this level
CUT_LEVEL = Fraction(9, 10)  # level of d_beta and d'_beta
CUT_PARAM = Fraction(1, 10)  # phi_beta(-/+ CUT_PARAM) = d_beta / d'_beta
ARC_PARAM = 1 - NB_LEVEL  # phi^-1(N_beta) is the arc (-ARC_PARAM, ARC_PARAM)

ONE = Fraction(1)
HALF = Fraction(1, 2)


class VanKampenError(Exception):
    pass


class UnsupportedConfiguration(VanKampenError):
    pass


class ReportMismatch(VanKampenError):
    def __init__(self, message: str, witness: Optional[str] = None):
        super().__init__(message if witness is None else f"{message}: {witness}")
        self.witness = witness


# --------------------------------------------------------------------------
# points of Z


@dataclass(frozen=True, order=True)
class ZPoint:
    """A point of Z as (strip, abscissa, level).

    Points on a seam are stored by their representative on the X side.
    """

    strip: str
    x: Fraction
    level: Fraction

    def __str__(self) -> str:
        return f"({self.strip}, {format_rational(self.x)}, {format_rational(self.level)})"


def _interval_at(expanded: ExpandedAtlas, strip: str, side: int, x) -> Optional[BoundaryInterval]:
    for bi in expanded.strip(strip).side(side):
        if bi.interval.contains(x):
            return bi
    return None


def canonical_point(expanded: ExpandedAtlas, strip: str, x, level) -> ZPoint:
    """The canonical representative of the image of ``(x, level)`` in Z."""
    x, level = Fraction(x), Fraction(level)
    if not -1 <= level <= 1:
        raise BadParameter(f"level {level} is outside [-1, 1]")
    if abs(level) < 1:
        return ZPoint(strip, x, level)
    bi = _interval_at(expanded, strip, int(level), x)
    if bi is None:
        raise BadParameter(f"({format_rational(x)}, {level}) is a removed boundary point of {strip}")
    hit = expanded.gluing_of.get(bi.ref)
    if hit is not None and hit[1] == "y":
        g = hit[0]
        x = gamma(SeamDescriptor(g.id, g.x, g.y, g.reversed), x)
        return ZPoint(g.x.strip, x, Fraction(g.x.side))
    return ZPoint(strip, x, level)


def representatives(expanded: ExpandedAtlas, p: ZPoint) -> list[ZPoint]:
    """Every strip representative of ``p``: two for seam points, else one."""
    out = [p]
    if abs(p.level) == 1:
        bi = _interval_at(expanded, p.strip, int(p.level), p.x)
        hit = expanded.gluing_of.get(bi.ref) if bi is not None else None
        if hit is not None and hit[1] == "x":
            g = hit[0]
            y = gamma_inverse(SeamDescriptor(g.id, g.x, g.y, g.reversed), p.x)
            out.append(ZPoint(g.y.strip, y, Fraction(g.y.side)))
    return out


# --------------------------------------------------------------------------
# pieces of cover elements of Z


@dataclass(frozen=True)
class Piece:
    """``(xlo, xhi) x levels`` inside one strip, levels closed where flagged.

    ``seam`` names the seam whose closed boundary interval the piece
    contains (the piece then reaches the boundary line along all of X or Y).
    """

    strip: str
    xlo: Fraction
    xhi: Fraction
    llo: Fraction
    lhi: Fraction
    lo_closed: bool = False
    hi_closed: bool = False
    seam: Optional[str] = None

    @property
    def empty(self) -> bool:
        if not self.xlo < self.xhi:
            return True
        if self.llo < self.lhi:
            return False
        return not (self.llo == self.lhi and self.lo_closed and self.hi_closed)

    def contains(self, p: ZPoint) -> bool:
        if p.strip != self.strip or not self.xlo < p.x < self.xhi:
            return False
        above = self.llo < p.level or (self.lo_closed and p.level == self.llo)
        below = p.level < self.lhi or (self.hi_closed and p.level == self.lhi)
        return above and below

    def __str__(self) -> str:
        lb = "[" if self.lo_closed else "("
        rb = "]" if self.hi_closed else ")"
        xs = f"({_fmt(self.xlo)}, {_fmt(self.xhi)})"
        return f"{self.strip}:{xs}x{lb}{_fmt(self.llo)}, {_fmt(self.lhi)}{rb}"


def _fmt(x) -> str:
    if x == POS_INF:
        return "inf"
    if x == NEG_INF:
        return "-inf"
    return format_rational(x)


def _meet(lo1, hi1, c1lo, c1hi, lo2, hi2, c2lo, c2hi):
    """Intersection of two intervals with closure flags."""
    if lo1 > lo2:
        lo, clo = lo1, c1lo
    elif lo2 > lo1:
        lo, clo = lo2, c2lo
    else:
        lo, clo = lo1, c1lo and c2lo
    if hi1 < hi2:
        hi, chi = hi1, c1hi
    elif hi2 < hi1:
        hi, chi = hi2, c2hi
    else:
        hi, chi = hi1, c1hi and c2hi
    if lo < hi or (lo == hi and clo and chi):
        return lo, hi, clo, chi
    return None


def _box(p: Piece, q: Piece) -> Optional[Piece]:
    if p.strip != q.strip:
        return None
    xlo, xhi = max(p.xlo, q.xlo), min(p.xhi, q.xhi)
    if not xlo < xhi:
        return None
    m = _meet(p.llo, p.lhi, p.lo_closed, p.hi_closed, q.llo, q.lhi, q.lo_closed, q.hi_closed)
    if m is None:
        return None
    llo, lhi, clo, chi = m
    seam = p.seam if p.seam == q.seam and (clo and llo == -1 or chi and lhi == 1) else None
    return Piece(p.strip, xlo, xhi, llo, lhi, clo, chi, seam)


def _touch(p: Piece, q: Piece) -> bool:
    """True when ``p`` and ``q`` overlap or abut so that their union is connected."""
    if p.seam is not None and p.seam == q.seam:
        return True
    if p.strip != q.strip or not max(p.xlo, q.xlo) < min(p.xhi, q.xhi):
        return False
    if _box(p, q) is not None:
        return True
    return (p.lhi == q.llo and (p.hi_closed or q.lo_closed)) or (
        q.lhi == p.llo and (q.hi_closed or p.lo_closed)
    )


# --------------------------------------------------------------------------
# pieces of cover elements of G


@dataclass(frozen=True)
class GVertex:
    vertex: Hashable

    def __str__(self) -> str:
        return f"{self.vertex}"


@dataclass(frozen=True)
class GArc:
    """Parameters ``(lo, hi)`` of edge ``edge`` (closed at -1/+1 where flagged)."""

    edge: Hashable
    lo: Fraction
    hi: Fraction
    lo_closed: bool = False
    hi_closed: bool = False

    def __str__(self) -> str:
        lb = "[" if self.lo_closed else "("
        rb = "]" if self.hi_closed else ")"
        return f"{self.edge}:{lb}{_fmt(self.lo)}, {_fmt(self.hi)}{rb}"


GPiece = Union[GVertex, GArc]
GPoint = Hashable  # a vertex id, or (edge id, t) with -1 < t < 1


def g_point(graph: SurfaceGraph, beta, t) -> GPoint:
    """The point at parameter ``t`` of edge ``beta`` (endpoints become vertices)."""
    t = Fraction(t)
    e = graph.edge[beta]
    if t == -1:
        return e.tail
    if t == 1:
        return e.head
    return (beta, t)


def _arc_has_vertex(graph: SurfaceGraph, a: GArc, v) -> bool:
    e = graph.edge[a.edge]
    return (a.lo_closed and a.lo == -1 and e.tail == v) or (a.hi_closed and a.hi == 1 and e.head == v)


def _on_edge(graph: SurfaceGraph, pt: GPoint) -> bool:
    return isinstance(pt, tuple) and len(pt) == 2 and pt[0] in graph.edge


def _g_contains(graph: SurfaceGraph, piece: GPiece, pt: GPoint) -> bool:
    if _on_edge(graph, pt):
        if isinstance(piece, GVertex) or piece.edge != pt[0]:
            return False
        t = pt[1]
        return (piece.lo < t or (piece.lo_closed and t == piece.lo)) and (
            t < piece.hi or (piece.hi_closed and t == piece.hi)
        )
    if isinstance(piece, GVertex):
        return piece.vertex == pt
    return _arc_has_vertex(graph, piece, pt)


def _g_meet(graph: SurfaceGraph, p: GPiece, q: GPiece) -> Optional[GPiece]:
    if isinstance(p, GVertex) and isinstance(q, GVertex):
        return p if p == q else None
    if isinstance(p, GVertex):
        return p if _arc_has_vertex(graph, q, p.vertex) else None
    if isinstance(q, GVertex):
        return q if _arc_has_vertex(graph, p, q.vertex) else None
    if p.edge != q.edge:
        return None
    m = _meet(p.lo, p.hi, p.lo_closed, p.hi_closed, q.lo, q.hi, q.lo_closed, q.hi_closed)
    return None if m is None else GArc(p.edge, *m)


def _g_touch(graph: SurfaceGraph, p: GPiece, q: GPiece) -> bool:
    if _g_meet(graph, p, q) is not None:
        return True
    if isinstance(p, GArc) and isinstance(q, GArc):
        if p.edge == q.edge:
            return (p.hi == q.lo and (p.hi_closed or q.lo_closed)) or (
                q.hi == p.lo and (q.hi_closed or p.lo_closed)
            )
        return any(_arc_has_vertex(graph, p, v) and _arc_has_vertex(graph, q, v) for v in graph.vertices)
    return False


# --------------------------------------------------------------------------
# covers


@dataclass(frozen=True)
class CoverElement:
    """``kind`` is "strip" (N_alpha) or "seam" (N_beta); ``pieces`` partition it."""

    kind: str
    id: str
    pieces: tuple

    @property
    def key(self) -> tuple:
        return (self.kind, self.id)

    def __str__(self) -> str:
        return f"N[{self.id}]"


@dataclass(frozen=True)
class CoverPair:
    expanded: ExpandedAtlas
    graph: SurfaceGraph
    z_cover: tuple[CoverElement, ...]
    g_cover: tuple[CoverElement, ...]

    @cached_property
    def seam_index(self) -> dict:
        return {s.beta: s for s in seams(self.expanded)}


def _strip_interior(expanded: ExpandedAtlas, sid: str) -> CoverElement:
    pieces = [Piece(sid, NEG_INF, POS_INF, -ONE, ONE)]
    strip = expanded.strip(sid)
    for bi in strip.top + strip.bottom:
        if bi.ref not in expanded.gluing_of:
            lvl = Fraction(bi.side)
            pieces.append(Piece(sid, bi.interval.lo, bi.interval.hi, lvl, lvl, True, True))
    return CoverElement("strip", sid, tuple(pieces))


def _rectangle(bi: BoundaryInterval, beta: str) -> Piece:
    iv = bi.interval
    if bi.side > 0:
        return Piece(bi.strip, iv.lo, iv.hi, NB_LEVEL, ONE, False, True, beta)
    return Piece(bi.strip, iv.lo, iv.hi, -ONE, -NB_LEVEL, True, False, beta)


def build_cover(expanded: ExpandedAtlas) -> CoverPair:
    """The cover of Z by strip interiors and seam neighbourhoods, and its pullback to G."""
    require_valid(expanded)
    graph = build_graph(expanded)
    z_cover = [_strip_interior(expanded, s.id) for s in expanded.strips]
    g_cover = []
    for sid in graph.vertices:
        pieces = [GVertex(sid)]
        for e in graph.edges:
            if e.tail == sid:
                pieces.append(GArc(e.id, -ONE, Fraction(0), True, False))
            if e.head == sid:
                pieces.append(GArc(e.id, Fraction(0), ONE, False, True))
        g_cover.append(CoverElement("strip", sid, tuple(pieces)))
    for s in seams(expanded):
        z_cover.append(CoverElement("seam", s.beta, (_rectangle(s.x, s.beta), _rectangle(s.y, s.beta))))
        g_cover.append(CoverElement("seam", s.beta, (GArc(s.beta, -ARC_PARAM, ARC_PARAM),)))
    return CoverPair(expanded, graph, tuple(z_cover), tuple(g_cover))


# --------------------------------------------------------------------------
# cut set and the canonical injection


@dataclass(frozen=True)
class SeamChoice:
    beta: str
    x_beta: Fraction
    y_beta: Fraction
    z_beta: ZPoint


def choose_abscissa(lo, hi) -> Fraction:
    """Midpoint of a finite interval, finite end +/- 1 of a half line, 0 for the line."""
    if is_finite(lo) and is_finite(hi):
        return (lo + hi) / 2
    if is_finite(lo):
        return lo + 1
    if is_finite(hi):
        return hi - 1
    return Fraction(0)


def _seam_choice(s: SeamDescriptor) -> SeamChoice:
    x = choose_abscissa(s.x.interval.lo, s.x.interval.hi)
    return SeamChoice(s.beta, x, gamma_inverse(s, x), ZPoint(s.alpha, x, Fraction(s.epsilon)))


@dataclass(frozen=True)
class CutPoint:
    """``tag`` is "s" (origin of an isolated strip), "d" or "d'" (flanking a seam)."""

    tag: str
    ref: str
    point: ZPoint
    preimage: GPoint

    @property
    def label(self) -> tuple:
        return (self.tag, self.ref)

    @property
    def order(self) -> tuple:
        return (sort_key(self.ref), self.tag)

    def __str__(self) -> str:
        return f"{self.tag}[{self.ref}]"


@dataclass(frozen=True)
class CutSet:
    points: tuple[CutPoint, ...]
    choices: dict = field(compare=False)

    @cached_property
    def by_point(self) -> dict:
        return {c.point: c for c in self.points}

    @cached_property
    def by_label(self) -> dict:
        return {c.label: c for c in self.points}


class CanonicalInjection:
    """phi: G -> Z for one expanded atlas."""

    def __init__(self, expanded: ExpandedAtlas):
        require_valid(expanded)
        self.expanded = expanded
        self.seams = {s.beta: s for s in seams(expanded)}
        self.choices = {b: _seam_choice(s) for b, s in self.seams.items()}

    def vertex(self, alpha: str) -> ZPoint:
        self.expanded.strip(alpha)
        return ZPoint(alpha, Fraction(0), Fraction(0))

    def __call__(self, beta: str, t) -> ZPoint:
        if beta not in self.seams:
            raise BadParameter(f"unknown seam {beta!r}")
        t = Fraction(t)
        if not -1 <= t <= 1:
            raise BadParameter(f"parameter {t} is outside [-1, 1]")
        s, c = self.seams[beta], self.choices[beta]
        eps, eps2 = s.epsilon, s.epsilon_prime
        if t <= -HALF:
            x, level, strip = 2 * (1 + t) * c.x_beta, (1 + t) * eps, s.alpha
        elif t <= 0:
            x, level, strip = c.x_beta, (1 + t) * eps, s.alpha
        elif t <= HALF:
            x, level, strip = c.y_beta, (1 - t) * eps2, s.alpha_prime
        else:
            x, level, strip = 2 * (1 - t) * c.y_beta, (1 - t) * eps2, s.alpha_prime
        return canonical_point(self.expanded, strip, x, level)

    def at(self, pt: GPoint) -> ZPoint:
        if isinstance(pt, tuple) and len(pt) == 2 and pt[0] in self.seams:
            return self(*pt)
        return self.vertex(pt)


def phi_eval(expanded: ExpandedAtlas, beta: str, t) -> ZPoint:
    return CanonicalInjection(expanded)(beta, t)


def choose_cut_set(expanded: ExpandedAtlas) -> CutSet:
    phi = CanonicalInjection(expanded)
    graph = build_graph(expanded)
    points = []
    for beta, s in phi.seams.items():
        c = phi.choices[beta]
        points.append(CutPoint("d", beta, ZPoint(s.alpha, c.x_beta, CUT_LEVEL * s.epsilon), (beta, -CUT_PARAM)))
        points.append(CutPoint(
            "d'", beta, ZPoint(s.alpha_prime, c.y_beta, CUT_LEVEL * s.epsilon_prime), (beta, CUT_PARAM)
        ))
    for v in graph.vertices:
        if graph.degree(v) == 0:
            points.append(CutPoint("s", v, phi.vertex(v), v))
    points.sort(key=lambda c: c.order)
    return CutSet(tuple(points), phi.choices)


# --------------------------------------------------------------------------
# intersections


@dataclass(frozen=True)
class IntersectionComponent:
    elements: tuple  # keys of the cover elements that meet
    pieces: tuple
    cut_points: tuple  # labels of cut points (or their preimages) inside

    def as_dict(self) -> dict:
        return {
            "elements": [f"{k}:{i}" for k, i in self.elements],
            "pieces": [str(p) for p in self.pieces],
            "cut_points": [_label_text(c) for c in self.cut_points],
        }


@dataclass(frozen=True)
class IntersectionReport:
    z_pairs: tuple[IntersectionComponent, ...]
    g_pairs: tuple[IntersectionComponent, ...]
    z_triples: tuple[IntersectionComponent, ...]
    g_triples: tuple[IntersectionComponent, ...]


def _components(pieces: list, touch) -> list[tuple]:
    parent = list(range(len(pieces)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in combinations(range(len(pieces)), 2):
        if touch(pieces[i], pieces[j]):
            parent[find(i)] = find(j)
    groups: dict = {}
    for i, p in enumerate(pieces):
        groups.setdefault(find(i), []).append(p)
    return [tuple(g) for g in groups.values()]


def _z_meet_sets(a: tuple, b: tuple, seam_of) -> list[Piece]:
    out = []
    for p in a:
        for q in b:
            r = _box(p, q)
            if r is not None:
                out.append(r)
            elif p.seam is not None and p.seam == q.seam:
                out.append(seam_of(p.seam))
    return list(dict.fromkeys(out))


def _seam_piece(cover: CoverPair):
    def seam_of(beta):
        s = cover.seam_index[beta]
        lvl = Fraction(s.epsilon)
        return Piece(s.alpha, s.x.interval.lo, s.x.interval.hi, lvl, lvl, True, True, beta)
    return seam_of


def _g_meet_sets(graph, a: tuple, b: tuple) -> list:
    out = []
    for p in a:
        for q in b:
            r = _g_meet(graph, p, q)
            if r is not None:
                out.append(r)
    return list(dict.fromkeys(out))


def _z_cut_points(expanded, cut: CutSet, pieces) -> tuple:
    found = []
    for c in cut.points:
        reps = representatives(expanded, c.point)
        if any(p.contains(r) for p in pieces for r in reps):
            found.append(c.label)
    return tuple(found)


def _g_cut_points(graph, cut: CutSet, pieces) -> tuple:
    return tuple(c.label for c in cut.points if any(_g_contains(graph, p, c.preimage) for p in pieces))


def intersections(cover: CoverPair, cut: Optional[CutSet] = None) -> IntersectionReport:
    """Path components of all nonempty pairwise and triple intersections."""
    cut = cut or choose_cut_set(cover.expanded)
    seam_of = _seam_piece(cover)
    graph = cover.graph

    def z_meet(a, b):
        return _z_meet_sets(a, b, seam_of)

    def g_meet(a, b):
        return _g_meet_sets(graph, a, b)

    out = {}
    for name, elems, meet, touch, cuts in (
        ("z", cover.z_cover, z_meet, _touch, lambda ps: _z_cut_points(cover.expanded, cut, ps)),
        ("g", cover.g_cover, g_meet, lambda p, q: _g_touch(graph, p, q), lambda ps: _g_cut_points(graph, cut, ps)),
    ):
        pairs, triples = [], []
        meets = {}
        for a, b in combinations(elems, 2):
            pieces = meet(a.pieces, b.pieces)
            if pieces:
                meets[(a.key, b.key)] = pieces
                for comp in _components(pieces, touch):
                    pairs.append(IntersectionComponent((a.key, b.key), comp, cuts(comp)))
        for a, b, c in combinations(elems, 3):
            ab = meets.get((a.key, b.key))
            if ab is None or (a.key, c.key) not in meets or (b.key, c.key) not in meets:
                continue
            pieces = meet(tuple(ab), c.pieces)
            for comp in _components(pieces, touch) if pieces else ():
                triples.append(IntersectionComponent((a.key, b.key, c.key), comp, cuts(comp)))
        out[name] = (tuple(pairs), tuple(triples))
    return IntersectionReport(out["z"][0], out["g"][0], out["z"][1], out["g"][1])


# --------------------------------------------------------------------------
# conditions


def _parameter_grid() -> list[Fraction]:
    grid = {Fraction(k, 20) for k in range(-20, 21)}
    for t in (ARC_PARAM, CUT_PARAM):
        for d in (0, Fraction(1, 100), -Fraction(1, 100)):
            grid.update({t + d, -t - d})
    return sorted(grid)


@dataclass
class ConditionReport:
    certificates: list = field(default_factory=list)
    failures: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)

    CHECKS = (
        "simply_connected",
        "cut_bijection",
        "one_cut_point",
        "no_triples",
        "disjoint",
        "meets_components",
        "pullback",
    )

    def fail(self, check: str, message: str) -> None:
        self.failures.setdefault(check, []).append(message)

    @property
    def passed(self) -> bool:
        return not any(self.failures.values())

    def status(self) -> dict:
        return {c: not self.failures.get(c) for c in self.CHECKS}

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": self.status(),
            "counts": dict(sorted(self.counts.items())),
            "failures": {k: list(v) for k, v in sorted(self.failures.items()) if v},
        }


def _certify_shape(cover: CoverPair, report: ConditionReport) -> None:
    graph = cover.graph
    for el in cover.z_cover:
        if el.kind == "strip":
            band = el.pieces[0]
            ok = (band.xlo, band.xhi, band.llo, band.lhi) == (NEG_INF, POS_INF, -1, 1) and not (
                band.lo_closed or band.hi_closed
            )
            ok = ok and all(p.llo == p.lhi and abs(p.llo) == 1 and p.seam is None for p in el.pieces[1:])
            shape = "open band with unglued boundary intervals"
        else:
            s = cover.seam_index[el.id]
            ok = len(el.pieces) == 2 and el.pieces == (_rectangle(s.x, s.beta), _rectangle(s.y, s.beta))
            shape = "two rectangles joined along the seam"
        report.certificates.append(f"N[{el.id}] ({el.kind}): {shape}")
        if not ok:
            report.fail("simply_connected", f"N[{el.id}] has an unexpected shape")
    for el in cover.g_cover:
        if el.kind == "strip":
            arcs = el.pieces[1:]
            ok = el.pieces[0] == GVertex(el.id) and all(
                _arc_has_vertex(graph, a, el.id) and (a.lo == 0 or a.hi == 0) for a in arcs
            )
            shape = f"star of {len(arcs)} half-edges"
        else:
            ok = el.pieces == (GArc(el.id, -ARC_PARAM, ARC_PARAM),)
            shape = "open arc"
        report.certificates.append(f"U[{el.id}] ({el.kind}): {shape}")
        if not ok:
            report.fail("simply_connected", f"U[{el.id}] has an unexpected shape")


def check_conditions(cover: CoverPair, cut: CutSet) -> ConditionReport:
    """Every hypothesis of the comparison lemma, as a report of failures."""
    expanded, graph = cover.expanded, cover.graph
    phi = CanonicalInjection(expanded)
    report = ConditionReport()
    _certify_shape(cover, report)

    # cut preimages map bijectively onto P, element by element
    images = {}
    for c in cut.points:
        img = phi.at(c.preimage)
        if img != c.point:
            report.fail("cut_bijection", f"phi({c.preimage}) = {img}, expected {c} at {c.point}")
        images[c.label] = img
    if len(set(images.values())) != len(images):
        report.fail("cut_bijection", "two cut preimages share an image")
    for zel, gel in zip(cover.z_cover, cover.g_cover):
        in_z = set(_z_cut_points(expanded, cut, zel.pieces))
        in_g = set(_g_cut_points(graph, cut, gel.pieces))
        if in_z != in_g:
            report.fail(
                "cut_bijection",
                f"{zel.key}: P holds {sorted(map(_label_text, in_z))}, "
                f"P_G holds {sorted(map(_label_text, in_g))}",
            )

    inter = intersections(cover, cut)
    report.counts.update({
        "z_elements": len(cover.z_cover),
        "g_elements": len(cover.g_cover),
        "z_pair_components": len(inter.z_pairs),
        "g_pair_components": len(inter.g_pairs),
        "z_triple_components": len(inter.z_triples),
        "g_triple_components": len(inter.g_triples),
        "cut_points": len(cut.points),
    })
    for side, comps in (("Z", inter.z_pairs), ("G", inter.g_pairs)):
        for comp in comps:
            if len(comp.cut_points) != 1:
                report.fail(
                    "one_cut_point",
                    f"{side} component of {comp.elements} holds {len(comp.cut_points)} cut points",
                )
    for side, comps in (("Z", inter.z_triples), ("G", inter.g_triples)):
        for comp in comps:
            report.fail("no_triples", f"{side} triple intersection {comp.elements} is nonempty")
    for kind, elems in (("Z", cover.z_cover), ("G", cover.g_cover)):
        for a, b in combinations(elems, 2):
            if a.kind == b.kind:
                meet = (_z_meet_sets(a.pieces, b.pieces, _seam_piece(cover)) if kind == "Z"
                        else _g_meet_sets(graph, a.pieces, b.pieces))
                if meet:
                    report.fail("disjoint", f"{kind}: {a} and {b} should be disjoint")

    # path components of Z, from strips and gluings alone
    parent = {s.id: s.id for s in expanded.strips}

    def find(v):
        while parent[v] != v:
            v = parent[v]
        return v

    for g in expanded.gluings:
        parent[find(g.x.strip)] = find(g.y.strip)
    hit = {find(c.point.strip) for c in cut.points}
    for s in expanded.strips:
        if find(s.id) not in hit:
            report.fail("meets_components", f"no cut point in the component of strip {s.id}")
    for comp in components(graph):
        vs = set(comp)
        if not any(_g_owner(graph, c.preimage) in vs for c in cut.points):
            report.fail("meets_components", f"no cut preimage in the component of {comp[0]}")

    # phi(U_lambda) lies in V_lambda and U_lambda is all of phi^-1(V_lambda), sampled
    grid = _parameter_grid()
    for beta in graph.edge:
        for t in grid:
            gp = g_point(graph, beta, t)
            zp = phi(beta, t)
            reps = representatives(expanded, zp)
            for zel, gel in zip(cover.z_cover, cover.g_cover):
                in_g = any(_g_contains(graph, p, gp) for p in gel.pieces)
                in_z = any(p.contains(r) for p in zel.pieces for r in reps)
                if in_g != in_z:
                    report.fail("pullback", f"t={t} on {beta}: in U[{gel.id}] is {in_g}, phi in N is {in_z}")
    return report


def _g_owner(graph: SurfaceGraph, pt: GPoint):
    if _on_edge(graph, pt):
        return graph.edge[pt[0]].tail
    return pt


def _label_text(label) -> str:
    if isinstance(label, tuple) and len(label) == 2 and label[0] in ("s", "d", "d'"):
        return f"{label[0]}[{label[1]}]"
    if isinstance(label, tuple) and len(label) == 2:
        return f"{label[0]}@{format_rational(Fraction(label[1]))}"
    return str(label)


# --------------------------------------------------------------------------
# cover graph


@dataclass(frozen=True)
class CoverGraph:
    graph: SurfaceGraph
    roots: dict = field(compare=False)  # strip -> root label (non-isolated strips)
    star_of: dict = field(compare=False)  # cut label -> strip whose interior holds it

    @property
    def euler_characteristic(self) -> int:
        return self.graph.euler_characteristic


def cover_graph(cover: CoverPair, cut: CutSet) -> CoverGraph:
    """Free generators for the groupoid of Z on P: one edge per seam, a star per strip."""
    expanded = cover.expanded
    for comp in intersections(cover, cut).z_pairs:
        if len(comp.cut_points) > 1:
            raise UnsupportedConfiguration(
                f"intersection {comp.elements} holds {len(comp.cut_points)} cut points"
            )
    edges = []
    for c in cut.points:
        if c.tag == "d":
            edges.append(Edge(("seam", c.ref), c.label, ("d'", c.ref)))
    roots, star_of = {}, {}
    for el in cover.z_cover:
        if el.kind != "strip":
            continue
        inside = sorted(
            (cut.by_label[lbl] for lbl in _z_cut_points(expanded, cut, el.pieces)),
            key=lambda c: c.order,
        )
        if not inside or inside[0].tag == "s":
            continue
        root = inside[0].label
        roots[el.id] = root
        for c in inside:
            star_of[c.label] = el.id
            if c.label != root:
                edges.append(Edge(("star", c.tag, c.ref), root, c.label))
    graph = SurfaceGraph(tuple(c.label for c in cut.points), tuple(edges))
    return CoverGraph(graph, roots, star_of)


# --------------------------------------------------------------------------
# the isomorphism check


@dataclass
class VerificationReport:
    objects: dict = field(default_factory=dict)  # G object text -> Z object text
    components: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)
    conditions: Optional[ConditionReport] = None
    words_checked: int = 0
    pairs_checked: int = 0
    max_word_len: int = 8

    @property
    def confirmed(self) -> bool:
        return bool(self.checks) and all(self.checks.values())

    @property
    def ranks_g(self) -> list[int]:
        return [c["rank_g"] for c in self.components]

    @property
    def ranks_z(self) -> list[int]:
        return [c["rank_z"] for c in self.components]

    def as_dict(self) -> dict:
        return {
            "confirmed": self.confirmed,
            "max_word_len": self.max_word_len,
            "object_count": len(self.objects),
            "objects": dict(sorted(self.objects.items())),
            "components": self.components,
            "ranks": {"graph": self.ranks_g, "surface": self.ranks_z},
            "checks": dict(sorted(self.checks.items())),
            "words_checked": self.words_checked,
            "pairs_checked": self.pairs_checked,
            "conditions": None if self.conditions is None else self.conditions.as_dict(),
            "witnesses": self.witnesses,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2, default=str)

    def raise_for_failure(self) -> None:
        if not self.confirmed:
            failed = sorted(k for k, v in self.checks.items() if not v)
            raise ReportMismatch(f"failed checks {failed}", self.witnesses[0] if self.witnesses else None)


def _object_text(x) -> str:
    return _label_text(x)


def verify_phi_iso(
    expanded: ExpandedAtlas,
    max_word_len: int = 8,
    max_pairs: Optional[int] = 2000,
    seed: int = 0,
) -> VerificationReport:
    """Compare the groupoid of G on the cut preimages with that of Z on P.

    The induced map of the subdivided graph onto the cover graph is checked
    to be a functor that is injective on every morphism of length at most
    ``max_word_len``, bijective on objects and rank preserving per component.
    """
    if max_word_len < 1:
        raise BadParameter("max_word_len must be at least 1")
    cover = build_cover(expanded)
    cut = choose_cut_set(expanded)
    phi = CanonicalInjection(expanded)
    report = VerificationReport(max_word_len=max_word_len)
    report.conditions = check_conditions(cover, cut)
    report.checks["conditions"] = report.conditions.passed
    try:
        h = cover_graph(cover, cut)
    except UnsupportedConfiguration as exc:
        report.checks["cover_graph"] = False
        report.witnesses.append(str(exc))
        return report

    g = cover.graph
    sub = subdivide(g, {b: [-CUT_PARAM, CUT_PARAM] for b in g.edge})
    # integer-signed labels hash far faster than Fractions in the word loops
    sub = SurfaceGraph(
        tuple(_signed(v) for v in sub.vertices),
        tuple(Edge(e.id, _signed(e.tail), _signed(e.head)) for e in sub.edges),
    )
    g_objects = [_signed(c.preimage) for c in cut.points]
    pi_g = BasedGroupoid(sub, tuple(g_objects))
    pi_z = BasedGroupoid(h.graph, tuple(c.label for c in cut.points))

    # (a) objects
    obj = {}
    for pre in (c.preimage for c in cut.points):
        img = phi.at(pre)
        c = cut.by_point.get(img)
        if c is None:
            report.witnesses.append(f"phi({_object_text(pre)}) = {img} is not a cut point")
            continue
        obj[_signed(pre)] = c.label
        report.objects[_object_text(pre)] = _object_text(c.label)
    report.checks["objects"] = len(obj) == len(g_objects) and set(obj.values()) == set(pi_z.basepoints) \
        and len(set(obj.values())) == len(obj)
    if not report.checks["objects"]:
        return report

    # (b), (c) components and ranks
    pres_g, pres_z = presentation(pi_g), presentation(pi_z)
    z_comp_of = {p: k for k, c in enumerate(pres_z.components) for p in c.basepoints}
    matched, comps_ok, ranks_ok = set(), True, True
    for cg in pres_g.components:
        targets = {z_comp_of[obj[p]] for p in cg.basepoints}
        if len(targets) != 1:
            comps_ok = False
            report.witnesses.append(f"component of {_object_text(_unsigned(cg.basepoints[0]))} splits")
            continue
        k = targets.pop()
        cz = pres_z.components[k]
        if k in matched or {obj[p] for p in cg.basepoints} != set(cz.basepoints):
            comps_ok = False
            report.witnesses.append(f"component of {_object_text(_unsigned(cg.basepoints[0]))} is not matched")
        matched.add(k)
        if cg.rank != cz.rank:
            ranks_ok = False
            report.witnesses.append(f"rank {cg.rank} != {cz.rank} at {_object_text(_unsigned(cg.basepoints[0]))}")
        report.components.append({
            "objects_graph": [_object_text(_unsigned(p)) for p in cg.basepoints],
            "objects_surface": [_object_text(p) for p in cz.basepoints],
            "rank_g": cg.rank,
            "rank_z": cz.rank,
            "generators_surface": [_edge_text(e) for e in cz.generators],
        })
    report.checks["components"] = comps_ok and len(matched) == len(pres_z.components)
    report.checks["ranks"] = ranks_ok

    # (d) functor and injectivity
    gmap = _graph_map(g, sub, h, obj)
    samples = list(pi_g.morphisms(max_word_len))
    report.words_checked = len(samples)
    fr = induced_functor_check(gmap, pi_g, pi_z, samples, max_pairs=max_pairs, seed=seed)
    report.pairs_checked = fr.pairs_checked
    report.checks["functor"] = fr.passed
    report.witnesses.extend(" ; ".join(map(str, v)) for v in fr.violations[:5])
    seen: dict = {}
    injective = True
    hit_edges = set()
    for w in samples:
        img = gmap(w)
        if len(img) == 1:
            hit_edges.add(img.letters[0][0])
        prev = seen.setdefault(img, w)
        if prev is not w and injective:
            injective = False
            report.witnesses.append(f"{prev} and {w} both map to {img}")
    report.checks["injective"] = injective
    gens_ok = max_word_len < 3 or hit_edges == {e.id for e in h.graph.edges}
    report.checks["generators"] = gens_ok
    if not gens_ok:
        missing = sorted((e.id for e in h.graph.edges if e.id not in hit_edges), key=sort_key)
        report.witnesses.append(f"cover-graph edges not hit: {[_edge_text(e) for e in missing]}")
    return report


def _edge_text(eid) -> str:
    if isinstance(eid, tuple) and eid and eid[0] == "seam":
        return f"seam[{eid[1]}]"
    if isinstance(eid, tuple) and eid and eid[0] == "star":
        return f"star[{eid[1]}[{eid[2]}]]"
    return str(eid)


def _signed(v):
    return (v[0], 1 if v[1] > 0 else -1) if isinstance(v, tuple) else v


def _unsigned(v):
    return (v[0], v[1] * CUT_PARAM) if isinstance(v, tuple) else v


def _graph_map(g: SurfaceGraph, sub: SurfaceGraph, h: CoverGraph, obj: dict) -> GraphMap:
    vmap = dict(obj)
    for v in g.vertices:
        if v not in vmap:
            vmap[v] = h.roots[v]
    hg = h.graph

    def star_path(a, b):
        # a is the root or b is the root; one star edge or none
        if a == b:
            return EdgeWord(hg, a, a, ())
        if ("star",) + b in hg.edge:
            return EdgeWord(hg, a, b, ((("star",) + b, 1),))
        return EdgeWord(hg, a, b, ((("star",) + a, -1),))

    emap = {}
    for e in g.edges:
        d, d2 = ("d", e.id), ("d'", e.id)
        emap[(e.id, 0)] = star_path(vmap[e.tail], d)
        emap[(e.id, 1)] = EdgeWord(hg, d, d2, ((("seam", e.id), 1),))
        emap[(e.id, 2)] = star_path(d2, vmap[e.head])
    return GraphMap(sub, hg, vmap, emap)


# --------------------------------------------------------------------------
# nerve oracle


def nerve_oracle(cover: CoverPair, cut: Optional[CutSet] = None) -> tuple[SurfaceGraph, bool]:
    """Nerve of the cover at the level of path components, compared with G subdivided once."""
    inter = intersections(cover, cut)
    nerve = SurfaceGraph(
        tuple(el.key for el in cover.z_cover),
        tuple(Edge(("x", k), *comp.elements) for k, comp in enumerate(inter.z_pairs)),
    )
    g = cover.graph
    sub = subdivide(g, {b: [0] for b in g.edge})
    relabel = {v: ("strip", v) for v in g.vertices}
    relabel.update({(b, Fraction(0)): ("seam", b) for b in g.edge})

    def pairs(graph, f):
        return Counter(tuple(sorted((f(e.tail), f(e.head)), key=sort_key)) for e in graph.edges)

    same = set(nerve.vertices) == {relabel[v] for v in sub.vertices} and pairs(nerve, lambda v: v) == pairs(
        sub, relabel.__getitem__
    )
    if same:
        try:
            same = isomorphic(nerve, sub) is not None
        except (TooLarge, GraphError):
            pass
    return nerve, same
