"""Model strips, striped atlases and their window expansion.

Everything here is exact: finite endpoints are :class:`fractions.Fraction`
and the two infinite endpoints are ``-math.inf`` / ``math.inf``, which
compare correctly against fractions.  No floating point value other than
the two infinities ever enters an interval.

A :class:`StripedAtlas` may contain integer-indexed families of boundary
intervals and of gluings.  :func:`expand` instantiates them on a finite
window of indices and produces an :class:`ExpandedAtlas`, the object every
downstream computation works with.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Optional, Union

Endpoint = Union[Fraction, float]

NEG_INF: float = -math.inf
POS_INF: float = math.inf

TOP = 1
BOTTOM = -1
SIDE_NAMES = {TOP: "top", BOTTOM: "bottom"}


class AtlasError(Exception):
    """Base class for structural errors in atlases."""


class UnresolvableRef(AtlasError):
    def __init__(self, message: str, gluing: str | None = None, n: int | None = None):
        super().__init__(message)
        self.gluing = gluing
        self.n = n


class InvalidAtlas(AtlasError):
    def __init__(self, report: "ValidationReport"):
        lines = "; ".join(v.message for v in report.violations[:5])
        super().__init__(f"atlas violates {len(report.violations)} axiom(s): {lines}")
        self.report = report


class OutOfInterval(AtlasError):
    pass


@dataclass(frozen=True)
class SourceSpan:
    """1-based line/column position of a slice of source text."""

    line: int
    column: int
    length: int = 1

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


def endpoint(value) -> Endpoint:
    """Coerce ``value`` to an exact endpoint (a Fraction or +-inf)."""
    if isinstance(value, float):
        if math.isinf(value):
            return value
        raise TypeError("finite endpoints must be exact, got float %r" % value)
    if isinstance(value, str):
        s = value.strip()
        if s in ("inf", "+inf"):
            return POS_INF
        if s == "-inf":
            return NEG_INF
    return Fraction(value)


def is_finite(x: Endpoint) -> bool:
    return not (isinstance(x, float) and math.isinf(x))


def format_endpoint(x: Endpoint) -> str:
    if not is_finite(x):
        return "+inf" if x > 0 else "-inf"
    return format_rational(x)


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Interval:
    """Open interval ``(lo, hi)`` of a boundary line."""

    lo: Endpoint
    hi: Endpoint
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "lo", endpoint(self.lo))
        object.__setattr__(self, "hi", endpoint(self.hi))

    @property
    def well_ordered(self) -> bool:
        return self.lo < self.hi

    def contains(self, x) -> bool:
        return self.lo < x < self.hi

    def overlaps(self, other: "Interval") -> bool:
        return max(self.lo, other.lo) < min(self.hi, other.hi)

    def __str__(self) -> str:
        return f"({format_endpoint(self.lo)}, {format_endpoint(self.hi)})"


AFFINE = "affine"
GEOMETRIC = "geometric"


@dataclass(frozen=True)
class IntervalFamily:
    """Integer-indexed family of intervals ``(lo(n), hi(n))``.

    affine:    lo(n) = a0 + a1*n,     hi(n) = b0 + b1*n
    geometric: lo(n) = a0 + a1*r**n,  hi(n) = b0 + b1*r**n,  0 < |r| < 1
    """

    name: str
    kind: str
    a0: Fraction
    a1: Fraction
    b0: Fraction
    b1: Fraction
    ratio: Optional[Fraction] = None
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in (AFFINE, GEOMETRIC):
            raise ValueError(f"unknown family kind {self.kind!r}")
        for name in ("a0", "a1", "b0", "b1"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.kind == GEOMETRIC:
            if self.ratio is None:
                raise ValueError("geometric family needs a ratio")
            object.__setattr__(self, "ratio", Fraction(self.ratio))
        elif self.ratio is not None:
            raise ValueError("affine family takes no ratio")

    def _scale(self, n: int) -> Fraction:
        return Fraction(n) if self.kind == AFFINE else self.ratio**n

    def lo(self, n: int) -> Fraction:
        return self.a0 + self.a1 * self._scale(n)

    def hi(self, n: int) -> Fraction:
        return self.b0 + self.b1 * self._scale(n)

    def member(self, n: int) -> Interval:
        return Interval(self.lo(n), self.hi(n))

    def form_violations(self) -> list[str]:
        """Symbolic problems with the family valid for *every* integer n."""
        problems = []
        if self.kind == AFFINE:
            length = self.b0 - self.a0
            if self.a1 != self.b1 or length <= 0:
                problems.append("lo(n) < hi(n) fails for some integer n")
            elif self.a1 == 0:
                problems.append("members coincide (zero step)")
            elif abs(self.a1) < length:
                problems.append("consecutive members overlap")
        else:
            if not 0 < abs(self.ratio) < 1:
                problems.append("geometric ratio must satisfy 0 < |r| < 1")
        return problems

    def accumulation_points(self) -> tuple[Fraction, ...]:
        """Finite accumulation points of the endpoint set."""
        if self.kind == AFFINE:
            return ()
        return tuple(sorted({self.a0, self.b0}))


@dataclass(frozen=True)
class SideSpec:
    side: int
    intervals: tuple[Interval, ...] = ()
    families: tuple[IntervalFamily, ...] = ()

    def __post_init__(self):
        if self.side not in (TOP, BOTTOM):
            raise ValueError(f"side must be +1 or -1, got {self.side!r}")
        object.__setattr__(self, "intervals", tuple(self.intervals))
        object.__setattr__(self, "families", tuple(self.families))

    @property
    def empty(self) -> bool:
        return not self.intervals and not self.families

    def family(self, name: str) -> Optional[IntervalFamily]:
        for fam in self.families:
            if fam.name == name:
                return fam
        return None


@dataclass(frozen=True)
class ModelStrip:
    """The band R x (-1, 1) together with its retained boundary intervals."""

    id: str
    top: SideSpec = SideSpec(TOP)
    bottom: SideSpec = SideSpec(BOTTOM)
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.top.side != TOP or self.bottom.side != BOTTOM:
            raise ValueError("top/bottom sides carry the wrong sign")

    def side(self, s: int) -> SideSpec:
        return self.top if s == TOP else self.bottom


@dataclass(frozen=True)
class BoundaryRef:
    """Reference to one boundary interval of a strip side.

    Either ``index`` (position among the side's explicit intervals) or
    ``family`` is set.  A family reference names member ``n + offset``,
    where ``n`` is the index of the enclosing gluing family (0 outside one).
    """

    strip: str
    side: int
    index: Optional[int] = None
    family: Optional[str] = None
    offset: int = 0
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if (self.index is None) == (self.family is None):
            raise ValueError("exactly one of index/family must be given")

    def key(self, n: int | None) -> tuple:
        if self.family is None:
            return ("i", self.index)
        return ("f", self.family, (n or 0) + self.offset)

    def __str__(self) -> str:
        head = f"{self.strip}.{SIDE_NAMES[self.side]}"
        if self.family is None:
            return f"{head}[{self.index}]"
        if self.offset == 0:
            idx = "n"
        else:
            idx = f"n{self.offset:+d}"
        return f"{head}.{self.family}[{idx}]"


@dataclass(frozen=True)
class Gluing:
    """Pairing of X (``x``) with Y (``y``); a family gluing when ``family`` is set."""

    id: str
    x: BoundaryRef
    y: BoundaryRef
    reversed: bool = False
    family: Optional[str] = None
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class StripedAtlas:
    strips: tuple[ModelStrip, ...] = ()
    gluings: tuple[Gluing, ...] = ()

    def __post_init__(self):
        strips = tuple(sorted(self.strips, key=lambda s: s.id))
        gluings = tuple(sorted(self.gluings, key=lambda g: (g.family or "", g.id)))
        ids = [s.id for s in strips]
        if len(set(ids)) != len(ids):
            raise AtlasError("duplicate strip id")
        gids = [g.id for g in gluings]
        if len(set(gids)) != len(gids):
            raise AtlasError("duplicate gluing id")
        object.__setattr__(self, "strips", strips)
        object.__setattr__(self, "gluings", gluings)

    def strip(self, sid: str) -> ModelStrip:
        for s in self.strips:
            if s.id == sid:
                return s
        raise KeyError(sid)

    @property
    def has_families(self) -> bool:
        return any(g.family for g in self.gluings) or any(
            s.top.families or s.bottom.families for s in self.strips
        )


# --------------------------------------------------------------------------
# expansion


@dataclass(frozen=True)
class BoundaryInterval:
    """A concrete boundary interval of an expanded atlas."""

    strip: str
    side: int
    key: tuple
    interval: Interval

    @property
    def label(self) -> str:
        head = f"{self.strip}.{SIDE_NAMES[self.side]}"
        if self.key[0] == "i":
            return f"{head}[{self.key[1]}]"
        return f"{head}.{self.key[1]}[{self.key[2]}]"

    @property
    def ref(self) -> tuple:
        return (self.strip, self.side, self.key)


@dataclass(frozen=True)
class ExpandedStrip:
    id: str
    top: tuple[BoundaryInterval, ...]
    bottom: tuple[BoundaryInterval, ...]
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def side(self, s: int) -> tuple[BoundaryInterval, ...]:
        return self.top if s == TOP else self.bottom


@dataclass(frozen=True)
class ExpandedGluing:
    id: str
    x: BoundaryInterval
    y: BoundaryInterval
    reversed: bool = False
    family: Optional[str] = None
    n: Optional[int] = None
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class DroppedGluing:
    gluing: str
    n: int
    missing: str


@dataclass(frozen=True)
class ExpandedAtlas:
    strips: tuple[ExpandedStrip, ...]
    gluings: tuple[ExpandedGluing, ...]
    window: int = 0
    dropped: tuple[DroppedGluing, ...] = ()
    source: Optional[StripedAtlas] = field(default=None, compare=False, repr=False)

    def strip(self, sid: str) -> ExpandedStrip:
        return self._strip_index[sid]

    @cached_property
    def _strip_index(self) -> dict:
        return {s.id: s for s in self.strips}

    @cached_property
    def report(self) -> "ValidationReport":
        return validate(self)

    def intervals(self) -> Iterator[BoundaryInterval]:
        for s in self.strips:
            yield from s.top
            yield from s.bottom

    @cached_property
    def gluing_of(self) -> dict:
        """Map interval ref -> (gluing, role) with role 'x' or 'y'."""
        out = {}
        for g in self.gluings:
            out.setdefault(g.x.ref, (g, "x"))
            out.setdefault(g.y.ref, (g, "y"))
        return out

    def side_is_crowded(self, strip: str, side: int) -> bool:
        """True if the full (unwindowed) side carries two or more intervals."""
        if self.source is not None:
            spec = self.source.strip(strip).side(side)
            if spec.families or len(spec.intervals) >= 2:
                return True
        return len(self.strip(strip).side(side)) >= 2


def window_indices(window: int) -> range:
    """Family indices instantiated at ``window``: ``-W <= n < W`` (2W members)."""
    if window < 0:
        raise ValueError("window must be non-negative")
    return range(-window, window)


def _expand_side(strip: ModelStrip, spec: SideSpec, indices: range) -> tuple:
    out = [
        BoundaryInterval(strip.id, spec.side, ("i", k), iv)
        for k, iv in enumerate(spec.intervals)
    ]
    for fam in sorted(spec.families, key=lambda f: f.name):
        for n in indices:
            out.append(BoundaryInterval(strip.id, spec.side, ("f", fam.name, n), fam.member(n)))
    return tuple(out)


def _lookup(table: dict, atlas: StripedAtlas, ref: BoundaryRef, n, gluing: Gluing):
    try:
        strip = atlas.strip(ref.strip)
    except KeyError:
        raise UnresolvableRef(f"gluing {gluing.id}: unknown strip {ref.strip!r}", gluing.id, n)
    spec = strip.side(ref.side)
    if ref.family is None:
        if not 0 <= ref.index < len(spec.intervals):
            raise UnresolvableRef(f"gluing {gluing.id}: {ref} has no such interval", gluing.id, n)
    elif spec.family(ref.family) is None:
        raise UnresolvableRef(f"gluing {gluing.id}: {ref} names an unknown family", gluing.id, n)
    return table.get((ref.strip, ref.side, ref.key(n)))


def expand(atlas: StripedAtlas, window: int = 0, strict: bool = False) -> ExpandedAtlas:
    """Instantiate every family of ``atlas`` at indices ``-window <= n < window``.

    A family gluing member whose two references fall on different sides of
    the window edge is dropped and recorded in ``ExpandedAtlas.dropped``;
    with ``strict=True`` it raises :class:`UnresolvableRef` instead.
    """
    indices = window_indices(window)
    strips = []
    table = {}
    for s in atlas.strips:
        es = ExpandedStrip(s.id, _expand_side(s, s.top, indices), _expand_side(s, s.bottom, indices), s.span)
        for bi in es.top + es.bottom:
            table[bi.ref] = bi
        strips.append(es)

    gluings = []
    dropped = []
    for g in atlas.gluings:
        members = indices if g.family else [None]
        for n in members:
            x = _lookup(table, atlas, g.x, n, g)
            y = _lookup(table, atlas, g.y, n, g)
            if x is None and y is None and g.family:
                continue
            if x is None or y is None:
                missing = str(g.x if x is None else g.y)
                if strict or not g.family:
                    raise UnresolvableRef(
                        f"gluing {g.id} at n={n}: {missing} is outside the window", g.id, n
                    )
                dropped.append(DroppedGluing(g.id, n, missing))
                continue
            gid = g.id if n is None else f"{g.id}[{n}]"
            gluings.append(ExpandedGluing(gid, x, y, g.reversed, g.family, n, g.span))
    return ExpandedAtlas(tuple(strips), tuple(gluings), window, tuple(dropped), atlas)


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    location: str
    span: Optional[SourceSpan] = None

    def as_dict(self) -> dict:
        return {
            "code": self.code,
            "message": self.message,
            "location": self.location,
            "span": None if self.span is None else [self.span.line, self.span.column],
        }


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.violations

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}


def _interval_span(atlas: ExpandedAtlas, bi: BoundaryInterval):
    if bi.interval.span is not None:
        return bi.interval.span
    if atlas.source is not None and bi.key[0] == "f":
        fam = atlas.source.strip(bi.strip).side(bi.side).family(bi.key[1])
        if fam is not None:
            return fam.span
    return None


def validate(expanded: ExpandedAtlas) -> ValidationReport:
    """Check every striped-atlas axiom on a finite atlas.

    Violations are returned, never raised.
    """
    out: list[Violation] = []
    if expanded.source is not None:
        for s in expanded.source.strips:
            for spec in (s.top, s.bottom):
                for fam in spec.families:
                    for problem in fam.form_violations():
                        loc = f"{s.id}.{SIDE_NAMES[spec.side]}.{fam.name}"
                        out.append(Violation("family_form", f"{loc}: {problem}", loc, fam.span))

    for s in expanded.strips:
        for side in (TOP, BOTTOM):
            items = s.side(side)
            for bi in items:
                if not bi.interval.well_ordered:
                    out.append(Violation(
                        "interval_order",
                        f"{bi.label}: interval {bi.interval} has lo >= hi",
                        bi.label, _interval_span(expanded, bi),
                    ))
            for i, a in enumerate(items):
                for b in items[i + 1:]:
                    if a.interval.overlaps(b.interval):
                        out.append(Violation(
                            "overlap",
                            f"{a.label} {a.interval} and {b.label} {b.interval} are not disjoint",
                            a.label, _interval_span(expanded, b) or _interval_span(expanded, a),
                        ))

    uses: dict[tuple, list] = {}
    for g in expanded.gluings:
        if g.x.ref == g.y.ref:
            out.append(Violation("self_pair", f"gluing {g.id} pairs {g.x.label} with itself", g.id, g.span))
        uses.setdefault(g.x.ref, []).append((g, "X"))
        uses.setdefault(g.y.ref, []).append((g, "Y"))
    for ref, users in uses.items():
        if len(users) > 1:
            if any(g.x.ref == g.y.ref for g, _ in users) and len({g.id for g, _ in users}) == 1:
                continue
            bi = users[0][0].x if users[0][1] == "X" else users[0][0].y
            who = ", ".join(f"{g.id} as {role}" for g, role in users)
            out.append(Violation(
                "role_disjointness",
                f"{bi.label} is used more than once ({who})",
                bi.label, users[-1][0].span,
            ))
    return ValidationReport(tuple(out))


def require_valid(expanded: ExpandedAtlas) -> None:
    if not expanded.report.valid:
        raise InvalidAtlas(expanded.report)


# --------------------------------------------------------------------------
# seams and the gluing maps


@dataclass(frozen=True)
class SeamDescriptor:
    beta: str
    x: BoundaryInterval
    y: BoundaryInterval
    reversed: bool = False

    @property
    def alpha(self) -> str:
        return self.x.strip

    @property
    def alpha_prime(self) -> str:
        return self.y.strip

    @property
    def epsilon(self) -> int:
        return self.x.side

    @property
    def epsilon_prime(self) -> int:
        return self.y.side

    @property
    def is_loop(self) -> bool:
        return self.alpha == self.alpha_prime


def seams(expanded: ExpandedAtlas) -> list[SeamDescriptor]:
    require_valid(expanded)
    return [SeamDescriptor(g.id, g.x, g.y, g.reversed) for g in expanded.gluings]


# Every open interval is mapped onto (0, 1) by an increasing rational
# homeomorphism; composing two of these gives an affine map whenever one
# exists (same boundedness type), and a canonical rational one otherwise.

def _to_unit(iv: Interval, t: Fraction) -> Fraction:
    lo, hi = iv.lo, iv.hi
    if is_finite(lo) and is_finite(hi):
        return (t - lo) / (hi - lo)
    if is_finite(lo):
        d = t - lo
        return d / (1 + d)
    if is_finite(hi):
        return 1 / (1 + (hi - t))
    return Fraction(1, 2) + t / (2 * (1 + abs(t)))


def _from_unit(iv: Interval, u: Fraction) -> Fraction:
    lo, hi = iv.lo, iv.hi
    if is_finite(lo) and is_finite(hi):
        return lo + u * (hi - lo)
    if is_finite(lo):
        return lo + u / (1 - u)
    if is_finite(hi):
        return hi - (1 / u - 1)
    v = 2 * u - 1
    return v / (1 - abs(v))


def _transfer(src: Interval, dst: Interval, t, flip: bool) -> Fraction:
    t = Fraction(t)
    if not src.contains(t):
        raise OutOfInterval(f"{t} is not inside {src}")
    u = _to_unit(src, t)
    if flip:
        u = 1 - u
    return _from_unit(dst, u)


def gamma(seam: SeamDescriptor, y) -> Fraction:
    """Image in X of a point ``y`` of Y under the seam's gluing map.

    Increasing unless the seam is reversed.  Between intervals of the same
    shape this is the affine bijection (a translation, or negation plus
    translation, in the unbounded cases).
    """
    return _transfer(seam.y.interval, seam.x.interval, y, seam.reversed)


def gamma_inverse(seam: SeamDescriptor, x) -> Fraction:
    return _transfer(seam.x.interval, seam.y.interval, x, seam.reversed)
