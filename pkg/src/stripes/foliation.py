"""Leaves of the canonical foliation and the local-finiteness certificate."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Union

from .atlas import (
    SIDE_NAMES,
    BoundaryInterval,
    ExpandedAtlas,
    StripedAtlas,
    expand,
    format_rational,
)

# scan range for family members that might contain an accumulation point
MEMBER_SCAN = 32


class FoliationError(Exception):
    pass


class BadLevel(FoliationError):
    pass


class UnknownLeaf(FoliationError):
    pass


@dataclass(frozen=True)
class Interior:
    """The leaf R x {level} of a strip, with -1 < level < 1."""

    strip: str
    level: Fraction

    def __post_init__(self):
        object.__setattr__(self, "level", Fraction(self.level))
        if not -1 < self.level < 1:
            raise BadLevel(f"interior level {self.level} is not inside (-1, 1)")

    def __str__(self) -> str:
        return f"{self.strip} x {{{format_rational(self.level)}}}"


@dataclass(frozen=True)
class BoundaryLeaf:
    """The image of a boundary interval; ``seam`` is set iff it is glued."""

    interval: BoundaryInterval
    seam: Optional[str] = None

    def __str__(self) -> str:
        tail = f" (seam {self.seam})" if self.seam else ""
        return f"{self.interval.label} {self.interval.interval}{tail}"


Leaf = Union[Interior, BoundaryLeaf]


def boundary_leaf(expanded: ExpandedAtlas, bi: BoundaryInterval) -> BoundaryLeaf:
    """The leaf through ``bi``; a seam is always named by its X interval."""
    hit = expanded.gluing_of.get(bi.ref)
    if hit is None:
        return BoundaryLeaf(bi)
    g = hit[0]
    return BoundaryLeaf(g.x, g.id)


# --------------------------------------------------------------------------
# saturation


@dataclass(frozen=True, order=True)
class LevelPart:
    lo: Fraction
    hi: Fraction
    lo_closed: bool = True
    hi_closed: bool = True

    def contains(self, t) -> bool:
        return (self.lo < t or (self.lo_closed and t == self.lo)) and (
            t < self.hi or (self.hi_closed and t == self.hi)
        )

    def __str__(self) -> str:
        if self.lo == self.hi:
            return f"{{{format_rational(self.lo)}}}"
        lb = "[" if self.lo_closed else "("
        rb = "]" if self.hi_closed else ")"
        return f"{lb}{format_rational(self.lo)}, {format_rational(self.hi)}{rb}"


def point(t) -> LevelPart:
    t = Fraction(t)
    return LevelPart(t, t)


def open_interval(lo, hi) -> LevelPart:
    return LevelPart(Fraction(lo), Fraction(hi), False, False)


def _normalize(parts) -> tuple[LevelPart, ...]:
    items = []
    for p in parts:
        lo, hi = Fraction(p.lo), Fraction(p.hi)
        if lo > hi or (lo == hi and not (p.lo_closed and p.hi_closed)):
            raise BadLevel(f"empty level part {p}")
        if lo < -1 or hi > 1 or (lo == -1 and p.lo_closed) or (hi == 1 and p.hi_closed):
            raise BadLevel(f"level part {p} leaves (-1, 1)")
        items.append(LevelPart(lo, hi, p.lo_closed, p.hi_closed))
    items.sort(key=lambda p: (p.lo, not p.lo_closed))
    merged: list[LevelPart] = []
    for p in items:
        if merged:
            q = merged[-1]
            touching = p.lo < q.hi or (p.lo == q.hi and (p.lo_closed or q.hi_closed))
            if touching:
                if p.hi > q.hi or (p.hi == q.hi and p.hi_closed):
                    merged[-1] = LevelPart(q.lo, p.hi, q.lo_closed, p.hi_closed)
                continue
        merged.append(p)
    return tuple(merged)


@dataclass(frozen=True)
class LeafSet:
    """All interior leaves of ``strip`` whose level lies in ``levels``."""

    strip: str
    levels: tuple[LevelPart, ...]

    def __contains__(self, leaf) -> bool:
        return isinstance(leaf, Interior) and leaf.strip == self.strip and any(
            p.contains(leaf.level) for p in self.levels
        )

    @property
    def finite(self) -> bool:
        return all(p.lo == p.hi for p in self.levels)

    def leaves(self) -> Iterator[Interior]:
        if not self.finite:
            raise FoliationError("an interval of levels holds uncountably many leaves")
        for p in self.levels:
            yield Interior(self.strip, p.lo)

    def __str__(self) -> str:
        return f"{self.strip} x " + " u ".join(map(str, self.levels))


def saturate(strip: str, levels) -> LeafSet:
    """Union of the leaves meeting ``strip x levels``; levels must lie in (-1, 1)."""
    if isinstance(levels, LeafSet):
        levels = levels.levels
    if isinstance(levels, LevelPart):
        levels = (levels,)
    return LeafSet(strip, _normalize(levels))


# --------------------------------------------------------------------------
# classification

IS_SEAM = "isSeam"
SHARES_SIDE = "sharesSide"


@dataclass(frozen=True)
class LeafClass:
    reasons: tuple[str, ...] = ()

    @property
    def singular(self) -> bool:
        return bool(self.reasons)

    @property
    def regular(self) -> bool:
        return not self.reasons

    def __str__(self) -> str:
        return "regular" if self.regular else "singular(" + ", ".join(self.reasons) + ")"


def _known(expanded: ExpandedAtlas, bi: BoundaryInterval) -> bool:
    try:
        strip = expanded.strip(bi.strip)
    except KeyError:
        return False
    return bi in strip.side(bi.side)


def classify_leaf(expanded: ExpandedAtlas, leaf: Leaf) -> LeafClass:
    """Singular iff the leaf is a seam or shares its side with another interval."""
    if isinstance(leaf, Interior):
        try:
            expanded.strip(leaf.strip)
        except KeyError:
            raise UnknownLeaf(f"no strip {leaf.strip!r}")
        return LeafClass()
    if not isinstance(leaf, BoundaryLeaf) or not _known(expanded, leaf.interval):
        raise UnknownLeaf(f"{leaf} is not a leaf of this atlas")
    bi = leaf.interval
    hit = expanded.gluing_of.get(bi.ref)
    reasons = []
    sides = [bi]
    if hit is not None:
        reasons.append(IS_SEAM)
        sides = [hit[0].x, hit[0].y]
    if any(expanded.side_is_crowded(b.strip, b.side) for b in sides):
        reasons.append(SHARES_SIDE)
    return LeafClass(tuple(reasons))


# --------------------------------------------------------------------------
# local finiteness


@dataclass(frozen=True)
class Obstruction:
    strip: str
    side: int
    point: Fraction
    inside: str  # label of the interval containing the accumulation point
    interval: str

    def __str__(self) -> str:
        return (f"{self.strip}.{SIDE_NAMES[self.side]}: endpoints accumulate at "
                f"{format_rational(self.point)}, inside {self.inside} {self.interval}")

    def as_dict(self) -> dict:
        return {
            "strip": self.strip,
            "side": SIDE_NAMES[self.side],
            "accumulation_point": format_rational(self.point),
            "inside": self.inside,
            "interval": self.interval,
        }


@dataclass(frozen=True)
class Certificate:
    accumulation_points: tuple  # (strip, side, point) for every finite limit
    obstructions: tuple[Obstruction, ...] = ()

    @property
    def locally_finite(self) -> bool:
        return not self.obstructions

    def as_dict(self) -> dict:
        return {
            "locally_finite": self.locally_finite,
            "accumulation_points": [
                {"strip": s, "side": SIDE_NAMES[e], "point": format_rational(p)}
                for s, e, p in self.accumulation_points
            ],
            "obstructions": [o.as_dict() for o in self.obstructions],
        }


def certify(atlas: StripedAtlas) -> Certificate:
    """Check that no endpoint limit of a side lies inside an interval of that side.

    Affine families have no finite limit; a geometric family converges to
    its constant terms.  Explicit intervals are tested exactly, family
    members for ``-MEMBER_SCAN <= n < MEMBER_SCAN``.
    """
    points, bad = [], []
    for s in atlas.strips:
        for spec in (s.top, s.bottom):
            limits = sorted({c for fam in spec.families for c in fam.accumulation_points()})
            for c in limits:
                points.append((s.id, spec.side, c))
                hit = _containing(s.id, spec, c)
                if hit is not None:
                    bad.append(Obstruction(s.id, spec.side, c, *hit))
    return Certificate(tuple(points), tuple(bad))


def _containing(sid: str, spec, c: Fraction) -> Optional[tuple[str, str]]:
    head = f"{sid}.{SIDE_NAMES[spec.side]}"
    for k, iv in enumerate(spec.intervals):
        if iv.contains(c):
            return f"{head}[{k}]", str(iv)
    for fam in spec.families:
        for n in range(-MEMBER_SCAN, MEMBER_SCAN):
            iv = fam.member(n)
            if iv.contains(c):
                return f"{head}.{fam.name}[{n}]", str(iv)
    return None


@dataclass(frozen=True)
class SingularReport:
    leaves: tuple[tuple[BoundaryLeaf, LeafClass], ...]
    certificate: Certificate

    def as_dict(self) -> dict:
        return {
            "singular_leaves": [
                {"leaf": str(leaf), "reasons": list(cls.reasons)} for leaf, cls in self.leaves
            ],
            "certificate": self.certificate.as_dict(),
        }


def singular_report(atlas: Union[StripedAtlas, ExpandedAtlas], window: int = 0) -> SingularReport:
    """Singular boundary leaves and the local-finiteness certificate.

    A ``StripedAtlas`` is certified symbolically and its leaves are listed at
    ``window``; an ``ExpandedAtlas`` is certified through its source atlas.
    """
    if isinstance(atlas, StripedAtlas):
        source, expanded = atlas, expand(atlas, window)
    else:
        source, expanded = atlas.source, atlas
    seen, leaves = set(), []
    for bi in expanded.intervals():
        leaf = boundary_leaf(expanded, bi)
        if leaf in seen:
            continue
        seen.add(leaf)
        cls = classify_leaf(expanded, leaf)
        if cls.singular:
            leaves.append((leaf, cls))
    cert = certify(source) if source is not None else Certificate(())
    return SingularReport(tuple(leaves), cert)
