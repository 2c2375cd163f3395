"""Named atlases used throughout the tests, docs and CLI corpus."""

from __future__ import annotations

from fractions import Fraction

from .atlas import (
    AFFINE,
    BOTTOM,
    GEOMETRIC,
    NEG_INF,
    POS_INF,
    TOP,
    BoundaryRef,
    Gluing,
    Interval,
    IntervalFamily,
    ModelStrip,
    SideSpec,
    StripedAtlas,
)

FULL_LINE = Interval(NEG_INF, POS_INF)


def _full_strip(sid: str, top: bool = True, bottom: bool = True) -> ModelStrip:
    return ModelStrip(
        sid,
        SideSpec(TOP, (FULL_LINE,) if top else ()),
        SideSpec(BOTTOM, (FULL_LINE,) if bottom else ()),
    )


def plane() -> StripedAtlas:
    """A single open strip: the plane."""
    return StripedAtlas((ModelStrip("A"),))


def xy() -> StripedAtlas:
    """Level sets of f(x, y) = xy on the punctured plane.

    The four open quadrants are strips; the four half-axes are seams.  Each
    quadrant's top line is glued to the next quadrant's bottom line.
    """
    names = ["Q1", "Q2", "Q3", "Q4"]
    strips = tuple(_full_strip(n) for n in names)
    gluings = tuple(
        Gluing(f"h{i + 1}", BoundaryRef(names[i], TOP, 0), BoundaryRef(names[(i + 1) % 4], BOTTOM, 0))
        for i in range(4)
    )
    return StripedAtlas(strips, gluings)


def ladder() -> StripedAtlas:
    """R^2 minus Z x 0: two strips glued along (n, n+1) for every integer n."""
    upper = IntervalFamily("U", AFFINE, 0, 1, 1, 1)
    lower = IntervalFamily("L", AFFINE, 0, 1, 1, 1)
    strips = (
        ModelStrip("S0", SideSpec(TOP, (), (upper,)), SideSpec(BOTTOM)),
        ModelStrip("S1", SideSpec(TOP), SideSpec(BOTTOM, (), (lower,))),
    )
    gluing = Gluing(
        "s",
        BoundaryRef("S0", TOP, family="U"),
        BoundaryRef("S1", BOTTOM, family="L"),
        family="F",
    )
    return StripedAtlas(strips, (gluing,))


def _self_glued(reversed_: bool) -> StripedAtlas:
    return StripedAtlas(
        (_full_strip("A"),),
        (Gluing("b", BoundaryRef("A", TOP, 0), BoundaryRef("A", BOTTOM, 0), reversed_),),
    )


def annulus() -> StripedAtlas:
    """Top line glued to bottom line by an increasing map: an open annulus."""
    return _self_glued(False)


def mobius() -> StripedAtlas:
    """Top line glued to bottom line by a decreasing map: an open Moebius band."""
    return _self_glued(True)


def accumulating() -> StripedAtlas:
    """A side whose endpoints accumulate at 0 inside a retained interval.

    The geometric family (1/2**(n+1), 1/2**n) converges to 0, which lies in
    the explicit interval (-1, 1/4).  Not a model strip.
    """
    fam = IntervalFamily("G", GEOMETRIC, 0, Fraction(1, 2), 0, 1, ratio=Fraction(1, 2))
    top = SideSpec(TOP, (Interval(-1, Fraction(1, 4)),), (fam,))
    return StripedAtlas((ModelStrip("A", top, SideSpec(BOTTOM)),))


ATLASES = {
    "plane": plane,
    "xy": xy,
    "ladder": ladder,
    "annulus": annulus,
    "mobius": mobius,
}
