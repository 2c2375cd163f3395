"""Random valid striped atlases for property tests."""

from __future__ import annotations

import random
from fractions import Fraction

from .atlas import (
    BOTTOM,
    NEG_INF,
    POS_INF,
    TOP,
    BoundaryRef,
    Gluing,
    Interval,
    ModelStrip,
    SideSpec,
    StripedAtlas,
)


def _side_intervals(rng: random.Random, max_intervals: int) -> tuple[Interval, ...]:
    k = rng.randint(0, max_intervals)
    if k == 0:
        return ()
    cuts = sorted({Fraction(rng.randint(-40, 40), rng.choice((1, 2, 3))) for _ in range(2 * k)})
    if len(cuts) < 2 * k:
        k = len(cuts) // 2
    cuts = cuts[: 2 * k]
    ends = [(cuts[2 * i], cuts[2 * i + 1]) for i in range(k)]
    if not ends:
        return (Interval(NEG_INF, POS_INF),) if rng.random() < 0.5 else ()
    if rng.random() < 0.3:
        ends[0] = (NEG_INF, ends[0][1])
    if rng.random() < 0.3:
        ends[-1] = (ends[-1][0], POS_INF)
    if k == 1 and rng.random() < 0.2:
        ends[0] = (NEG_INF, POS_INF)
    return tuple(Interval(lo, hi) for lo, hi in ends)


def random_atlas(rng: random.Random, max_strips: int = 8, max_seams: int = 12) -> StripedAtlas:
    """A finite valid atlas; loops, parallel seams and reversals all occur."""
    n = rng.randint(1, max_strips)
    strips = []
    refs = []
    for i in range(n):
        sid = f"A{i}"
        top = _side_intervals(rng, 3)
        bottom = _side_intervals(rng, 3)
        strips.append(ModelStrip(sid, SideSpec(TOP, top), SideSpec(BOTTOM, bottom)))
        refs += [BoundaryRef(sid, TOP, k) for k in range(len(top))]
        refs += [BoundaryRef(sid, BOTTOM, k) for k in range(len(bottom))]
    rng.shuffle(refs)
    m = rng.randint(0, min(max_seams, len(refs) // 2))
    gluings = tuple(
        Gluing(f"g{j}", refs[2 * j], refs[2 * j + 1], rng.random() < 0.5) for j in range(m)
    )
    return StripedAtlas(tuple(strips), gluings)
