"""Exit criteria of the build, one test per criterion.

Each test records a PASS/FAIL line, printed in the pytest summary.
Run alone with ``pytest tests/test_acceptance.py``.
"""

import random
import time
from pathlib import Path

import pytest

from conftest import ACCEPTANCE_LINES
from oracles import closed_reduced_loops, naive_reduce, random_order_reduce
from stripes import catalog
from stripes.atlas import expand
from stripes.dsl import StripeSyntaxError, parse, parse_file, serialize
from stripes.foliation import singular_report
from stripes.generate import random_atlas
from stripes.graph import SurfaceGraph, build_graph, graph_invariants, orientable
from stripes.groupoid import BasedGroupoid, EdgeWord, compose, identity, inverse, presentation, reduce
from stripes.vankampen import (
    build_cover, check_conditions, choose_cut_set, cover_graph, intersections, nerve_oracle, verify_phi_iso,
)

pytestmark = pytest.mark.acceptance

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
RANDOM_SEED = 2026
RANDOM_CASES = 500


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def random_suite():
    rng = random.Random(RANDOM_SEED)
    return [random_atlas(rng, max_strips=8, max_seams=12) for _ in range(RANDOM_CASES)]


def test_criterion_1_xy():
    t0 = time.perf_counter()
    e = expand(catalog.xy())
    g = build_graph(e)
    four_cycle = len(g.vertices) == 4 and len(g.edges) == 4 and all(g.degree(v) == 2 for v in g.vertices)
    inv = graph_invariants(g)
    r = verify_phi_iso(e, 8)
    elapsed = time.perf_counter() - t0
    ok = (four_cycle and inv.rank == 1 and len(inv.components) == 1 and r.confirmed
          and len(r.objects) == 8 and r.ranks_g == [1] and r.ranks_z == [1] and elapsed < 1.0)
    record(1, ok, f"4-cycle={four_cycle} rank={inv.rank} iso={r.confirmed} objects={len(r.objects)} "
                  f"ranks={r.ranks_g}/{r.ranks_z} time={elapsed:.3f}s")


def test_criterion_2_ladder():
    rows, ok = [], True
    for w in range(1, 6):
        t0 = time.perf_counter()
        e = expand(catalog.ladder(), w)
        g = build_graph(e)
        rank = graph_invariants(g).rank
        r = verify_phi_iso(e, 8)
        elapsed = time.perf_counter() - t0
        good = len(g.edges) == 2 * w and rank == 2 * w - 1 and r.confirmed and elapsed < 1.0
        ok &= good
        rows.append(f"W={w}:E={len(g.edges)},rank={rank},iso={r.confirmed},{elapsed:.2f}s")
    record(2, ok, " ".join(rows))


def test_criterion_3_trivial_and_self_gluing():
    plane = expand(catalog.plane())
    rp = verify_phi_iso(plane)
    plane_ok = (graph_invariants(build_graph(plane)).rank == 0 and rp.confirmed
                and rp.objects == {"A": "s[A]"} and rp.ranks_z == [0])
    ann, mob = expand(catalog.annulus()), expand(catalog.mobius())
    ann_ok = graph_invariants(build_graph(ann)).rank == 1 and orientable(ann) and verify_phi_iso(ann).confirmed
    mob_ok = graph_invariants(build_graph(mob)).rank == 1 and not orientable(mob) and verify_phi_iso(mob).confirmed
    record(3, plane_ok and ann_ok and mob_ok, f"plane={plane_ok} annulus={ann_ok} mobius={mob_ok}")


def test_criterion_4_random_theorem_suite():
    t0 = time.perf_counter()
    failures = []
    loops = parallel = 0
    for k, atlas in enumerate(random_suite()):
        e = expand(atlas)
        g = build_graph(e)
        loops += any(x.is_loop for x in g.edges)
        cover, cut = build_cover(e), choose_cut_set(e)
        conditions = check_conditions(cover, cut)
        inter = intersections(cover, cut)
        one_each = all(len(c.cut_points) == 1 for c in inter.z_pairs + inter.g_pairs)
        h = cover_graph(cover, cut)
        chi = h.euler_characteristic == g.euler_characteristic
        nerve = nerve_oracle(cover, cut)[1]
        r = verify_phi_iso(e, 8)
        if not (conditions.passed and one_each and chi and nerve and r.confirmed):
            failures.append(k)
        pairs = [frozenset((x.tail, x.head)) for x in g.edges if not x.is_loop]
        parallel += len(pairs) != len(set(pairs))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 60.0
    record(4, ok, f"cases={RANDOM_CASES} failures={len(failures)} with_loops={loops} "
                  f"with_parallel={parallel} time={elapsed:.1f}s")


def _walks(graph, start, max_len):
    letters = []

    def dfs(v):
        yield tuple(letters), v
        if len(letters) == max_len:
            return
        for eid, d in graph.incidence[v]:
            letters.append((eid, d))
            yield from dfs(graph.edge[eid].endpoints(d)[1])
            letters.pop()

    yield from dfs(start)


def test_criterion_5_groupoid_laws():
    rng = random.Random(5)
    small = [
        SurfaceGraph.from_edges([(f"e{i}", i, (i + 1) % 6) for i in range(6)]),
        SurfaceGraph.from_edges([(f"p{i}", "a", "b") for i in range(3)]),
        SurfaceGraph.from_edges([("l", 0, 0), ("t", 0, 1)]),
        SurfaceGraph.from_edges([("a", 0, 1), ("b", 1, 2), ("c", 2, 3), ("d", 3, 0), ("x", 0, 2)]),
    ]
    confluence_bad = words = 0
    for g in small:
        for v in g.vertices:
            for letters, end in _walks(g, v, 10):
                words += 1
                w = reduce(EdgeWord(g, v, end, letters)).letters
                if w != naive_reduce(letters) or (words % 7 == 0 and w != random_order_reduce(letters, rng)):
                    confluence_bad += 1

    axioms_bad = 0
    for i in range(10_000):
        g = small[i % len(small)]

        def walk(start):
            v, out = start, []
            for _ in range(rng.randint(0, 6)):
                eid, d = rng.choice(g.incidence[v])
                out.append((eid, d))
                v = g.edge[eid].endpoints(d)[1]
            return reduce(EdgeWord(g, start, v, out))

        f = walk(rng.choice(g.vertices))
        h1 = walk(f.end)
        h2 = walk(h1.end)
        ok = (compose(compose(f, h1), h2) == compose(f, compose(h1, h2))
              and compose(identity(g, f.start), f) == f == compose(f, identity(g, f.end))
              and compose(f, inverse(f)) == identity(g, f.start))
        axioms_bad += not ok

    tree_bad = 0
    for _ in range(50):
        n = rng.randint(1, 8)
        t = SurfaceGraph.from_edges([(f"t{i}", rng.randrange(i), i) for i in range(1, n)], [0])
        gp = BasedGroupoid(t, t.vertices)
        tree_bad += sum(len(gp.hom(p, q, n)) != 1 for p in t.vertices for q in t.vertices)

    digon = SurfaceGraph.from_edges([("p0", "a", "b"), ("p1", "a", "b")])
    gp = BasedGroupoid(digon, ("a",))
    power_bad = 0
    for k in range(1, 6):
        loops = gp.hom("a", "a", 2 * k)
        power_bad += len(loops) != 2 * k + 1
        power_bad += {w.letters for w in loops} != closed_reduced_loops(digon, "a", 2 * k)
    power_bad += presentation(gp).ranks != [1]

    ok = not (confluence_bad or axioms_bad or tree_bad or power_bad)
    record(5, ok, f"confluence words={words} bad={confluence_bad}; triples=10000 bad={axioms_bad}; "
                  f"tree hom-sets bad={tree_bad}; loop powers bad={power_bad}")


def test_criterion_6_local_finiteness():
    atlases = [catalog.xy(), catalog.plane(), catalog.annulus(), catalog.mobius(), catalog.ladder()]
    expanded = [expand(catalog.ladder(), w) for w in range(1, 6)] + [expand(a) for a in random_suite()]
    good = sum(singular_report(a).certificate.locally_finite for a in atlases)
    good += sum(singular_report(e).certificate.locally_finite for e in expanded)
    total = len(atlases) + len(expanded)
    seams_singular = all(
        any(leaf.seam == s.id for leaf, _ in singular_report(e).leaves) for e in expanded[:5] for s in e.gluings
    )
    counter = singular_report(catalog.accumulating()).certificate
    points = [o.point for o in counter.obstructions]
    counter_ok = not counter.locally_finite and points == [0] and counter.obstructions[0].interval == "(-1, 1/4)"
    ok = good == total and counter_ok and seams_singular
    record(6, ok, f"certified {good}/{total}; seams singular={seams_singular}; "
                  f"counterexample fails at {[str(p) for p in points]}")


def test_criterion_7_parser():
    from test_dsl import MALFORMED, _mutate, random_source_atlas

    corpus = sorted(CORPUS.glob("*.stripe"))
    rt_bad = sum(parse(serialize(parse_file(p))) != parse_file(p) for p in corpus)
    rng = random.Random(7)
    rt_bad += sum(parse(serialize(a)) != a for a in (random_source_atlas(rng) for _ in range(1000)))

    pos_bad = 0
    for src, line, col, fragment in MALFORMED:
        try:
            parse(src)
            pos_bad += 1
        except StripeSyntaxError as exc:
            e = exc.errors[0]
            pos_bad += (e.span.line, e.span.column) != (line, col) or fragment not in e.message

    rng = random.Random(11)
    seeds = [p.read_bytes() for p in corpus]
    panics = 0
    for i in range(10_000):
        data = _mutate(rng, rng.choice(seeds)) if i % 2 == 0 else bytes(
            rng.randrange(256) for _ in range(rng.randint(0, 60)))
        try:
            parse(data)
        except StripeSyntaxError:
            pass
        except Exception:
            panics += 1
    ok = not (rt_bad or pos_bad or panics) and len(MALFORMED) == 20
    record(7, ok, f"round-trip corpus={len(corpus)}+1000 bad={rt_bad}; malformed=20 mispositioned={pos_bad}; "
                  f"fuzz=10000 panics={panics}")
