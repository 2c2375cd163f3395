import random

import pytest
from hypothesis import given, strategies as st

from oracles import closed_reduced_loops, cycle_rank_gf2, naive_reduce, random_order_reduce
from stripes.graph import SurfaceGraph
from stripes.groupoid import (
    BasedGroupoid,
    BasepointsMissComponent,
    EdgeWord,
    EndpointMismatch,
    GraphMap,
    IdCollision,
    IllFormedMap,
    MalformedWord,
    PairGroupoid,
    compose,
    coproduct,
    ends,
    free_reduce,
    identity,
    induced_functor_check,
    inverse,
    iter_reduced_words,
    presentation,
    reduce,
    spanning_forest,
)


def cycle(n, prefix="e"):
    return SurfaceGraph.from_edges([(f"{prefix}{i}", i, (i + 1) % n) for i in range(n)])


def digon(k=2):
    return SurfaceGraph.from_edges([(f"p{i}", "a", "b") for i in range(k)])


# small graphs with at most 6 edges for the exhaustive confluence check
SMALL = {
    "cycle6": cycle(6),
    "theta": digon(3),
    "loop_with_tail": SurfaceGraph.from_edges([("l", 0, 0), ("t", 0, 1)]),
    "path6": SurfaceGraph.from_edges([(f"t{i}", i, i + 1) for i in range(6)]),
    "square_chord": SurfaceGraph.from_edges([("a", 0, 1), ("b", 1, 2), ("c", 2, 3), ("d", 3, 0), ("x", 0, 2)]),
}


def _all_walks(graph, start, max_len):
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


@pytest.mark.parametrize("name", sorted(SMALL))
def test_reduce_is_confluent_exhaustively(name):
    g = SMALL[name]
    rng = random.Random(name)
    max_len = 10
    checked = 0
    for v in g.vertices:
        for letters, end in _all_walks(g, v, max_len):
            w = reduce(EdgeWord(g, v, end, letters))
            assert w.letters == naive_reduce(letters)
            assert w.is_reduced
            if checked % 7 == 0:
                assert random_order_reduce(letters, rng) == w.letters
            checked += 1
    assert checked > 1000


def test_reduce_example_on_square():
    g = cycle(4)
    w = EdgeWord.walk(g, 0, [("e0", 1), ("e1", 1), ("e1", -1), ("e1", 1), ("e2", 1), ("e3", 1)])
    assert str(reduce(w)) == "e0 e1 e2 e3"


def test_compose_loop_twice():
    g = cycle(4)
    loop = EdgeWord.walk(g, 0, [(f"e{i}", 1) for i in range(4)])
    assert len(compose(loop, loop)) == 8
    assert compose(loop, inverse(loop)) == identity(g, 0)


def test_malformed_words():
    g = cycle(3)
    with pytest.raises(MalformedWord):
        EdgeWord(g, 0, 1, (("e1", 1),))
    with pytest.raises(MalformedWord):
        EdgeWord(g, 0, 1, (("zz", 1),))
    with pytest.raises(MalformedWord):
        EdgeWord(g, 0, 2, (("e0", 1),))
    with pytest.raises(MalformedWord):
        EdgeWord(g, 9, 9, ())


def test_compose_checks_endpoints():
    g = cycle(3)
    a = EdgeWord.walk(g, 0, [("e0", 1)])
    with pytest.raises(EndpointMismatch):
        compose(a, a)


def _random_walk(g, rng, start, max_len=6):
    v, letters = start, []
    for _ in range(rng.randint(0, max_len)):
        eid, d = rng.choice(g.incidence[v])
        letters.append((eid, d))
        v = g.edge[eid].endpoints(d)[1]
    return reduce(EdgeWord(g, start, v, letters))


def test_groupoid_axioms_on_random_triples():
    rng = random.Random(5)
    graphs = [cycle(4), digon(3), SMALL["square_chord"], SMALL["loop_with_tail"]]
    for i in range(10_000):
        g = graphs[i % len(graphs)]
        f = _random_walk(g, rng, rng.choice(g.vertices))
        h1 = _random_walk(g, rng, f.end)
        h2 = _random_walk(g, rng, h1.end)
        assert compose(compose(f, h1), h2) == compose(f, compose(h1, h2))
        assert compose(identity(g, f.start), f) == f == compose(f, identity(g, f.end))
        assert compose(f, inverse(f)) == identity(g, f.start)
        assert compose(inverse(f), f) == identity(g, f.end)
        assert inverse(inverse(f)) == f
        assert ends(compose(f, h1)) == (f.start, h1.end)


@st.composite
def trees(draw):
    n = draw(st.integers(1, 7))
    parents = [draw(st.integers(0, i - 1)) for i in range(1, n)]
    return SurfaceGraph.from_edges([(f"t{i}", p, i) for i, p in enumerate(parents, start=1)], [0])


@given(trees())
def test_tree_hom_sets_are_singletons(t):
    gp = BasedGroupoid(t, t.vertices)
    for p in t.vertices:
        for q in t.vertices:
            assert len(gp.hom(p, q, len(t.vertices))) == 1


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_loop_powers_on_a_digon(k):
    g = digon(2)
    gp = BasedGroupoid(g, ("a",))
    loops = gp.hom("a", "a", 2 * k)
    assert len(loops) == 2 * k + 1
    assert {w.letters for w in loops} == closed_reduced_loops(g, "a", 2 * k)
    assert presentation(gp).ranks == [1]


@pytest.mark.parametrize("c,k", [(1, 2), (3, 3), (4, 4), (5, 3)])
def test_loop_powers_on_longer_cycles(c, k):
    g = cycle(c)
    loops = BasedGroupoid(g, (0,)).hom(0, 0, 2 * k)
    assert len(loops) == 2 * (2 * k // c) + 1
    assert {w.letters for w in loops} == closed_reduced_loops(g, 0, 2 * k)


@st.composite
def multigraphs(draw):
    n = draw(st.integers(1, 5))
    m = draw(st.integers(0, 7))
    ends_ = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), min_size=m, max_size=m))
    return SurfaceGraph.from_edges([(f"e{i}", a, b) for i, (a, b) in enumerate(ends_)], range(n))


@given(multigraphs())
def test_presentation_rank_matches_gf2(g):
    pres = presentation(BasedGroupoid(g, g.vertices))
    assert sum(pres.ranks) == cycle_rank_gf2(g.vertices, [(e.tail, e.head) for e in g.edges])
    assert len(spanning_forest(g)) == len(g.vertices) - len(pres.components)


def test_presentation_is_deterministic():
    g = digon(4)
    a = presentation(BasedGroupoid(g, ("a",)))
    b = presentation(BasedGroupoid(g, ("a",)))
    assert a == b
    assert a.components[0].generators == ("p1", "p2", "p3")


def test_basepoints_must_meet_every_component():
    g = SurfaceGraph.from_edges([("e", 0, 1)], [0, 1, 2])
    with pytest.raises(BasepointsMissComponent):
        BasedGroupoid(g, (0,))


def test_coproduct_and_collisions():
    a = BasedGroupoid(cycle(3, "a"), (0,))
    b = BasedGroupoid(SurfaceGraph.from_edges([("b0", "x", "y")]), ("x",))
    both = coproduct([a, b])
    assert presentation(both).ranks == [1, 0]
    with pytest.raises(IdCollision):
        coproduct([a, a])


def test_pair_groupoid():
    pg = PairGroupoid({1, 2, 3})
    f, g = pg.hom(1, 2)[0], pg.hom(2, 3)[0]
    assert pg.compose(f, g) == (1, 3)
    assert pg.compose(f, pg.inverse(f)) == pg.identity(1)
    assert pg.hom(1, 9) == []


def test_iter_reduced_words_counts():
    # a vertex of degree d has d * (d - 1) ** (L - 1) reduced words of length L
    g = digon(3)
    words = [w for w in iter_reduced_words(g, "a", 4) if len(w) == 4]
    assert len(words) == 3 * 2 ** 3
    assert all(w.is_reduced for w in words)


def _fold_square_onto_digon():
    sq, dg = cycle(4), digon(2)
    vmap = {0: "a", 1: "b", 2: "a", 3: "b"}
    emap = {
        "e0": EdgeWord.walk(dg, "a", [("p0", 1)]),
        "e1": EdgeWord.walk(dg, "b", [("p1", -1)]),
        "e2": EdgeWord.walk(dg, "a", [("p0", 1)]),
        "e3": EdgeWord.walk(dg, "b", [("p1", -1)]),
    }
    return GraphMap(sq, dg, vmap, emap)


def test_graph_map_is_a_functor():
    gm = _fold_square_onto_digon()
    src = BasedGroupoid(gm.source, (0, 2))
    dst = BasedGroupoid(gm.target, ("a",))
    samples = list(src.morphisms(6))
    report = induced_functor_check(gm, src, dst, samples)
    assert report.passed and report.pairs_checked > 0
    sampled = induced_functor_check(gm, src, dst, samples, max_pairs=10, seed=1)
    assert sampled.pairs_checked == 10


def test_graph_map_rejects_bad_images():
    sq, dg = cycle(4), digon(2)
    with pytest.raises(IllFormedMap):
        GraphMap(sq, dg, {0: "a", 1: "b", 2: "a", 3: "b"}, {})
    bad = {f"e{i}": EdgeWord.walk(dg, "a", [("p0", 1), ("p0", -1)]) for i in range(4)}
    with pytest.raises(IllFormedMap):
        GraphMap(sq, dg, {0: "a", 1: "b", 2: "a", 3: "b"}, bad)


def test_free_reduce_on_letters():
    assert free_reduce([("a", 1), ("b", 1), ("b", -1), ("a", -1), ("c", 1)]) == (("c", 1),)
