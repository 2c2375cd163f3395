import random
from fractions import Fraction
from itertools import permutations, product

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from oracles import cycle_rank_gf2, nx_multigraph
from stripes import catalog
from stripes.atlas import expand, seams
from stripes.generate import random_atlas
from stripes.graph import (
    BadParameter,
    SurfaceGraph,
    TooLarge,
    automorphism_count,
    build_graph,
    components,
    graph_invariants,
    isomorphic,
    orientable,
    seam_sign,
    signed_two_coloring,
    subdivide,
    to_dot,
)


@st.composite
def multigraphs(draw, max_v=6, max_e=8):
    n = draw(st.integers(1, max_v))
    vs = [f"v{i}" for i in range(n)]
    m = draw(st.integers(0, max_e))
    ends = draw(st.lists(st.tuples(st.sampled_from(vs), st.sampled_from(vs)), min_size=m, max_size=m))
    return SurfaceGraph.from_edges([(f"e{k}", a, b) for k, (a, b) in enumerate(ends)], vs)


def test_xy_graph_is_a_four_cycle():
    g = build_graph(expand(catalog.xy()))
    assert g.vertices == ("Q1", "Q2", "Q3", "Q4")
    assert all(g.degree(v) == 2 for v in g.vertices)
    inv = graph_invariants(g)
    assert (inv.rank, inv.euler_characteristic, len(inv.components)) == (1, 0, 1)
    assert nx.is_isomorphic(nx_multigraph(g), nx.cycle_graph(4))


@pytest.mark.parametrize("w", range(0, 6))
def test_ladder_rank(w):
    g = build_graph(expand(catalog.ladder(), w))
    assert len(g.edges) == 2 * w
    assert graph_invariants(g).rank == max(2 * w - 1, 0)


@given(multigraphs())
def test_rank_matches_gf2_oracle(g):
    assert graph_invariants(g).rank == cycle_rank_gf2(g.vertices, [(e.tail, e.head) for e in g.edges])


@given(multigraphs())
def test_components_match_networkx(g):
    ours = sorted(sorted(map(str, c)) for c in components(g))
    theirs = sorted(sorted(map(str, c)) for c in nx.connected_components(nx_multigraph(g)))
    assert ours == theirs


@given(multigraphs())
def test_euler_characteristic_sums_over_components(g):
    inv = graph_invariants(g)
    assert inv.euler_characteristic == sum(c.euler_characteristic for c in inv.components)
    assert inv.rank == sum(inv.ranks)


def _brute_automorphisms(g):
    vs, es = list(g.vertices), list(g.edges)
    count = 0
    for vp in permutations(vs):
        vmap = dict(zip(vs, vp))
        for ep in permutations(es):
            if all({vmap[e.tail], vmap[e.head]} == {f.tail, f.head} for e, f in zip(es, ep)):
                count += 1
    return count


def test_automorphism_counts():
    assert automorphism_count(build_graph(expand(catalog.xy()))) == 8
    assert automorphism_count(SurfaceGraph.from_edges([("a", 1, 2), ("b", 1, 2)])) == 4
    assert automorphism_count(SurfaceGraph(("A",), ())) == 1


@given(multigraphs(max_v=4, max_e=5))
def test_automorphism_count_matches_brute_force(g):
    assert automorphism_count(g) == _brute_automorphisms(g)


@given(multigraphs(max_v=5, max_e=6), st.randoms(use_true_random=False))
def test_isomorphic_agrees_with_networkx(g, r):
    vs = list(g.vertices)
    shuffled = vs[:]
    r.shuffle(shuffled)
    ren = dict(zip(vs, shuffled))
    h = SurfaceGraph.from_edges([(f"x{e.id}", ren[e.tail], ren[e.head]) for e in g.edges], vs)
    iso = isomorphic(g, h)
    assert iso is not None
    for e in g.edges:
        f = h.edge[iso.edge_map[e.id]]
        assert {iso.vertex_map[e.tail], iso.vertex_map[e.head]} == {f.tail, f.head}


@given(multigraphs(max_v=4, max_e=5), multigraphs(max_v=4, max_e=5))
def test_isomorphism_decision_matches_networkx(g, h):
    expected = nx.is_isomorphic(nx_multigraph(g), nx_multigraph(h))
    assert (isomorphic(g, h) is not None) == expected


def test_isomorphism_guard():
    big = SurfaceGraph.from_edges([(k, 0, 1) for k in range(15)])
    with pytest.raises(TooLarge):
        isomorphic(big, big)


def test_subdivide_labels_and_counts():
    g = build_graph(expand(catalog.annulus()))
    s = subdivide(g, {"b": [Fraction(-1, 10), Fraction(1, 10)]})
    assert set(s.vertices) == {"A", ("b", Fraction(-1, 10)), ("b", Fraction(1, 10))}
    assert [e.id for e in s.edges] == [("b", 0), ("b", 1), ("b", 2)]
    assert s.euler_characteristic == g.euler_characteristic
    with pytest.raises(BadParameter):
        subdivide(g, {"b": [1]})
    with pytest.raises(BadParameter):
        subdivide(g, {"b": [Fraction(1, 2), 0]})
    with pytest.raises(BadParameter):
        subdivide(g, {"nope": [0]})


@given(multigraphs())
def test_subdivision_keeps_rank(g):
    marks = {e.id: [Fraction(0)] for e in g.edges}
    assert graph_invariants(subdivide(g, marks)).rank == graph_invariants(g).rank


def test_orientability_of_catalog():
    assert orientable(expand(catalog.annulus()))
    assert not orientable(expand(catalog.mobius()))
    assert orientable(expand(catalog.plane()))
    assert orientable(expand(catalog.xy()))
    assert orientable(expand(catalog.ladder(), 3))


def test_seam_sign_table():
    assert seam_sign(same_side=False, reversed_=False) == 1
    assert seam_sign(same_side=True, reversed_=True) == 1
    assert seam_sign(same_side=True, reversed_=False) == -1
    assert seam_sign(same_side=False, reversed_=True) == -1


def _brute_orientable(g, signs):
    for colors in product((1, -1), repeat=len(g.vertices)):
        c = dict(zip(g.vertices, colors))
        if all(c[e.head] == c[e.tail] * signs[e.id] for e in g.edges):
            return True
    return False


def test_orientability_matches_brute_force():
    rng = random.Random(3)
    for _ in range(200):
        e = expand(random_atlas(rng, max_strips=5, max_seams=6))
        g = build_graph(e)
        signs = {s.beta: seam_sign(s.epsilon == s.epsilon_prime, s.reversed) for s in seams(e)}
        assert orientable(e) == _brute_orientable(g, signs)
        assert (signed_two_coloring(g, signs) is not None) == orientable(e)


def test_dot_export():
    text = to_dot(build_graph(expand(catalog.xy())))
    assert text.startswith("graph G {")
    assert "Q1 -- Q2 [label=h1];" in text
    dot = to_dot(build_graph(expand(catalog.ladder(), 1)))
    assert 'S0 -- S1 [label="s[-1]"];' in dot


def test_graph_rejects_dangling_edges():
    from stripes.graph import Edge, GraphError
    with pytest.raises(GraphError):
        SurfaceGraph(("a",), (Edge("e", "a", "b"),))
