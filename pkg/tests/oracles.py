"""Independent reference computations used to check the library."""

import random
from fractions import Fraction
from itertools import product

import networkx as nx


def gf2_rank(rows):
    """Rank over GF(2) of a list of bit-rows given as ints."""
    basis = []
    for r in rows:
        for b in basis:
            r = min(r, r ^ b)
        if r:
            basis.append(r)
    return len(basis)


def cycle_rank_gf2(vertices, edges):
    """dim H_1 = E - rank of the GF(2) incidence matrix (loops give zero columns)."""
    index = {v: i for i, v in enumerate(vertices)}
    cols = []
    for tail, head in edges:
        cols.append(0 if tail == head else (1 << index[tail]) | (1 << index[head]))
    return len(edges) - gf2_rank(cols)


def nx_multigraph(g):
    m = nx.MultiGraph()
    m.add_nodes_from(g.vertices)
    for e in g.edges:
        m.add_edge(e.tail, e.head, key=e.id)
    return m


def naive_reduce(letters):
    """Cancel the leftmost inverse pair until none is left."""
    w = list(letters)
    changed = True
    while changed:
        changed = False
        for i in range(len(w) - 1):
            if w[i][0] == w[i + 1][0] and w[i][1] == -w[i + 1][1]:
                del w[i:i + 2]
                changed = True
                break
    return tuple(w)


def random_order_reduce(letters, rng: random.Random):
    """Cancel a randomly chosen inverse pair until none is left."""
    w = list(letters)
    while True:
        spots = [i for i in range(len(w) - 1) if w[i][0] == w[i + 1][0] and w[i][1] == -w[i + 1][1]]
        if not spots:
            return tuple(w)
        i = rng.choice(spots)
        del w[i:i + 2]


def all_walks(graph, start, max_len):
    """Every walk (reduced or not) from ``start`` with at most ``max_len`` letters."""
    out = [((), start)]
    frontier = [((), start)]
    for _ in range(max_len):
        nxt = []
        for letters, v in frontier:
            for e in graph.edges:
                for d in (1, -1):
                    a, b = (e.tail, e.head) if d > 0 else (e.head, e.tail)
                    if a == v:
                        nxt.append((letters + ((e.id, d),), b))
        out += nxt
        frontier = nxt
    return out


def closed_reduced_loops(graph, v, max_len):
    """Distinct free reductions of closed walks at ``v`` of length <= max_len."""
    return {naive_reduce(w) for w, end in all_walks(graph, v, max_len) if end == v}


def phi_reference(x_beta, y_beta, eps, eps2, t):
    """The four-piece path through a seam, as (side flag, x, level) before gluing."""
    t = Fraction(t)
    if t <= Fraction(-1, 2):
        return ("a", 2 * (1 + t) * x_beta, (1 + t) * eps)
    if t <= 0:
        return ("a", x_beta, (1 + t) * eps)
    if t <= Fraction(1, 2):
        return ("a'", y_beta, (1 - t) * eps2)
    return ("a'", 2 * (1 - t) * y_beta, (1 - t) * eps2)


def words_over(alphabet, max_len):
    for n in range(max_len + 1):
        yield from product(alphabet, repeat=n)
