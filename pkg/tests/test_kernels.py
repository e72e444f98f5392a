import random
from itertools import combinations

import pytest

from steiner.core import PackedGraph, is_factor, is_factorization
from steiner.kernels import (ExactCoverInstance, exact_cover_enumerate, iter_exact_covers,
                             one_factorizations, perfect_matchings, triangle_decompositions, triangles)


def random_graph(n, p, rng):
    return PackedGraph.from_edges(n, [(a, b) for a, b in combinations(range(n), 2) if rng.random() < p])


def brute_matchings(g):
    """Perfect matchings by listing all pairings of the vertex set."""
    def pairings(pts):
        if not pts:
            yield ()
            return
        a = pts[0]
        for i in range(1, len(pts)):
            rest = pts[1:i] + pts[i + 1:]
            for tail in pairings(rest):
                yield ((a, pts[i]),) + tail
    if g.n % 2:
        return []
    return sorted(tuple(sorted(m)) for m in pairings(list(range(g.n))) if all(g.has_edge(*e) for e in m))


def brute_covers(inst):
    out = []
    k = len(inst.options)
    for mask in range(1 << k):
        chosen = [i for i in range(k) if mask >> i & 1]
        items = [x for i in chosen for x in inst.options[i]]
        if len(items) == inst.item_count and len(set(items)) == inst.item_count:
            out.append(tuple(chosen))
    return sorted(out)


def test_matchings_of_complete_graphs():
    assert [len(perfect_matchings(PackedGraph.complete(n))) for n in (2, 4, 6, 8, 10)] == [1, 3, 15, 105, 945]
    assert perfect_matchings(PackedGraph.complete(5)) == []


def test_matchings_equal_brute_force():
    rng = random.Random(1)
    for _ in range(60):
        n = rng.choice([2, 4, 6, 8, 10])
        g = random_graph(n, rng.uniform(0.3, 0.9), rng)
        got = perfect_matchings(g)
        assert got == brute_matchings(g)
        assert all(is_factor(g, m) for m in got)


def test_exact_cover_equals_brute_force():
    rng = random.Random(2)
    for _ in range(80):
        items = rng.randint(1, 10)
        opts = []
        for _ in range(rng.randint(1, 14)):
            size = rng.randint(1, min(4, items))
            opts.append(tuple(rng.sample(range(items), size)))
        inst = ExactCoverInstance(items, opts)
        sols = sorted(iter_exact_covers(inst))
        assert sols == brute_covers(inst)
        assert exact_cover_enumerate(inst).count == len(sols)


def test_exact_cover_abort_and_empty():
    inst = ExactCoverInstance(2, [(0,), (1,), (0, 1)])
    assert exact_cover_enumerate(inst).count == 2
    res = exact_cover_enumerate(inst, lambda sol: False)
    assert res == (1, True)
    assert exact_cover_enumerate(ExactCoverInstance(0, [])).count == 1
    assert exact_cover_enumerate(ExactCoverInstance(3, [(0, 1)])).count == 0


def test_instance_validation():
    with pytest.raises(ValueError):
        ExactCoverInstance(3, [(0, 0)])
    with pytest.raises(ValueError):
        ExactCoverInstance(3, [(5,)])
    with pytest.raises(ValueError):
        ExactCoverInstance(3, [()])
    assert ExactCoverInstance(2, [(0, 1)]).dump() == "items 2\noptions 1\n0 1\n"


@pytest.mark.parametrize("n, count", [(2, 1), (4, 1), (6, 6), (8, 6240)])
def test_factorizations_of_complete_graphs(n, count):
    g = PackedGraph.complete(n)
    facts = one_factorizations(g)
    assert len(facts) == count == len(set(facts))
    assert all(is_factorization(g, f) for f in facts[:50])


def test_factorizations_equal_brute_force():
    rng = random.Random(3)
    checked = 0
    while checked < 25:
        n = rng.choice([4, 6, 8])
        g = random_graph(n, rng.uniform(0.5, 1.0), rng)
        degs = set(g.degrees())
        if len(degs) != 1 or 0 in degs:
            continue
        d = degs.pop()
        ms = perfect_matchings(g)
        if len(ms) > 40:
            continue
        brute = sorted(tuple(sorted(c)) for c in combinations(ms, d) if is_factorization(g, c))
        assert sorted(one_factorizations(g)) == brute
        checked += 1


def test_factorization_limit():
    assert len(one_factorizations(PackedGraph.complete(8), limit=10)) == 10


def test_triangle_decompositions():
    assert len(triangles(PackedGraph.complete(5))) == 10
    assert len(triangle_decompositions(PackedGraph.complete(7))) == 30
    assert len(triangle_decompositions(PackedGraph.complete(9))) == 840
    assert triangle_decompositions(PackedGraph.complete(5)) == []
