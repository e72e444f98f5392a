import math
from itertools import permutations
import random

import pytest
from hypothesis import given, strategies as st

from steiner.core import (FANO, STS9, Configuration, PackedGraph, ResourceError, TripleSystem,
                          complement, compose, cycle_string, double_fano, element_order_multiset,
                          example_108, example_108_group, format_configuration, format_design,
                          group_from_generators, identity, inverse, is_admissible_order,
                          is_factorization, orbits, parse_configuration, parse_cycles, parse_design,
                          perm_order, random_sts, underlying_graph, validate_configuration,
                          validate_sts)

perms = st.integers(1, 9).flatmap(lambda n: st.permutations(list(range(n))).map(tuple))


@given(perms)
def test_inverse_composes_to_identity(p):
    assert compose(p, inverse(p)) == identity(len(p))
    assert compose(inverse(p), p) == identity(len(p))


@given(perms)
def test_cycle_string_round_trip(p):
    assert parse_cycles(cycle_string(p), len(p)) == p


def test_compose_applies_right_factor_first():
    p, q = (1, 2, 0), (0, 2, 1)
    assert compose(p, q) == tuple(p[q[x]] for x in range(3))


def test_perm_order():
    assert perm_order(parse_cycles("(0 1)(2 3 4)", 6)) == 6
    assert perm_order(identity(4)) == 1


def test_admissible_orders():
    assert [v for v in range(1, 30) if is_admissible_order(v)] == [1, 3, 7, 9, 13, 15, 19, 21, 25, 27]
    with pytest.raises(ValueError):
        is_admissible_order(0)


def test_group_closure_symmetric_group():
    g = group_from_generators(5, [(1, 2, 3, 4, 0), (1, 0, 2, 3, 4)])
    assert g.order == 120
    a, b = g.elements[17], g.elements[88]
    assert compose(a, b) in g


def test_group_cap():
    with pytest.raises(ResourceError):
        group_from_generators(8, [(1, 2, 3, 4, 5, 6, 7, 0), (1, 0, 2, 3, 4, 5, 6, 7)], cap=1000)


def test_orbits():
    assert orbits(6, [(1, 0, 2, 3, 5, 4)]) == [[0, 1], [2], [3], [4, 5]]


def test_validate_sts():
    assert validate_sts(FANO) is None
    assert validate_sts(STS9) is None
    broken = TripleSystem(7, FANO.blocks[:-1])
    assert "not covered" in validate_sts(broken)
    with pytest.raises(ValueError):
        validate_sts(TripleSystem(7, [(0, 1, 9)]))


def test_random_sts_valid():
    rng = random.Random(5)
    for v in (7, 9, 13, 15, 19, 21, 25):
        s = random_sts(v, rng)
        assert validate_sts(s) is None
        assert len(s.blocks) == v * (v - 1) // 6


def test_validate_configuration():
    assert validate_configuration(double_fano()) is None
    c = Configuration(7, 3, FANO.blocks[:-1] + ((0, 1, 2),))
    assert validate_configuration(c) is not None


def test_example_108():
    s = example_108()
    assert len(s.blocks) == 70 and validate_sts(s) is None
    g = example_108_group()
    assert g.order == 108
    assert element_order_multiset(g) == {1: 1, 2: 27, 3: 26, 6: 54}
    for p in g.generators:
        assert s.relabel(p) == s


def test_packed_graph_basics():
    k5 = PackedGraph.complete(5)
    assert k5.edge_count() == 10 and k5.degrees() == [4] * 5
    assert complement(k5) == PackedGraph.empty(5)
    with pytest.raises(ValueError):
        PackedGraph(2, (2, 0))
    with pytest.raises(ResourceError):
        PackedGraph.empty(65)


def test_graph6_round_trip():
    rng = random.Random(3)
    for n in (1, 5, 14, 30):
        edges = [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < 0.4]
        g = PackedGraph.from_edges(n, edges)
        assert PackedGraph.from_graph6(g.to_graph6()) == g
    assert PackedGraph.complete(4).to_graph6() == "C~"


def test_underlying_graph_of_double_fano():
    g = underlying_graph(double_fano())
    assert g.degrees() == [6] * 14
    assert complement(g).degrees() == [7] * 14


def test_text_formats_round_trip():
    s = example_108()
    assert parse_design(format_design(s)) == s
    c = double_fano()
    assert parse_configuration(format_configuration(c)) == c
    with pytest.raises(ValueError):
        parse_design("sts v=7 b=2\n0 1 3\n")
    with pytest.raises(ValueError):
        parse_design(format_configuration(c))


def test_is_factorization():
    k4 = PackedGraph.complete(4)
    fact = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))
    assert is_factorization(k4, fact)
    assert not is_factorization(k4, fact[:2])


def test_labelled_fano_count():
    seen = {tuple(sorted(tuple(sorted(p[x] for x in b)) for b in FANO.blocks))
            for p in permutations(range(7))}
    assert len(seen) == math.factorial(7) // 168 == 30
