import random

import pytest
from hypothesis import given, settings, strategies as st

from steiner.analysis import classify_small_sts
from steiner.core import (FANO, STS9, ConsistencyError, ResourceError, TripleSystem, example_108,
                          random_sts)
from steiner.subsys import (brute_force_subsystems, closure, find_subsystems, intersection_stats,
                            subsystem_report)

S21 = random_sts(21, random.Random(4))


def test_closure_of_block_and_triangle():
    assert closure(FANO, FANO.blocks[0]) == frozenset(FANO.blocks[0])
    assert closure(FANO, [0, 1, 2]) == frozenset(range(7))
    assert closure(FANO, []) == frozenset()
    with pytest.raises(ValueError):
        closure(FANO, [9])


def test_closure_in_example_lands_on_subsystem():
    s = example_108()
    for w in find_subsystems(s, 7):
        a, b = w[0], w[1]
        c = next(x for x in w[2:] if x not in s.restrict([a, b]) and
                 not any({a, b, x} == set(blk) for blk in s.blocks))
        assert closure(s, [a, b, c]) == frozenset(w)


@settings(max_examples=60, deadline=None)
@given(st.sets(st.integers(0, 20), max_size=4), st.sets(st.integers(0, 20), max_size=3))
def test_closure_idempotent_and_monotone(x, y):
    cx = closure(S21, x)
    assert closure(S21, cx) == cx
    assert x <= cx
    assert cx <= closure(S21, x | y)


def test_whole_system_is_its_own_subsystem():
    assert find_subsystems(FANO, 7) == [tuple(range(7))]
    assert find_subsystems(STS9, 9) == [tuple(range(9))]
    with pytest.raises(ValueError):
        find_subsystems(FANO, 5)


def test_example_statistics():
    rep = subsystem_report(example_108())
    assert (rep.u, rep.i1, rep.i3) == (9, 9, 27)
    assert len(rep.subsystems9) >= 1


def test_find_equals_brute_force_on_example():
    s = example_108()
    assert find_subsystems(s, 7) == brute_force_subsystems(s, 7)


def test_sts13_have_no_subsystem_of_order_seven():
    for s in classify_small_sts(13):
        assert find_subsystems(s, 7) == [] == brute_force_subsystems(s, 7)


def test_find_equals_brute_force_on_all_sts15(sts15):
    for s in sts15:
        assert find_subsystems(s, 7) == brute_force_subsystems(s, 7)


def test_find_equals_brute_force_on_random_systems():
    rng = random.Random(12)
    for v in (15, 15, 19):
        s = random_sts(v, rng)
        assert find_subsystems(s, 7) == brute_force_subsystems(s, 7)
        assert find_subsystems(s, 9) == brute_force_subsystems(s, 9)


def test_intersection_stats():
    assert intersection_stats([range(7)]) == (1, 0, 0)
    assert intersection_stats([]) == (0, 0, 0)
    wilson = [range(0, 7), range(7, 14), range(14, 21)]
    assert intersection_stats(wilson) == (3, 0, 0)
    with pytest.raises(ConsistencyError):
        intersection_stats([range(7), range(5, 12)])


def test_brute_force_limit():
    with pytest.raises(ResourceError):
        brute_force_subsystems(TripleSystem(45, []), 9, max_subsets=1000)
