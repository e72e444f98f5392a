"""Subsystems of triple systems and their intersection statistics."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

from .core import ConsistencyError, ResourceError, TripleSystem


def _third_masks(s: TripleSystem) -> list[list[int]]:
    t = s.pair_table()
    return [[(1 << c) if c >= 0 else 0 for c in row] for row in t]


def _closure_mask(third, seed: int, limit: int | None = None) -> int:
    """Closure of the bitmask ``seed``; stops once it grows past ``limit`` points."""
    closed = 0
    pending = seed
    members = []
    while pending:
        low = pending & -pending
        p = low.bit_length() - 1
        pending ^= low
        row = third[p]
        add = 0
        for q in members:
            add |= row[q]
        members.append(p)
        closed |= low
        pending |= add & ~closed
        if limit is not None and (closed | pending).bit_count() > limit:
            return closed | pending
    return closed


def _points(mask: int) -> tuple[int, ...]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return tuple(out)


def closure(s: TripleSystem, seed: Iterable[int]) -> frozenset[int]:
    """Least superset of ``seed`` containing the third point of every pair inside it."""
    mask = 0
    for x in seed:
        if not 0 <= x < s.v:
            raise ValueError(f"point {x} out of range")
        mask |= 1 << x
    return frozenset(_points(_closure_mask(_third_masks(s), mask)))


def find_subsystems(s: TripleSystem, w: int = 7, third=None) -> list[tuple[int, ...]]:
    """All w-point subsystems, found by closing non-collinear triples.

    A subsystem of order 7 or 9 is generated by any three of its points
    that do not form a block, so every one turns up as such a closure.
    """
    if w not in (7, 9):
        raise ValueError("only subsystems of order 7 and 9 are supported")
    if third is None:
        third = _third_masks(s)
    v = s.v
    found: list[int] = []
    for a in range(v):
        for b in range(a + 1, v):
            ab = (1 << a) | (1 << b)
            skip = third[a][b]
            for c in range(b + 1, v):
                bit = 1 << c
                if bit == skip:
                    continue
                trip = ab | bit
                if any(trip & f == trip for f in found):
                    continue
                mask = _closure_mask(third, trip, w)
                if mask.bit_count() == w:
                    found.append(mask)
    return sorted(_points(f) for f in found)


def intersection_stats(subsystems7: Sequence[Iterable[int]]) -> tuple[int, int, int]:
    """(U, I1, I3): number of subsystems and pairs meeting in 1 and in 3 points."""
    sets = [frozenset(x) for x in subsystems7]
    i1 = i3 = 0
    for x, y in combinations(sets, 2):
        k = len(x & y)
        if k == 1:
            i1 += 1
        elif k == 3:
            i3 += 1
        elif k != 0:
            raise ConsistencyError(f"subsystems {sorted(x)} and {sorted(y)} meet in {k} points")
    return len(sets), i1, i3


def brute_force_subsystems(s: TripleSystem, w: int, max_subsets: int = 10**7) -> list[tuple[int, ...]]:
    """Scan every w-subset; an independent check on find_subsystems."""
    if comb(s.v, w) > max_subsets:
        raise ResourceError(f"C({s.v},{w}) subsets exceed the limit {max_subsets}")
    t = s.pair_table()
    out = []
    for sub in combinations(range(s.v), w):
        inside = set(sub)
        if all(t[a][b] in inside for a, b in combinations(sub, 2)):
            out.append(sub)
    return out


@dataclass(frozen=True)
class SubsystemReport:
    subsystems7: tuple[tuple[int, ...], ...]
    subsystems9: tuple[tuple[int, ...], ...]
    u: int
    i1: int
    i3: int


def subsystem_report(s: TripleSystem, with_nine: bool = True) -> SubsystemReport:
    third = _third_masks(s)
    s7 = find_subsystems(s, 7, third)
    s9 = find_subsystems(s, 9, third) if with_nine else []
    u, i1, i3 = intersection_stats(s7)
    return SubsystemReport(tuple(s7), tuple(s9), u, i1, i3)
