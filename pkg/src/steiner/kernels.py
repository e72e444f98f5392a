"""Search kernels: perfect matchings and exact cover (dancing links)."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, islice
from typing import Callable, Iterator, NamedTuple, Sequence

from .core import Factor, Factorization, PackedGraph


@dataclass(frozen=True)
class ExactCoverInstance:
    item_count: int
    options: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        opts = tuple(tuple(o) for o in self.options)
        for o in opts:
            if not o:
                raise ValueError("options must be non-empty")
            if len(set(o)) != len(o) or any(not 0 <= i < self.item_count for i in o):
                raise ValueError(f"bad option {o}")
        object.__setattr__(self, "options", opts)

    def dump(self) -> str:
        """Plain-text ``items/options`` listing for debugging."""
        lines = [f"items {self.item_count}", f"options {len(self.options)}"]
        lines += [" ".join(map(str, o)) for o in self.options]
        return "\n".join(lines) + "\n"


class CoverCount(NamedTuple):
    count: int
    aborted: bool


def perfect_matchings(g: PackedGraph) -> list[Factor]:
    """All perfect matchings of ``g`` in lexicographic order."""
    n = g.n
    if n % 2:
        return []
    rows = g.rows
    out = []
    stack: list[tuple[int, int]] = []

    def rec(free):
        if not free:
            out.append(tuple(stack))
            return
        x = (free & -free).bit_length() - 1
        cand = rows[x] & free
        while cand:
            low = cand & -cand
            y = low.bit_length() - 1
            stack.append((x, y))
            rec(free & ~(1 << x) & ~low)
            stack.pop()
            cand ^= low

    rec((1 << n) - 1)
    return out


def iter_exact_covers(inst: ExactCoverInstance) -> Iterator[tuple[int, ...]]:
    """Yield exact covers lazily (dancing links), each a sorted tuple of option indices.

    The item with fewest remaining options is branched on, ties going to the
    lowest item index, so the order of solutions is deterministic.
    """
    nitems = inst.item_count
    if nitems == 0:
        yield ()
        return
    # node 0 is the root header, nodes 1..nitems the item headers
    L = list(range(-1, nitems))
    R = list(range(1, nitems + 2))
    L[0] = nitems
    R[nitems] = 0
    U = list(range(nitems + 1))
    D = list(range(nitems + 1))
    C = list(range(nitems + 1))
    size = [0] * (nitems + 1)
    row = [-1] * (nitems + 1)
    for r, opt in enumerate(inst.options):
        first = None
        for item in opt:
            c = item + 1
            node = len(C)
            C.append(c)
            row.append(r)
            U.append(U[c])
            D.append(c)
            D[U[c]] = node
            U[c] = node
            size[c] += 1
            if first is None:
                first = node
                L.append(node)
                R.append(node)
            else:
                L.append(L[first])
                R.append(first)
                R[L[first]] = node
                L[first] = node

    def cover(c):
        L[R[c]] = L[c]
        R[L[c]] = R[c]
        i = D[c]
        while i != c:
            j = R[i]
            while j != i:
                U[D[j]] = U[j]
                D[U[j]] = D[j]
                size[C[j]] -= 1
                j = R[j]
            i = D[i]

    def uncover(c):
        i = U[c]
        while i != c:
            j = L[i]
            while j != i:
                size[C[j]] += 1
                U[D[j]] = j
                D[U[j]] = j
                j = L[j]
            i = U[i]
        L[R[c]] = c
        R[L[c]] = c

    solution: list[int] = []

    def search():
        if R[0] == 0:
            yield tuple(sorted(row[i] for i in solution))
            return
        c = R[0]
        best = c
        while c != 0:
            if size[c] < size[best]:
                best = c
            c = R[c]
        c = best
        if size[c] == 0:
            return
        cover(c)
        r = D[c]
        while r != c:
            solution.append(r)
            j = R[r]
            while j != r:
                cover(C[j])
                j = R[j]
            yield from search()
            j = L[r]
            while j != r:
                uncover(C[j])
                j = L[j]
            solution.pop()
            r = D[r]
        uncover(c)

    yield from search()


def exact_cover_enumerate(inst: ExactCoverInstance,
                          visitor: Callable[[tuple[int, ...]], object] | None = None) -> CoverCount:
    """Count exact covers, passing each to ``visitor``; a ``False`` return stops the search."""
    count = 0
    for sol in iter_exact_covers(inst):
        count += 1
        if visitor is not None and visitor(sol) is False:
            return CoverCount(count, True)
    return CoverCount(count, False)


def _edge_index(g: PackedGraph) -> dict[tuple[int, int], int]:
    return {e: i for i, e in enumerate(g.edges())}


def factorization_instance(g: PackedGraph, factors: Sequence[Factor]) -> ExactCoverInstance:
    idx = _edge_index(g)
    return ExactCoverInstance(len(idx), tuple(tuple(idx[e] for e in f) for f in factors))


def iter_one_factorizations(g: PackedGraph, factors: Sequence[Factor] | None = None) -> Iterator[Factorization]:
    """Yield the 1-factorizations of ``g`` lazily, each a sorted tuple of factors."""
    if factors is None:
        factors = perfect_matchings(g)
    factors = list(factors)
    for sol in iter_exact_covers(factorization_instance(g, factors)):
        yield tuple(sorted(factors[i] for i in sol))


def one_factorizations(g: PackedGraph, factors: Sequence[Factor] | None = None,
                       limit: int | None = None) -> list[Factorization]:
    """All 1-factorizations of ``g`` (the first ``limit`` of them if given)."""
    return list(islice(iter_one_factorizations(g, factors), limit))


def triangles(g: PackedGraph) -> list[tuple[int, int, int]]:
    rows = g.rows
    out = []
    for a in range(g.n):
        for b in g.neighbors(a):
            if b <= a:
                continue
            common = rows[a] & rows[b] & ~((1 << (b + 1)) - 1)
            while common:
                low = common & -common
                out.append((a, b, low.bit_length() - 1))
                common ^= low
    return out


def triangle_decompositions(g: PackedGraph, limit: int | None = None) -> list[tuple[tuple[int, int, int], ...]]:
    """All partitions of the edge set of ``g`` into triangles, as sorted block tuples."""
    idx = _edge_index(g)
    tris = triangles(g)
    inst = ExactCoverInstance(len(idx), tuple(tuple(idx[e] for e in combinations(t, 2)) for t in tris))
    out = []

    def visit(sol):
        out.append(tuple(tris[i] for i in sol))
        if limit is not None and len(out) >= limit:
            return False

    exact_cover_enumerate(inst, visit)
    return out
