"""Basic combinatorial objects: triple systems, configurations, graphs, groups.

Points are always ``0..n-1``. Blocks are stored as sorted tuples and block
collections as lexicographically sorted tuples of blocks, which gives the
total order used by every lex-min routine in the package.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import networkx as nx

Block = tuple[int, int, int]
Perm = tuple[int, ...]


class SteinerError(Exception):
    """Base class for errors raised by this package."""


class ResourceError(SteinerError):
    """A configured size cap was exceeded."""


class ConsistencyError(SteinerError):
    """An internal or data consistency check failed."""


def _norm_blocks(blocks: Iterable[Iterable[int]]) -> tuple[Block, ...]:
    return tuple(sorted({tuple(sorted(b)) for b in blocks}))


# --------------------------------------------------------------------------
# permutations

def identity(n: int) -> Perm:
    return tuple(range(n))


def is_permutation(p: Sequence[int]) -> bool:
    return sorted(p) == list(range(len(p)))


def compose(p: Perm, q: Perm) -> Perm:
    """``p∘q``: apply ``q`` first, then ``p``."""
    return tuple(p[x] for x in q)


def inverse(p: Perm) -> Perm:
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x] = i
    return tuple(inv)


def perm_order(p: Perm) -> int:
    seen = [False] * len(p)
    order = 1
    for i in range(len(p)):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        order = order * length // math.gcd(order, length)
    return order


def parse_cycles(text: str, n: int) -> Perm:
    """Parse cycle notation such as ``"(0, 9,19)(12,17)"`` into an image tuple."""
    img = list(range(n))
    for cyc in re.findall(r"\(([^()]*)\)", text):
        pts = [int(x) for x in re.split(r"[\s,]+", cyc.strip()) if x]
        for a, b in zip(pts, pts[1:] + pts[:1]):
            img[a] = b
    if not is_permutation(img):
        raise ValueError(f"not a permutation of degree {n}: {text!r}")
    return tuple(img)


def cycle_string(p: Perm) -> str:
    seen = set()
    out = []
    for i in range(len(p)):
        if i in seen or p[i] == i:
            continue
        cyc = [i]
        seen.add(i)
        j = p[i]
        while j != i:
            seen.add(j)
            cyc.append(j)
            j = p[j]
        out.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(out) or "()"


class PermutationGroup:
    """A permutation group given by generators, with its elements materialized.

    Elements are kept sorted lexicographically by image tuple.
    """

    def __init__(self, degree: int, generators: Sequence[Perm], elements: Sequence[Perm]):
        self.degree = degree
        self.generators = [tuple(g) for g in generators]
        self.elements = sorted(elements)
        self._element_set = frozenset(self.elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, p) -> bool:
        return tuple(p) in self._element_set

    def is_trivial(self) -> bool:
        return len(self.elements) == 1

    def subgroup(self, predicate) -> PermutationGroup:
        """Subgroup of the elements satisfying ``predicate`` (must be closed)."""
        elems = [g for g in self.elements if predicate(g)]
        return PermutationGroup(self.degree, [g for g in elems if g != identity(self.degree)], elems)

    def __repr__(self) -> str:
        return f"PermutationGroup(degree={self.degree}, order={self.order})"


def group_from_generators(n: int, generators: Iterable[Sequence[int]],
                          cap: int = 10**6) -> PermutationGroup:
    """Materialize the group generated by ``generators`` by breadth-first closure."""
    gens = []
    for g in generators:
        g = tuple(g)
        if len(g) != n or not is_permutation(g):
            raise ValueError(f"generator is not a permutation of degree {n}")
        if g != identity(n) and g not in gens:
            gens.append(g)
    ident = identity(n)
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for e in frontier:
            for g in gens:
                h = tuple(g[x] for x in e)
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
                    if len(seen) > cap:
                        raise ResourceError(f"group closure exceeds {cap} elements")
        frontier = nxt
    return PermutationGroup(n, gens, seen)


def element_order_multiset(group: PermutationGroup) -> Counter:
    return Counter(perm_order(g) for g in group.elements)


def orbits(n: int, generators: Iterable[Perm]) -> list[list[int]]:
    """Orbits of the points ``0..n-1`` under ``generators``, each sorted."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in generators:
        for x in range(n):
            a, b = find(x), find(g[x])
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for x in range(n):
        groups.setdefault(find(x), []).append(x)
    return sorted(groups.values())


# --------------------------------------------------------------------------
# designs and configurations

@dataclass(frozen=True)
class TripleSystem:
    v: int
    blocks: tuple[Block, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", _norm_blocks(self.blocks))

    def relabel(self, p: Sequence[int]) -> TripleSystem:
        return TripleSystem(self.v, [(p[a], p[b], p[c]) for a, b, c in self.blocks])

    def pair_table(self) -> list[list[int]]:
        """``t[x][y]`` is the third point of the block through ``x`` and ``y`` (or -1)."""
        t = [[-1] * self.v for _ in range(self.v)]
        for a, b, c in self.blocks:
            t[a][b] = t[b][a] = c
            t[a][c] = t[c][a] = b
            t[b][c] = t[c][b] = a
        return t

    def restrict(self, points: Iterable[int]) -> tuple[Block, ...]:
        pts = set(points)
        return tuple(b for b in self.blocks if pts.issuperset(b))


@dataclass(frozen=True)
class Configuration:
    """Blocks of size 3 on ``m`` points, ``r`` blocks per point, pairwise meeting in <= 1 point."""

    m: int
    r: int
    blocks: tuple[Block, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "blocks", _norm_blocks(self.blocks))

    def relabel(self, p: Sequence[int]) -> Configuration:
        return Configuration(self.m, self.r, [(p[a], p[b], p[c]) for a, b, c in self.blocks])


def is_admissible_order(v: int) -> bool:
    if v < 1:
        raise ValueError("order must be positive")
    return v % 6 in (1, 3)


def _check_range(n: int, blocks) -> None:
    for b in blocks:
        if len(set(b)) != 3 or any(not 0 <= x < n for x in b):
            raise ValueError(f"block {b} is not a 3-subset of 0..{n - 1}")


def validate_sts(s: TripleSystem) -> str | None:
    """Return ``None`` if ``s`` is a Steiner triple system, else a description of the first bad pair."""
    _check_range(s.v, s.blocks)
    count = Counter()
    for a, b, c in s.blocks:
        count[a, b] += 1
        count[a, c] += 1
        count[b, c] += 1
    for pair in combinations(range(s.v), 2):
        k = count[pair]
        if k == 0:
            return f"pair {pair} is not covered"
        if k > 1:
            return f"pair {pair} is covered {k} times"
    return None


def validate_configuration(c: Configuration) -> str | None:
    _check_range(c.m, c.blocks)
    deg = Counter(x for b in c.blocks for x in b)
    for x in range(c.m):
        if deg[x] != c.r:
            return f"point {x} lies in {deg[x]} blocks, expected {c.r}"
    seen = {}
    for b in c.blocks:
        for pair in combinations(b, 2):
            if pair in seen:
                return f"blocks {seen[pair]} and {b} share the pair {pair}"
            seen[pair] = b
    return None


def construct_from_group_orbits(n: int, generators: Sequence[Perm],
                                representatives: Iterable[Iterable[int]]) -> TripleSystem:
    """Union of the orbits of ``representatives`` under the group generated by ``generators``."""
    blocks = set()
    for rep in representatives:
        start = tuple(sorted(rep))
        stack = [start]
        blocks.add(start)
        while stack:
            b = stack.pop()
            for g in generators:
                img = tuple(sorted(g[x] for x in b))
                if img not in blocks:
                    blocks.add(img)
                    stack.append(img)
    return TripleSystem(n, blocks)


# --------------------------------------------------------------------------
# graphs

@dataclass(frozen=True)
class PackedGraph:
    """Undirected simple graph on at most 64 vertices, one bit row per vertex."""

    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if self.n > 64:
            raise ResourceError("PackedGraph supports at most 64 vertices")
        rows = tuple(self.rows)
        for i, r in enumerate(rows):
            if r >> i & 1:
                raise ValueError(f"loop at vertex {i}")
            for j in range(self.n):
                if (r >> j & 1) != (rows[j] >> i & 1):
                    raise ValueError(f"adjacency not symmetric at ({i}, {j})")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> PackedGraph:
        rows = [0] * n
        for a, b in edges:
            if a == b:
                raise ValueError("loops are not allowed")
            rows[a] |= 1 << b
            rows[b] |= 1 << a
        return cls(n, tuple(rows))

    @classmethod
    def empty(cls, n: int) -> PackedGraph:
        return cls(n, (0,) * n)

    @classmethod
    def complete(cls, n: int) -> PackedGraph:
        full = (1 << n) - 1
        return cls(n, tuple(full & ~(1 << i) for i in range(n)))

    def has_edge(self, a: int, b: int) -> bool:
        return bool(self.rows[a] >> b & 1)

    def degree(self, x: int) -> int:
        return self.rows[x].bit_count()

    def degrees(self) -> list[int]:
        return [r.bit_count() for r in self.rows]

    def neighbors(self, x: int) -> list[int]:
        r = self.rows[x]
        return [j for j in range(self.n) if r >> j & 1]

    def edges(self) -> list[tuple[int, int]]:
        """Edges ``(a, b)`` with ``a < b`` in lexicographic order."""
        return [(a, b) for a in range(self.n) for b in range(a + 1, self.n) if self.rows[a] >> b & 1]

    def edge_count(self) -> int:
        return sum(self.degrees()) // 2

    def relabel(self, p: Sequence[int]) -> PackedGraph:
        return PackedGraph.from_edges(self.n, [(p[a], p[b]) for a, b in self.edges()])

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges())
        return g

    def to_graph6(self) -> str:
        return nx.to_graph6_bytes(self.to_networkx(), header=False).decode().strip()

    @classmethod
    def from_graph6(cls, text: str) -> PackedGraph:
        g = nx.from_graph6_bytes(text.strip().encode())
        return cls.from_edges(g.number_of_nodes(), g.edges())


def complement(g: PackedGraph) -> PackedGraph:
    full = (1 << g.n) - 1
    return PackedGraph(g.n, tuple(full & ~r & ~(1 << i) for i, r in enumerate(g.rows)))


def underlying_graph(c: Configuration) -> PackedGraph:
    """The graph whose edges are the pairs covered by blocks of ``c``."""
    return PackedGraph.from_edges(c.m, [e for b in c.blocks for e in combinations(b, 2)])


# --------------------------------------------------------------------------
# 1-factors

Factor = tuple[tuple[int, int], ...]
Factorization = tuple[Factor, ...]


def normalize_factor(edges: Iterable[tuple[int, int]]) -> Factor:
    return tuple(sorted((min(a, b), max(a, b)) for a, b in edges))


def is_factor(g: PackedGraph, f: Factor) -> bool:
    used = set()
    for a, b in f:
        if not g.has_edge(a, b) or a in used or b in used:
            return False
        used.update((a, b))
    return len(used) == g.n


def is_factorization(g: PackedGraph, fs: Sequence[Factor]) -> bool:
    if not all(is_factor(g, f) for f in fs):
        return False
    edges = [e for f in fs for e in f]
    return len(edges) == len(set(edges)) and set(edges) == set(g.edges())


def relabel_factor(f: Factor, p: Sequence[int]) -> Factor:
    return normalize_factor((p[a], p[b]) for a, b in f)


# --------------------------------------------------------------------------
# text formats

def format_design(s: TripleSystem) -> str:
    lines = [f"sts v={s.v} b={len(s.blocks)}"]
    lines += [f"{a} {b} {c}" for a, b, c in s.blocks]
    return "\n".join(lines) + "\n"


def format_configuration(c: Configuration) -> str:
    lines = [f"cfg m={c.m} r={c.r} b={len(c.blocks)}"]
    lines += [f"{a} {b} {x}" for a, b, x in c.blocks]
    return "\n".join(lines) + "\n"


_HEADER = re.compile(r"^(sts|cfg)((?: [a-z]=\d+)+)$")


def _parse(text: str):
    lines = text.split("\n")
    m = _HEADER.match(lines[0])
    if not m:
        raise ValueError(f"bad header line: {lines[0]!r}")
    fields = dict(kv.split("=") for kv in m.group(2).split())
    blocks = [tuple(int(x) for x in ln.split()) for ln in lines[1:] if ln.strip()]
    if len(blocks) != int(fields["b"]):
        raise ValueError(f"header declares {fields['b']} blocks, found {len(blocks)}")
    return m.group(1), {k: int(v) for k, v in fields.items()}, blocks


def parse_design(text: str) -> TripleSystem:
    kind, fields, blocks = _parse(text)
    if kind != "sts":
        raise ValueError("not a design file")
    _check_range(fields["v"], blocks)
    return TripleSystem(fields["v"], blocks)


def parse_configuration(text: str) -> Configuration:
    kind, fields, blocks = _parse(text)
    if kind != "cfg":
        raise ValueError("not a configuration file")
    _check_range(fields["m"], blocks)
    return Configuration(fields["m"], fields["r"], blocks)


# --------------------------------------------------------------------------
# fixed small objects

FANO = TripleSystem(7, [(0, 1, 3), (1, 2, 4), (2, 3, 5), (3, 4, 6), (4, 5, 0), (5, 6, 1), (6, 0, 2)])

# AG(2,3): lines of the affine plane of order 3 on points 3*x + y.
STS9 = TripleSystem(9, [
    tuple(sorted(3 * ((x0 + t * dx) % 3) + (y0 + t * dy) % 3 for t in range(3)))
    for x0 in range(3) for y0 in range(3) for dx, dy in ((0, 1), (1, 0), (1, 1), (1, 2))
])

EXAMPLE_108_GENERATORS = (
    "(0, 9,19)(2,10,16)(3,4,20,8,7,18)(5,6,15,14,11,13)",
    "(0,3,4)(2,5,6)(7,8, 9,20,18,19)(10,15,13,16,11,14)(12,17)",
)
EXAMPLE_108_REPRESENTATIVES = ((0, 1, 2), (0, 3, 6), (0, 9, 19), (0, 10, 17),
                               (1, 12, 17), (2, 5, 6), (2, 10, 16))


def example_108() -> TripleSystem:
    """The STS(21) with an automorphism group of order 108 built from two generators."""
    gens = [parse_cycles(t, 21) for t in EXAMPLE_108_GENERATORS]
    return construct_from_group_orbits(21, gens, EXAMPLE_108_REPRESENTATIVES)


def example_108_group() -> PermutationGroup:
    return group_from_generators(21, [parse_cycles(t, 21) for t in EXAMPLE_108_GENERATORS])


def double_fano() -> Configuration:
    shifted = [tuple(x + 7 for x in b) for b in FANO.blocks]
    return Configuration(14, 3, list(FANO.blocks) + shifted)


def random_sts(v: int, rng) -> TripleSystem:
    """A random STS(v) by Stinson's hill-climbing; ``rng`` is a ``random.Random``."""
    if not is_admissible_order(v):
        raise ValueError(f"no STS of order {v}")
    t = [[-1] * v for _ in range(v)]
    live = [set(range(v)) - {x} for x in range(v)]
    blocks = set()
    target = v * (v - 1) // 6
    while len(blocks) < target:
        x = rng.choice([p for p in range(v) if live[p]])
        y, z = rng.sample(sorted(live[x]), 2) if len(live[x]) > 1 else (None, None)
        if y is None:
            continue
        w = t[y][z]
        if w >= 0:
            old = tuple(sorted((y, z, w)))
            blocks.discard(old)
            for a, b in combinations(old, 2):
                t[a][b] = t[b][a] = -1
                live[a].add(b)
                live[b].add(a)
        new = tuple(sorted((x, y, z)))
        blocks.add(new)
        for a, b in combinations(new, 2):
            t[a][b] = t[b][a] = new[0] + new[1] + new[2] - a - b
            live[a].discard(b)
            live[b].discard(a)
    return TripleSystem(v, blocks)
