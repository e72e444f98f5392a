"""Canonical labeling and automorphism groups of vertex-colored graphs.

The search follows the individualization-refinement scheme: equitable
partition refinement with a refinement trace as node invariant, target cell
= first smallest non-singleton cell, automorphism pruning on the first path
and a jump back to the first path whenever a leaf equivalent to the first
leaf is met. The canonical leaf is the one with the largest
(trace sequence, relabeled adjacency) key.

Encoders turn designs and configurations into colored incidence graphs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .core import (Configuration, PackedGraph, Perm, ResourceError, TripleSystem,
                   orbits)

VERTEX_LIMIT = 256


@dataclass(frozen=True)
class ColoredGraph:
    """Vertex-colored simple graph.

    ``hint`` (per-vertex values) and ``node_invariant`` (a callable taking
    the current cell list and returning per-vertex values or ``None``) are
    optional search accelerators; both must be isomorphism invariants of the
    colored graph. They steer the search but never enter the canonical bytes.
    """

    n: int
    adj: tuple[int, ...]
    colors: tuple[int, ...]
    hint: tuple | None = field(default=None, compare=False)
    node_invariant: Callable | None = field(default=None, compare=False, repr=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], colors: Sequence[int] | None = None):
        adj = [0] * n
        for a, b in edges:
            if a == b:
                raise ValueError("loops are not allowed")
            adj[a] |= 1 << b
            adj[b] |= 1 << a
        return cls(n, tuple(adj), tuple(colors) if colors is not None else (0,) * n)

    @classmethod
    def from_packed(cls, g: PackedGraph, colors: Sequence[int] | None = None):
        return cls(g.n, g.rows, tuple(colors) if colors is not None else (0,) * g.n)

    def neighbors(self, v: int) -> list[int]:
        r = self.adj[v]
        out = []
        while r:
            low = r & -r
            out.append(low.bit_length() - 1)
            r ^= low
        return out

    def edges(self) -> list[tuple[int, int]]:
        return [(a, b) for a in range(self.n) for b in self.neighbors(a) if a < b]

    def relabel(self, p: Sequence[int]) -> ColoredGraph:
        """The image under ``p``, with ``hint`` and ``node_invariant`` carried along."""
        n = self.n
        colors = [0] * n
        for v in range(n):
            colors[p[v]] = self.colors[v]
        g = ColoredGraph.from_edges(n, [(p[a], p[b]) for a, b in self.edges()], colors)
        hint = hook = None
        if self.hint is not None:
            moved = [None] * n
            for v in range(n):
                moved[p[v]] = self.hint[v]
            hint = tuple(moved)
        if self.node_invariant is not None:
            back = [0] * n
            for v in range(n):
                back[p[v]] = v
            inner = self.node_invariant

            def hook(cells):
                vals = inner([[back[x] for x in c] for c in cells])
                if vals is None:
                    return None
                out = [None] * n
                for v in range(n):
                    out[p[v]] = vals[v]
                return out

        return ColoredGraph(n, g.adj, g.colors, hint, hook)

    def is_automorphism(self, p: Sequence[int]) -> bool:
        if any(self.colors[p[v]] != self.colors[v] for v in range(self.n)):
            return False
        for v in range(self.n):
            img = 0
            for u in self.neighbors(v):
                img |= 1 << p[u]
            if img != self.adj[p[v]]:
                return False
        return True


@dataclass(frozen=True)
class CanonicalResult:
    canonical_labeling: Perm          # vertex v receives label canonical_labeling[v]
    canonical_bytes: bytes
    automorphism_generators: tuple[Perm, ...]
    automorphism_order: int

    @property
    def hex(self) -> str:
        return self.canonical_bytes.hex()


def serialize(g: ColoredGraph) -> bytes:
    """Length-prefixed bytes of (n, colors, upper-triangle adjacency)."""
    if max(g.colors, default=0) > 255:
        raise ValueError("colors must fit in one byte")
    bits = 0
    offset = 0
    for i in range(g.n):
        bits |= (g.adj[i] >> (i + 1)) << offset
        offset += g.n - i - 1
    return (g.n.to_bytes(4, "big") + bytes(g.colors)
            + bits.to_bytes((offset + 7) // 8, "little"))


def _refine(cells, queue, adj, n, trace):
    """Refine ``cells`` to an equitable partition, starting from splitters ``queue``.

    Splits are appended to ``trace``; returns the new cell list.
    """
    pending = {id(c) for c in queue}
    queue = deque(queue)
    while queue and len(cells) < n:
        s = queue.popleft()
        if id(s) not in pending:
            continue
        pending.discard(id(s))
        smask = 0
        near = 0
        for v in s:
            smask |= 1 << v
            near |= adj[v]
        out = []
        for c in cells:
            if len(c) == 1:
                out.append(c)
                continue
            hit = False
            for v in c:
                if near >> v & 1:
                    hit = True
                    break
            if not hit:
                out.append(c)
                continue
            groups = {}
            for v in c:
                groups.setdefault((adj[v] & smask).bit_count(), []).append(v)
            if len(groups) == 1:
                out.append(c)
                continue
            keys = sorted(groups)
            frags = [groups[k] for k in keys]
            trace.append((len(out), tuple(keys), tuple(map(len, frags))))
            if id(c) in pending:
                pending.discard(id(c))
                skip = None
            else:
                skip = max(range(len(frags)), key=lambda i: (len(frags[i]), -i))
            for i, f in enumerate(frags):
                if i != skip:
                    pending.add(id(f))
                    queue.append(f)
            out.extend(frags)
        cells = out
    return cells


def _split_by(cells, values, trace):
    """Split every cell by ``values``; returns (cells, new fragments)."""
    out = []
    frags_all = []
    for c in cells:
        if len(c) == 1:
            out.append(c)
            continue
        groups = {}
        for v in c:
            groups.setdefault(values[v], []).append(v)
        if len(groups) == 1:
            out.append(c)
            continue
        keys = sorted(groups)
        frags = [groups[k] for k in keys]
        trace.append(("x", len(out), tuple(map(len, frags))))
        out.extend(frags)
        frags_all.extend(frags)
    return out, frags_all


def _target(cells):
    best = None
    for i, c in enumerate(cells):
        if len(c) > 1 and (best is None or len(c) < len(cells[best])):
            best = i
            if len(c) == 2:
                break
    return best


class _Backjump(Exception):
    pass


class _Search:
    def __init__(self, g: ColoredGraph):
        self.n = g.n
        self.adj = g.adj
        self.nbrs = [g.neighbors(v) for v in range(g.n)]
        self.hook = g.node_invariant
        self.gens: list[Perm] = []

    def settle(self, cells, queue, trace):
        cells = _refine(cells, queue, self.adj, self.n, trace)
        if self.hook is not None and len(cells) < self.n:
            values = self.hook(cells)
            if values is not None:
                cells, frags = _split_by(cells, values, trace)
                if frags:
                    cells = _refine(cells, frags, self.adj, self.n, trace)
        return cells, (len(cells), tuple(trace))

    def child(self, cells, i, v):
        c = cells[i]
        single = [v]
        rest = [x for x in c if x != v]
        return self.settle(cells[:i] + [single, rest] + cells[i + 1:], [single], [])

    def cert(self, lab):
        pos = [0] * self.n
        for i, v in enumerate(lab):
            pos[v] = i
        rows = []
        for v in lab:
            r = 0
            for u in self.nbrs[v]:
                r |= 1 << pos[u]
            rows.append(r)
        return tuple(rows)

    def add_gen(self, src, dst):
        p = [0] * self.n
        for a, b in zip(src, dst):
            p[a] = b
        p = tuple(p)
        if p != tuple(range(self.n)) and p not in self.gens:
            self.gens.append(p)

    def run(self, cells0):
        n = self.n
        cells, inv = self.settle(cells0, list(cells0), [])
        path = []
        invs = [inv]
        prefix = []
        while len(cells) < n:
            t = _target(cells)
            v = cells[t][0]
            path.append((cells, t))
            prefix.append(v)
            cells, inv = self.child(cells, t, v)
            invs.append(inv)
        self.first_lab = [c[0] for c in cells]
        self.first_inv = tuple(invs)
        self.first_cert = self.cert(self.first_lab)
        self.best_key = (self.first_inv, self.first_cert)
        self.best_lab = self.first_lab

        order = 1
        for d in range(len(path) - 1, -1, -1):
            cells, t = path[d]
            fixed = prefix[:d]
            explored = [prefix[d]]
            seen_gens = -1
            where = None
            for w in cells[t]:
                if w == prefix[d]:
                    continue
                if len(self.gens) != seen_gens:
                    seen_gens = len(self.gens)
                    stab = [g for g in self.gens if all(g[x] == x for x in fixed)]
                    where = None
                    if stab:
                        where = [0] * n
                        for i, o in enumerate(orbits(n, stab)):
                            for x in o:
                                where[x] = i
                if where is not None and any(where[w] == where[e] for e in explored):
                    continue
                explored.append(w)
                child, inv = self.child(cells, t, w)
                try:
                    self.explore(child, self.first_inv[:d + 1] + (inv,))
                except _Backjump:
                    pass
            stab = [g for g in self.gens if all(g[x] == x for x in fixed)]
            orb = next(o for o in orbits(n, stab) if prefix[d] in o)
            order *= len(orb)
        self.order = order

    def explore(self, cells, invs):
        k = len(invs)
        eq_first = invs == self.first_inv[:k]
        if not eq_first and invs < self.best_key[0][:k]:
            return
        if len(cells) == self.n:
            lab = [c[0] for c in cells]
            cert = self.cert(lab)
            if eq_first and cert == self.first_cert:
                self.add_gen(self.first_lab, lab)
                raise _Backjump
            key = (invs, cert)
            if key == self.best_key:
                self.add_gen(self.best_lab, lab)
            elif key > self.best_key:
                self.best_key = key
                self.best_lab = lab
            return
        t = _target(cells)
        for w in cells[t]:
            child, inv = self.child(cells, t, w)
            self.explore(child, invs + (inv,))


def canonical_form(g: ColoredGraph, limit: int = VERTEX_LIMIT) -> CanonicalResult:
    """Canonical labeling, canonical bytes and automorphism group of ``g``."""
    if g.n < 1:
        raise ValueError("graph must have at least one vertex")
    if g.n > limit:
        raise ResourceError(f"{g.n} vertices exceeds the limit of {limit}")
    by_color = {}
    for v, c in enumerate(g.colors):
        key = (c, g.hint[v]) if g.hint is not None else (c,)
        by_color.setdefault(key, []).append(v)
    cells0 = [by_color[c] for c in sorted(by_color)]
    search = _Search(g)
    search.run(cells0)
    lab = search.best_lab
    labeling = [0] * g.n
    for i, v in enumerate(lab):
        labeling[v] = i
    colors = tuple(sorted(g.colors))
    canon = ColoredGraph(g.n, search.best_key[1], colors)
    return CanonicalResult(tuple(labeling), serialize(canon), tuple(search.gens), search.order)


# --------------------------------------------------------------------------
# encodings

def _pair_table(m, blocks):
    t = [[-1] * m for _ in range(m)]
    for a, b, c in blocks:
        t[a][b] = t[b][a] = c
        t[a][c] = t[c][a] = b
        t[b][c] = t[c][b] = a
    return t


def _pair_profile(t, m, a, b):
    """Component code of every point in the graph joining x to its block-mates through a and b.

    Points on a cycle of length L get L, points on a path of k points get 100 + k.
    """
    code = [0] * m
    code[a] = code[b] = -1
    if t[a][b] >= 0:
        code[t[a][b]] = -1
    ta, tb = t[a], t[b]
    seen = [False] * m
    for x in range(m):
        if code[x] or seen[x]:
            continue
        comp = [x]
        seen[x] = True
        closed = False
        # walk both ways from x, alternating the two neighbour maps
        ends = 0
        for first in (ta, tb):
            y, step = x, first
            while True:
                z = step[y]
                if z < 0 or code[z] == -1:
                    ends += 1
                    break
                if seen[z]:
                    closed = True
                    break
                seen[z] = True
                comp.append(z)
                y = z
                step = tb if step is ta else ta
            if closed:
                break
        val = len(comp) if closed else 100 + len(comp)
        for y in comp:
            code[y] = val
    return code


def incidence_invariants(m: int, blocks: Sequence[Sequence[int]], extra: int):
    """Root hint and node invariant for an incidence graph with ``m`` points first.

    ``extra`` is the number of vertices after the points (blocks and others).
    """
    t = _pair_table(m, blocks)
    sig = {}
    for a in range(m):
        for b in range(a + 1, m):
            sig[a, b] = tuple(sorted(_pair_profile(t, m, a, b)))
            sig[b, a] = sig[a, b]
    hint = [tuple(sorted(sig[x, y] for y in range(m) if y != x)) for x in range(m)]
    hint += [()] * extra

    cache = {}

    def profile(a, b):
        p = cache.get((a, b))
        if p is None:
            p = cache[a, b] = _pair_profile(t, m, a, b)
        return p

    def node_invariant(cells):
        singles = [c[0] for c in cells if len(c) == 1 and c[0] < m][:3]
        if len(singles) < 2:
            return None
        profiles = [profile(singles[i], singles[j])
                    for i in range(len(singles)) for j in range(i + 1, len(singles))]
        vals = [tuple(p[x] for p in profiles) for x in range(m)]
        return vals + [()] * extra

    return tuple(hint), node_invariant


def encode_incidence(m: int, blocks: Sequence[Sequence[int]],
                     point_colors: Sequence[int] | None = None, block_color: int = 1,
                     extra_edges: Sequence[tuple[int, int]] = (), extra_colors: Sequence[int] = ()) -> ColoredGraph:
    """Bipartite point/block incidence graph; points first, then blocks, then extras."""
    edges = [(x, m + j) for j, b in enumerate(blocks) for x in b] + list(extra_edges)
    colors = list(point_colors) if point_colors is not None else [0] * m
    colors += [block_color] * len(blocks) + list(extra_colors)
    n = len(colors)
    adj = [0] * n
    for a, b in edges:
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    hint, hook = incidence_invariants(m, blocks, n - m)
    return ColoredGraph(n, tuple(adj), tuple(colors), hint, hook)


def encode_sts(s: TripleSystem) -> ColoredGraph:
    return encode_incidence(s.v, s.blocks)


def encode_configuration(c: Configuration) -> ColoredGraph:
    return encode_incidence(c.m, c.blocks)


def encode_sts_with_subsystems(s: TripleSystem, subsystems: Sequence[Iterable[int]]) -> ColoredGraph:
    """Incidence graph plus one color-2 vertex per subsystem, joined to its points."""
    subs = [tuple(sorted(w)) for w in subsystems]
    t = s.pair_table()
    for w in subs:
        inside = set(w)
        for i, a in enumerate(w):
            for b in w[i + 1:]:
                if t[a][b] not in inside:
                    raise ValueError(f"{w} is not closed under the blocks of the design")
    base = s.v + len(s.blocks)
    extra = [(x, base + k) for k, w in enumerate(subs) for x in w]
    return encode_incidence(s.v, s.blocks, extra_edges=extra, extra_colors=[2] * len(subs))


def encode_factorization(g: PackedGraph, factors: Sequence[Sequence[tuple[int, int]]]) -> ColoredGraph:
    """Points (color 0), one vertex per factor (color 1), one per edge (color 2)."""
    n, k = g.n, len(factors)
    edges = []
    colors = [0] * n + [1] * k
    nxt = n + k
    for i, f in enumerate(factors):
        for a, b in f:
            edges += [(a, nxt), (b, nxt), (n + i, nxt)]
            colors.append(2)
            nxt += 1
    return ColoredGraph.from_edges(nxt, edges, colors)


def point_group_generators(res: CanonicalResult, m: int) -> list[Perm]:
    """Automorphism generators restricted to the first ``m`` vertices (the points)."""
    gens = []
    for g in res.automorphism_generators:
        p = tuple(g[:m])
        if p != tuple(range(m)) and p not in gens:
            gens.append(p)
    return gens


@dataclass(frozen=True)
class SubsystemRanking:
    orbits: list[list[tuple[int, ...]]]
    automorphism_order: int
    canonical: CanonicalResult


def rank_subsystems(s: TripleSystem, subsystems: Sequence[Iterable[int]]) -> SubsystemRanking:
    subs = sorted(tuple(sorted(w)) for w in subsystems)
    if not subs:
        raise ValueError("no subsystems to rank")
    g = encode_sts_with_subsystems(s, subs)
    res = canonical_form(g)
    base = s.v + len(s.blocks)
    idx = range(base, base + len(subs))
    orbs = [o for o in orbits(g.n, res.automorphism_generators) if o[0] >= base]
    orbs.sort(key=lambda o: min(res.canonical_labeling[x] for x in o))
    assert sum(map(len, orbs)) == len(idx)
    return SubsystemRanking([[subs[x - base] for x in o] for o in orbs],
                            res.automorphism_order, res)


def canonical_subsystem_ranking(s: TripleSystem, subsystems: Sequence[Iterable[int]]):
    """Orbits of ``subsystems`` under Aut(s), ordered canonically; the first orbit is the minimum."""
    return rank_subsystems(s, subsystems).orbits
