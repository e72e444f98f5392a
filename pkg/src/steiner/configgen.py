"""Isomorph-free generation of triangle configurations.

An (m, r) configuration has m points and blocks of size 3 such that every
point lies in exactly r blocks and two blocks share at most one point. A
Steiner triple system of order v is the (v, (v-1)/2) case.

Generation works on partial block sets in which every block passes through
a *full* point (one already lying in r blocks). A partial object is stored
only as its canonical representative. The representative picks one
non-full point by a fixed rule and every way of completing that point's
blocks is generated; the children are then deduplicated by canonical form,
level by level (a level is a block count). Because the rule is applied to
the canonical representative, isomorphic partial objects extend the same
way, so every configuration is reached.
"""

from __future__ import annotations

import csv
import logging
import os
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import networkx as nx

from .canon import (ColoredGraph, canonical_form, encode_configuration, encode_incidence,
                    point_group_generators)
from .core import (Configuration, ConsistencyError, FANO, PackedGraph, PermutationGroup,
                   complement, format_configuration, group_from_generators, parse_configuration,
                   underlying_graph, validate_configuration)

log = logging.getLogger(__name__)


def _canonical_blocks(m, blocks):
    """Canonical bytes and relabeled blocks; isolated points take the last labels."""
    used = sorted({x for b in blocks for x in b})
    if not used:
        return m.to_bytes(4, "big"), ()
    idx = {x: i for i, x in enumerate(used)}
    res = canonical_form(encode_incidence(len(used), [tuple(idx[x] for x in b) for b in blocks]))
    lab = res.canonical_labeling
    out = tuple(sorted(tuple(sorted(lab[idx[x]] for x in b)) for b in blocks))
    return m.to_bytes(4, "big") + res.canonical_bytes, out


def _k_matchings(cands, unc, k):
    """All sets of ``k`` disjoint edges of the graph ``unc`` restricted to ``cands`` (a bitmask)."""
    out = []
    chosen = []

    def rec(pool, need):
        if need == 0:
            out.append(tuple(chosen))
            return
        if pool.bit_count() < 2 * need:
            return
        y = (pool & -pool).bit_length() - 1
        rest = pool & ~(1 << y)
        nb = unc[y] & rest
        while nb:
            low = nb & -nb
            z = low.bit_length() - 1
            chosen.append((y, z))
            rec(rest & ~low, need - 1)
            chosen.pop()
            nb ^= low
        rec(rest, need)

    rec(cands, k)
    return out


class _Partial:
    """Degree and uncovered-pair bookkeeping for a partial block set."""

    def __init__(self, m, r, blocks):
        self.m, self.r = m, r
        self.deg = [0] * m
        full_mask = (1 << m) - 1
        self.unc = [full_mask & ~(1 << x) for x in range(m)]
        for b in blocks:
            for x in b:
                self.deg[x] += 1
            a, b2, c = b
            self.unc[a] &= ~((1 << b2) | (1 << c))
            self.unc[b2] &= ~((1 << a) | (1 << c))
            self.unc[c] &= ~((1 << a) | (1 << b2))

    def open_mask(self):
        """Points that still need blocks."""
        mask = 0
        for x in range(self.m):
            if self.deg[x] < self.r:
                mask |= 1 << x
        return mask

    def extensions(self, x):
        """Pair sets that complete the blocks through ``x``."""
        need = self.r - self.deg[x]
        cands = self.unc[x] & self.open_mask()
        avail = [u & cands for u in self.unc]
        return _k_matchings(cands, avail, need)


def _free_normal(ext, free, free_sorted):
    """Normal form of a pair set under all permutations of the ``free`` points."""
    fixed_pairs = []
    anchored = []
    loose = 0
    for y, z in ext:
        fy, fz = y in free, z in free
        if fy and fz:
            loose += 1
        elif fy or fz:
            anchored.append(z if fy else y)
        else:
            fixed_pairs.append((y, z) if y < z else (z, y))
    anchored.sort()
    out = list(fixed_pairs)
    it = iter(free_sorted)
    out += [tuple(sorted((a, next(it)))) for a in anchored]
    out += [tuple(sorted((next(it), next(it)))) for _ in range(loose)]
    return tuple(sorted(out))


def _extension_orbits(m, blocks, x, pair_sets, free):
    """One representative pair set per orbit of the stabilizer of ``x`` in Aut(blocks)."""
    free_sorted = sorted(free)
    reps = {}
    for ps in pair_sets:
        reps.setdefault(_free_normal(ps, free, free_sorted), ps)
    keys = list(reps)
    if len(keys) == 1:
        return [reps[keys[0]]]
    colors = [0] * m
    colors[x] = 2
    gens = point_group_generators(canonical_form(encode_incidence(m, blocks, point_colors=colors)), m)
    index = {k: i for i, k in enumerate(keys)}
    parent = list(range(len(keys)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for g in gens:
        for i, k in enumerate(keys):
            img = _free_normal([(g[y], g[z]) for y, z in k], free, free_sorted)
            a, b = find(i), find(index[img])
            if a != b:
                parent[max(a, b)] = min(a, b)
    return [reps[keys[i]] for i in range(len(keys)) if find(i) == i]


def _feasible(m, r, blocks, complete):
    p = _Partial(m, r, blocks)
    open_ = p.open_mask()
    for y in range(m):
        need = r - p.deg[y]
        if need == 0:
            continue
        avail = p.unc[y] & open_
        if avail.bit_count() < 2 * need:
            return False
        if complete:
            z_mask = avail
            while z_mask:
                low = z_mask & -z_mask
                z = low.bit_length() - 1
                if not (p.unc[z] & avail & open_):
                    return False
                z_mask ^= low
    return True


def _choose_point(p: _Partial):
    best = None
    for x in range(p.m):
        if p.deg[x] >= p.r:
            continue
        key = (p.r - p.deg[x], (p.unc[x] & p.open_mask()).bit_count(), x)
        if best is None or key < best:
            best = key
    return best[2]


def generate_configurations(m: int, r: int, stats: dict | None = None) -> list[tuple[bytes, tuple]]:
    """All (m, r) configurations up to isomorphism as (canonical bytes, canonical blocks)."""
    if r == 0:
        return [_canonical_blocks(m, ())]
    if (m * r) % 3 or 2 * r > m - 1:
        return []
    complete = 2 * r == m - 1
    total_blocks = m * r // 3
    levels: dict[int, dict[bytes, tuple]] = {}
    key, blocks = _canonical_blocks(m, ())
    levels[0] = {key: blocks}
    done = []
    canon_calls = 0
    for b in range(total_blocks + 1):
        layer = levels.pop(b, {})
        if stats is not None and layer:
            stats.setdefault("level_sizes", {})[b] = len(layer)
        if layer:
            log.debug("(%d,%d) level %d: %d partial objects, %d canonical forms so far",
                     m, r, b, len(layer), canon_calls)
        if b == total_blocks:
            done = sorted(layer.items())
            break
        for blocks in layer.values():
            p = _Partial(m, r, blocks)
            x = _choose_point(p)
            free = {y for y in range(m) if p.deg[y] == 0 and y != x}
            for ps in _extension_orbits(m, blocks, x, p.extensions(x), free):
                child = blocks + tuple((x, y, z) for y, z in ps)
                if not _feasible(m, r, child, complete):
                    continue
                key, cblocks = _canonical_blocks(m, child)
                canon_calls += 1
                levels.setdefault(len(child), {}).setdefault(key, cblocks)
    if stats is not None:
        stats["canonical_forms"] = canon_calls
    return done


def random_configuration(m: int, r: int, rng, symmetry: Sequence[int] | None = None,
                         attempts: int = 200) -> Configuration:
    """A random (m, r) configuration by randomized backtracking.

    With ``symmetry`` (a permutation of the points) the configuration is
    built from whole orbits of blocks, so the permutation is an automorphism.
    """
    if (m * r) % 3 or 2 * r > m - 1:
        raise ValueError(f"no ({m},{r}) configuration")
    sigma = tuple(symmetry) if symmetry is not None else tuple(range(m))
    options = {}
    for b in combinations(range(m), 3):
        orbit = {b}
        frontier = [b]
        while frontier:
            img = tuple(sorted(sigma[x] for x in frontier.pop()))
            if img not in orbit:
                orbit.add(img)
                frontier.append(img)
        orbit = tuple(sorted(orbit))
        deg = Counter(x for blk in orbit for x in blk)
        pairs = [p for blk in orbit for p in combinations(blk, 2)]
        if max(deg.values()) <= r and len(pairs) == len(set(pairs)):
            options[orbit] = (deg, set(pairs))
    through = {x: [o for o in options if x in options[o][0]] for x in range(m)}
    budget = [0]

    def search(deg, used, chosen):
        budget[0] += 1
        if budget[0] > 20000:
            return None
        open_pts = [x for x in range(m) if deg[x] < r]
        if not open_pts:
            return chosen
        x = min(open_pts, key=lambda y: (r - deg[y], rng.random()))
        cands = [o for o in through[x]
                 if all(deg[y] + k <= r for y, k in options[o][0].items()) and not (options[o][1] & used)]
        rng.shuffle(cands)
        for o in cands:
            d2 = deg.copy()
            d2.update(options[o][0])
            out = search(d2, used | options[o][1], chosen + [o])
            if out is not None:
                return out
        return None

    for _ in range(attempts):
        budget[0] = 0
        found = search(Counter(), frozenset(), [])
        if found is not None:
            c = Configuration(m, r, [b for o in found for b in o])
            problem = validate_configuration(c)
            if problem:
                raise ConsistencyError(problem)
            return c
    raise ConsistencyError(f"no ({m},{r}) configuration found with the given symmetry")


# --------------------------------------------------------------------------
# records

@dataclass
class ConfigRecord:
    config: Configuration
    aut: PermutationGroup
    underlying: PackedGraph
    complement: PackedGraph
    canonical_bytes: bytes
    wilson_flag: bool

    @property
    def canonical_hex(self) -> str:
        return self.canonical_bytes.hex()


def is_double_fano(c: Configuration) -> bool:
    """True iff the blocks split into two Fano planes on disjoint point sets."""
    if c.m != 14 or c.r != 3:
        return False
    g = underlying_graph(c)
    comps = [set(x) for x in nx.connected_components(g.to_networkx())]
    if len(comps) != 2 or any(len(x) != 7 for x in comps):
        return False
    return all(len([b for b in c.blocks if set(b) <= comp]) == len(FANO.blocks) for comp in comps)


def make_record(c: Configuration, group_cap: int = 10**6) -> ConfigRecord:
    problem = validate_configuration(c)
    if problem:
        raise ConsistencyError(f"invalid configuration: {problem}")
    res = canonical_form(encode_configuration(c))
    aut = group_from_generators(c.m, point_group_generators(res, c.m), cap=group_cap)
    if aut.order != res.automorphism_order:
        raise ConsistencyError("point action of the automorphism group is not faithful")
    g = underlying_graph(c)
    return ConfigRecord(c, aut, g, complement(g), res.canonical_bytes, is_double_fano(c))


def classify_configurations(m: int, r: int, stats: dict | None = None) -> list[ConfigRecord]:
    """One record per isomorphism class of (m, r) configurations, ordered by canonical bytes."""
    if m > 32:
        raise ValueError("at most 32 points are supported")
    return [make_record(Configuration(m, r, blocks)) for _, blocks in generate_configurations(m, r, stats)]


def underlying_graph_classes(records: Iterable[ConfigRecord]) -> int:
    return len({canonical_form(ColoredGraph.from_packed(rec.underlying)).canonical_bytes
                for rec in records})


def aut_order_distribution(records: Iterable[ConfigRecord]) -> list[tuple[int, int]]:
    return sorted(Counter(rec.aut.order for rec in records).items())


def format_distribution(dist: list[tuple[int, int]]) -> str:
    return " ".join(f"{order}^{count}" for order, count in dist)


def exclude_wilson(records: list[ConfigRecord]) -> list[ConfigRecord]:
    if not any(rec.wilson_flag for rec in records):
        raise ConsistencyError("no double-Fano configuration among the records")
    return [rec for rec in records if not rec.wilson_flag]


# --------------------------------------------------------------------------
# files

MANIFEST_FIELDS = ["index", "canonical_hex", "aut_order", "wilson_flag", "graph6_of_underlying"]
MANIFEST_NAME = "manifest.csv"


def config_filename(index: int) -> str:
    return f"config_{index:05d}.txt"


def write_census(records: list[ConfigRecord], out_dir: str, exclude_wilson: bool = False) -> str:
    """Write one file per configuration, the manifest and a summary; return the manifest path.

    Excluded double-Fano records keep their index but get no file and no
    manifest row, so the numbering of the other records does not move.
    """
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, MANIFEST_NAME)
    kept = []
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(MANIFEST_FIELDS)
        for i, rec in enumerate(records):
            if exclude_wilson and rec.wilson_flag:
                continue
            kept.append(rec)
            with open(os.path.join(out_dir, config_filename(i)), "w") as cf:
                cf.write(format_configuration(rec.config))
            w.writerow([i, rec.canonical_hex, rec.aut.order, int(rec.wilson_flag), rec.underlying.to_graph6()])
    non_wilson = [rec for rec in records if not rec.wilson_flag]
    with open(os.path.join(out_dir, "summary.txt"), "w") as fh:
        fh.write(f"classes {len(records)}\n")
        fh.write(f"written {len(kept)}\n")
        fh.write(f"double_fano {len(records) - len(non_wilson)}\n")
        fh.write(f"aut_distribution {format_distribution(aut_order_distribution(records))}\n")
        fh.write(f"underlying_graph_classes_all {underlying_graph_classes(records)}\n")
        fh.write(f"underlying_graph_classes_non_wilson {underlying_graph_classes(non_wilson)}\n")
    return path


def read_census(out_dir: str) -> list[tuple[int, ConfigRecord]]:
    """Records listed in a manifest, checked against their stored canonical forms."""
    out = []
    with open(os.path.join(out_dir, MANIFEST_NAME), newline="") as fh:
        for row in csv.DictReader(fh):
            i = int(row["index"])
            with open(os.path.join(out_dir, config_filename(i))) as cf:
                rec = make_record(parse_configuration(cf.read()))
            if rec.canonical_hex != row["canonical_hex"] or rec.aut.order != int(row["aut_order"]):
                raise ConsistencyError(f"configuration {i} does not match its manifest row")
            out.append((i, rec))
    return out
