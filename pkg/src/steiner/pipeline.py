"""Extension of a configuration to triple systems with a particularized subsystem of order 7.

Points ``0..m-1`` carry the configuration ``D`` (m = v - 7) and
``W = {m, ..., v-1}`` is the subsystem. The complement ``G`` of the
configuration's underlying graph is 7-regular; a 1-factorization of ``G``
gives the blocks meeting ``W`` in one point, with factor ``i`` attached to
``m + i``. A Fano plane on ``W`` completes the design.

Isomorph rejection runs in three stages: factorizations that are lex-min
under the configuration group ``A``, Fano planes that are lex-min under the
induced group ``A''``, and a final test that ``W`` lies in the canonically
first orbit of subsystems of the finished design.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import islice, permutations
from typing import Iterable, Iterator, Sequence

from .canon import canonical_form, encode_sts, rank_subsystems
from .configgen import ConfigRecord
from .core import (FANO, Configuration, ConsistencyError, Factorization, PermutationGroup,
                   TripleSystem, identity, is_factorization, validate_sts)
from .kernels import iter_one_factorizations
from .subsys import find_subsystems, intersection_stats

W_ORDER = 7
# groups up to this order are enumerated element by element in the lex-min tests
ELEMENT_CAP = 5040


# --------------------------------------------------------------------------
# types

@dataclass(frozen=True)
class PartitionedSts:
    v: int
    d_blocks: tuple
    f_blocks: tuple  # f_blocks[i] holds the blocks through W-point v-7+i
    fano_blocks: tuple

    @property
    def w_points(self) -> tuple[int, ...]:
        return tuple(range(self.v - W_ORDER, self.v))

    def design(self) -> TripleSystem:
        blocks = list(self.d_blocks) + [b for grp in self.f_blocks for b in grp] + list(self.fano_blocks)
        return TripleSystem(self.v, blocks)

    def check(self) -> None:
        """Raise ConsistencyError unless the parts fit together as described."""
        w = set(self.w_points)
        m = self.v - W_ORDER
        if any(w & set(b) for b in self.d_blocks):
            raise ConsistencyError("a configuration block meets W")
        if any(not set(b) <= w for b in self.fano_blocks):
            raise ConsistencyError("a Fano block leaves W")
        for i, grp in enumerate(self.f_blocks):
            p = m + i
            rest = [x for b in grp for x in b if x != p]
            if any(len(w & set(b)) != 1 or p not in b for b in grp) or sorted(rest) != list(range(m)):
                raise ConsistencyError(f"blocks through W-point {p} do not partition the other points")
        problem = validate_sts(self.design())
        if problem:
            raise ConsistencyError(f"assembled design is not a triple system: {problem}")


@dataclass
class StageGroups:
    a: PermutationGroup
    a1: PermutationGroup
    a2: PermutationGroup
    a3: PermutationGroup


@dataclass(frozen=True)
class AcceptedDesign:
    design: TripleSystem
    particularized_subsystem: tuple[int, ...]
    aut_order: int
    u: int
    i1: int
    i3: int
    canonical_hex: str


@dataclass
class PipelineStats:
    """Counters for one configuration; ``complete`` is False when a cap cut the run short."""
    group_order: int = 0
    factorizations: int = 0
    complete: bool = True
    accepted_factorizations: int = 0
    factorization_orbit_sum: int = 0
    fano_orbit_sums: list[int] = field(default_factory=list)
    assembled: int = 0
    accepted: int = 0


# --------------------------------------------------------------------------
# factorizations

def factorization_image(f: Factorization, g: Sequence[int]) -> Factorization:
    out = []
    for factor in f:
        edges = []
        for a, b in factor:
            x, y = g[a], g[b]
            edges.append((x, y) if x < y else (y, x))
        edges.sort()
        out.append(tuple(edges))
    out.sort()
    return tuple(out)


def _stabilizer(a: PermutationGroup, f: Factorization) -> PermutationGroup:
    return a.subgroup(lambda g: factorization_image(f, g) == f)


def _is_lexmin(f: Factorization, a: PermutationGroup) -> bool:
    return all(factorization_image(f, g) >= f for g in a.elements)


def group_closure(facts: Iterable[Factorization], a: PermutationGroup) -> list[Factorization]:
    """Union of the A-orbits of ``facts``, sorted."""
    out = set()
    for f in facts:
        if f in out:
            continue
        out.update(factorization_image(f, g) for g in a.elements)
    return sorted(out)


def lexmin_factorizations(g, a: PermutationGroup, factorizations: Iterable[Factorization] | None = None,
                          element_cap: int = ELEMENT_CAP) -> Iterator[tuple[Factorization, PermutationGroup]]:
    """Factorizations that are the minimum of their A-orbit, each with its stabilizer A'.

    ``factorizations`` defaults to all 1-factorizations of ``g`` and must be a
    union of A-orbits. Small groups are applied element by element while the
    stream is consumed. Larger groups need the whole set in memory; orbits
    are then found from the generators.
    """
    stream = iter_one_factorizations(g) if factorizations is None else iter(factorizations)
    if a.order <= element_cap:
        for f in stream:
            if _is_lexmin(f, a):
                yield f, _stabilizer(a, f)
        return
    facts = sorted(set(stream))
    index = {f: i for i, f in enumerate(facts)}
    parent = list(range(len(facts)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for gen in a.generators:
        for i, f in enumerate(facts):
            j = index.get(factorization_image(f, gen))
            if j is None:
                raise ConsistencyError("factorization set is not closed under the group")
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    for i, f in enumerate(facts):
        if find(i) == i:
            yield f, _stabilizer(a, f)


def assemble_f_blocks(fact: Factorization, v: int) -> tuple:
    """Blocks {x, y, v-7+i} for each edge {x, y} of factor i, grouped by factor."""
    if len(fact) != W_ORDER:
        raise ValueError(f"expected {W_ORDER} factors, got {len(fact)}")
    m = v - W_ORDER
    return tuple(tuple(tuple(sorted((a, b, m + i))) for a, b in factor) for i, factor in enumerate(fact))


def _extend(g: Sequence[int], fact: Factorization, index: dict, m: int) -> tuple[int, ...]:
    img = list(g[:m])
    for i, factor in enumerate(fact):
        j = index.get(tuple(sorted(tuple(sorted((g[a], g[b]))) for a, b in factor)))
        if j is None:
            raise ConsistencyError("group element does not permute the factors")
        img.append(m + j)
    return tuple(img)


def extend_group(a1: PermutationGroup, fact: Factorization, v: int) -> PermutationGroup:
    """A'' on all v points: W-point v-7+i goes where the element sends factor i."""
    m = v - W_ORDER
    index = {factor: i for i, factor in enumerate(fact)}
    elems = [_extend(g, fact, index, m) for g in a1.elements]
    gens = [_extend(g, fact, index, m) for g in a1.generators]
    return PermutationGroup(v, [x for x in gens if x != identity(v)], elems)


# --------------------------------------------------------------------------
# Fano planes on W

@lru_cache(maxsize=None)
def _fano_base() -> tuple:
    seen = set()
    for p in permutations(range(W_ORDER)):
        seen.add(tuple(sorted(tuple(sorted(p[x] for x in b)) for b in FANO.blocks)))
    return tuple(sorted(seen))


def fano_candidates(offset: int = 0) -> list[tuple]:
    """The 30 labelled Fano planes on ``offset .. offset+6``, in lexicographic order."""
    return [tuple(tuple(x + offset for x in b) for b in c) for c in _fano_base()]


def _block_image(blocks, g):
    return tuple(sorted(tuple(sorted(g[x] for x in b)) for b in blocks))


def lexmin_fanos(a2: PermutationGroup, offset: int = 0) -> list[tuple[tuple, PermutationGroup]]:
    """Fano candidates on W that are minimal in their A''-orbit, each with its stabilizer A'''."""
    out = []
    for c in fano_candidates(offset):
        images = [_block_image(c, g) for g in a2.elements]
        if min(images) == c:
            out.append((c, a2.subgroup(lambda g, c=c: _block_image(c, g) == c)))
    return out


# --------------------------------------------------------------------------
# final test

def final_accept(ps: PartitionedSts, a3: PermutationGroup) -> AcceptedDesign | None:
    """Accept iff W lies in the canonically first Aut-orbit of order-7 subsystems."""
    s = ps.design()
    w = ps.w_points
    subs = find_subsystems(s, W_ORDER)
    if w not in subs:
        raise ConsistencyError(f"W = {w} is not a subsystem of the assembled design")
    ws = set(w)
    for x in subs:
        if len(ws & set(x)) not in (1, 3, W_ORDER):
            raise ConsistencyError(f"subsystem {x} meets W in {len(ws & set(x))} points")
    u, i1, i3 = intersection_stats(subs)
    res = canonical_form(encode_sts(s))
    if u == 1:
        if res.automorphism_order != a3.order:
            raise ConsistencyError(f"|Aut| = {res.automorphism_order} but the stabilizer chain gives {a3.order}")
        return AcceptedDesign(s, w, a3.order, u, i1, i3, res.hex)
    ranking = rank_subsystems(s, subs)
    if w not in ranking.orbits[0]:
        return None
    if ranking.automorphism_order != res.automorphism_order:
        raise ConsistencyError("marking the subsystems changed the automorphism group")
    return AcceptedDesign(s, w, ranking.automorphism_order, u, i1, i3, res.hex)


# --------------------------------------------------------------------------
# driver

def run_pipeline(record: ConfigRecord, v: int, max_factorizations: int | None = None,
                 stats: PipelineStats | None = None, check: bool = False,
                 element_cap: int = ELEMENT_CAP,
                 seeds: Iterable[Factorization] | None = None) -> Iterator[AcceptedDesign]:
    """Stream one accepted design per class arising from ``record``.

    With ``max_factorizations`` only the A-orbits of the first that many
    factorizations are processed and ``stats.complete`` is set to False;
    ``seeds`` restricts the run to the A-orbits of the given factorizations.
    ``check`` validates every assembled design and every group in the chain.
    """
    c = record.config
    m = v - W_ORDER
    if c.m != m:
        raise ValueError(f"a configuration on {c.m} points does not fit v = {v}")
    if record.wilson_flag:
        raise ValueError("the double-Fano configuration is excluded from the pipeline")
    if stats is None:
        stats = PipelineStats()
    a = record.aut
    stats.group_order = a.order
    g = record.complement
    if seeds is not None:
        facts = group_closure(seeds, a)
        stats.factorizations = len(facts)
        stats.complete = False
    elif max_factorizations is None:
        facts = _counted(iter_one_factorizations(g), stats)
    else:
        head = list(islice(iter_one_factorizations(g), max_factorizations + 1))
        if len(head) > max_factorizations:
            stats.complete = False
            head = head[:max_factorizations]
        facts = group_closure(head, a)
        stats.factorizations = len(facts)
    for fact, a1 in lexmin_factorizations(g, a, facts, element_cap):
        if check and not is_factorization(g, fact):
            raise ConsistencyError("kernel produced an invalid factorization")
        stats.accepted_factorizations += 1
        stats.factorization_orbit_sum += a.order // a1.order
        f_blocks = assemble_f_blocks(fact, v)
        a2 = extend_group(a1, fact, v)
        if a2.order != a1.order:
            raise ConsistencyError("extension to W is not faithful")
        fanos = lexmin_fanos(a2, m)
        stats.fano_orbit_sums.append(sum(a2.order // a3.order for _, a3 in fanos))
        for fano, a3 in fanos:
            ps = PartitionedSts(v, c.blocks, f_blocks, fano)
            if check:
                ps.check()
                blocks = ps.design().blocks
                if not (_preserves(a1, c.blocks) and _preserves(a2, c.blocks + sum(f_blocks, ()))
                        and _preserves(a3, blocks)):
                    raise ConsistencyError("a stage group moves the structure built so far")
            stats.assembled += 1
            acc = final_accept(ps, a3)
            if acc is not None:
                stats.accepted += 1
                yield acc


def split_design(s: TripleSystem, w: Iterable[int]) -> tuple[PartitionedSts, Configuration, Factorization]:
    """Relabel ``s`` so the subsystem ``w`` sits on the last 7 points and cut it into its parts."""
    w = sorted(w)
    rest = [x for x in range(s.v) if x not in w]
    p = [0] * s.v
    for i, x in enumerate(rest + w):
        p[x] = i
    t = s.relabel(p)
    m = s.v - W_ORDER
    d = tuple(b for b in t.blocks if b[2] < m)
    fano = tuple(b for b in t.blocks if b[0] >= m)
    groups = [[] for _ in range(W_ORDER)]
    for b in t.blocks:
        if b[1] < m <= b[2]:
            groups[b[2] - m].append(b)
    fact = tuple(tuple((a, b) for a, b, _ in grp) for grp in groups)
    f_blocks = tuple(tuple(grp) for grp in groups)
    ps = PartitionedSts(s.v, d, f_blocks, fano)
    ps.check()
    return ps, Configuration(m, (s.v - 1) // 2 - W_ORDER, d), fact


def _counted(it: Iterable[Factorization], stats: PipelineStats) -> Iterator[Factorization]:
    for f in it:
        stats.factorizations += 1
        yield f


def _preserves(group: PermutationGroup, blocks) -> bool:
    target = set(blocks)
    return all(_block_image(blocks, h) == tuple(sorted(target)) for h in group.generators)


# --------------------------------------------------------------------------
# ledger and checkpoint files

LEDGER_FIELDS = ["config_index", "design_seq", "aut_order", "U", "I1", "I3", "canonical_hex"]
SUMMARY_FIELDS = ["config_index", "aut_order", "factorizations", "designs", "complete"]


def ledger_rows(config_index: int, designs: Iterable[AcceptedDesign]) -> Iterator[dict]:
    for seq, d in enumerate(designs):
        yield {"config_index": config_index, "design_seq": seq, "aut_order": d.aut_order,
               "U": d.u, "I1": d.i1, "I3": d.i3, "canonical_hex": d.canonical_hex}


def read_ledger(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        for k in LEDGER_FIELDS[:-1]:
            row[k] = int(row[k])
    return rows


def read_summary(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        for k in SUMMARY_FIELDS[:-1]:
            row[k] = int(row[k])
        row["complete"] = row["complete"] == "1"
    return rows


def summary_path(ledger_path: str) -> str:
    return ledger_path + ".configs.csv"


@dataclass
class Checkpoint:
    shard: str
    last_completed: int | None
    ledger_rows: int
    summary_rows: int

    def save(self, path: str) -> None:
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            json.dump(self.__dict__, fh, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str) -> Checkpoint:
        with open(path) as fh:
            data = json.load(fh)
        return cls(data["shard"], data["last_completed"], data["ledger_rows"], data["summary_rows"])
