"""Consistency checks, small-order classification and the estimation formulas."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

from .canon import canonical_form, encode_sts
from .configgen import generate_configurations
from .core import ConsistencyError, TripleSystem, is_admissible_order

# counts used by the default estimate report
DEFAULT_COUNT_WITH_SUB7 = 116_635_963_205_551
DEFAULT_KIRKMAN_WITH_SUB7 = 12_520_021
DEFAULT_STS19_WITH_SUB7 = 86_701_547
DEFAULT_STS19_TOTAL = 11_084_874_829


# --------------------------------------------------------------------------
# small orders

def classify_small_sts(v: int) -> list[TripleSystem]:
    """One system per isomorphism class of STS(v), v <= 15, in canonical order."""
    if not is_admissible_order(v):
        raise ValueError(f"no STS({v}) exists")
    if v > 15:
        raise ValueError("direct classification is limited to v <= 15")
    if v < 3:
        return [TripleSystem(v, ())]
    return [TripleSystem(v, blocks) for _, blocks in generate_configurations(v, (v - 1) // 2)]


@lru_cache(maxsize=None)
def labelled_sts_count(w: int) -> int:
    """Number of distinct STS(w) on a fixed w-set, summed as w!/|Aut| over the classes."""
    total = 0
    for s in classify_small_sts(w):
        total += math.factorial(w) // canonical_form(encode_sts(s)).automorphism_order
    return total


# --------------------------------------------------------------------------
# mass formula

@dataclass
class MassLedger:
    v: int
    lhs: int
    rhs: int
    factorizations: dict[int, int] = field(default_factory=dict)

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs


def _orbit_size(v: int, order: int) -> int:
    q, rem = divmod(math.factorial(v), order)
    if order <= 0 or rem:
        raise ConsistencyError(f"automorphism group order {order} does not divide {v}!")
    return q


def mass_lhs(v: int, designs: Iterable[tuple[int, int]]) -> int:
    """Sum of v!/|Aut(S)| * s7(S) over (aut_order, s7) pairs: labelled (design, subsystem) pairs."""
    return sum(_orbit_size(v, aut) * s7 for aut, s7 in designs)


def mass_rhs(v: int, configs: Iterable[tuple[int, int]]) -> int:
    """Sum of v!/|Aut(C)| * 30 * f(C) over (aut_order, f) pairs, f the unordered factorization count.

    Choosing W, a Fano plane on it, a labelled configuration on the rest and
    an assignment of factors to W-points gives
    C(v,7) * 30 * (v-7)!/|Aut(C)| * 7! * f = v!/|Aut(C)| * 30 * f labelled pairs.
    """
    n7 = labelled_sts_count(7)
    return sum(_orbit_size(v, aut) * n7 * f for aut, f in configs)


def mass_check(design_rows: Iterable[Mapping], config_rows: Iterable[Mapping], v: int) -> MassLedger:
    """Both sides of the double count from a design ledger and a per-configuration summary.

    Design rows need ``aut_order`` and ``U``; configuration rows need
    ``config_index``, ``aut_order``, ``factorizations`` and ``complete``.
    """
    config_rows = list(config_rows)
    if not all(row["complete"] for row in config_rows):
        raise ConsistencyError("some configurations were only partially processed")
    lhs = mass_lhs(v, ((row["aut_order"], row["U"]) for row in design_rows))
    rhs = mass_rhs(v, ((row["aut_order"], row["factorizations"]) for row in config_rows))
    return MassLedger(v, lhs, rhs, {row["config_index"]: row["factorizations"] for row in config_rows})


# --------------------------------------------------------------------------
# aggregation

def aggregate_results(design_rows: Iterable[Mapping]) -> tuple[list[tuple[int, int, int, int, int]],
                                                                list[tuple[int, int]]]:
    """Counts per (aut_order, U, I1, I3) and the marginal per aut_order, both sorted."""
    rows = Counter((r["aut_order"], r["U"], r["I1"], r["I3"]) for r in design_rows)
    marginal = Counter()
    for (aut, *_), n in rows.items():
        marginal[aut] += n
    return sorted(k + (n,) for k, n in rows.items()), sorted(marginal.items())


# --------------------------------------------------------------------------
# estimates

def n_labelled(w: int) -> int:
    """N(w): labelled STS(w) on a fixed point set, for w = 7 or 9."""
    if w not in (7, 9):
        raise ValueError("only w = 7 and w = 9 are supported")
    return labelled_sts_count(w)


def labelled_subsystem_count(v: int, w: int) -> int:
    """M(v, w) = N(w) * C(v, w)."""
    return n_labelled(w) * math.comb(v, w)


def mu(v: int, w: int) -> float:
    """Expected number of sub-STS(w) when each triple is a block with probability 1/(v-2)."""
    if v < w:
        raise ValueError("need v >= w")
    blocks = w * (w - 1) // 6
    return labelled_subsystem_count(v, w) / (v - 2) ** blocks


def alpha() -> float:
    """Poisson probability of at least one sub-STS(7) in the limit: 1 - exp(-1/168)."""
    return -math.expm1(-1 / 168)


def estimate_total(count_with_sub7: int) -> float:
    return count_with_sub7 / alpha()


def ratio(part: int, whole: int) -> float:
    return part / whole


def latin_f(n: int) -> float:
    """12 C(n,3)^3 / n^9."""
    if n < 3:
        raise ValueError("need n >= 3")
    return 12 * math.comb(n, 3) ** 3 / n ** 9


@dataclass
class EstimateReport:
    n_labelled_fano: int
    alpha: float
    mu: dict[tuple[int, int], float]
    estimates: dict[str, float]
    inputs: dict[str, int]
    latin_f: dict[int, float]

    def format(self) -> str:
        lines = [f"N(7) = {self.n_labelled_fano}", f"alpha = 1 - exp(-1/168) = {self.alpha:.12g}"]
        lines += [f"mu({v},{w}) = {x:.12g}" for (v, w), x in sorted(self.mu.items())]
        lines += [f"input {k} = {x}" for k, x in self.inputs.items()]
        lines += [f"{k} = {x:.12g}" for k, x in self.estimates.items()]
        lines += [f"latin_f({n}) = {x:.12g}" for n, x in sorted(self.latin_f.items())]
        return "\n".join(lines) + "\n"


def estimate_report(count: int = DEFAULT_COUNT_WITH_SUB7, kirkman: int | None = DEFAULT_KIRKMAN_WITH_SUB7,
                    sts19_part: int = DEFAULT_STS19_WITH_SUB7, sts19_whole: int = DEFAULT_STS19_TOTAL,
                    latin_n: Iterable[int] = (10,)) -> EstimateReport:
    inputs = {"count_with_sub7": count, "sts19_with_sub7": sts19_part, "sts19_total": sts19_whole}
    estimates = {"estimate_total": estimate_total(count),
                 "sts19_ratio": ratio(sts19_part, sts19_whole)}
    if kirkman is not None:
        inputs["kirkman_with_sub7"] = kirkman
        estimates["kirkman_estimate"] = estimate_total(kirkman)
    mus = {(v, 7): mu(v, 7) for v in (15, 19, 21)}
    return EstimateReport(n_labelled(7), alpha(), mus, estimates, inputs,
                          {n: latin_f(n) for n in latin_n})
