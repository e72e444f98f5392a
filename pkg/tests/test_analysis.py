import math
import random

import pytest

from steiner.analysis import (aggregate_results, alpha, classify_small_sts, estimate_report,
                              estimate_total, labelled_sts_count, latin_f, mass_check, mass_lhs,
                              mass_rhs, mu, n_labelled, ratio)
from steiner.canon import canonical_form, encode_sts
from steiner.core import ConsistencyError, validate_sts
from steiner.subsys import find_subsystems


@pytest.mark.parametrize("v, count", [(1, 1), (3, 1), (7, 1), (9, 1), (13, 2)])
def test_small_classification(v, count):
    systems = classify_small_sts(v)
    assert len(systems) == count
    assert all(validate_sts(s) is None for s in systems)


def test_small_classification_rejects_bad_orders():
    with pytest.raises(ValueError):
        classify_small_sts(11)
    with pytest.raises(ValueError):
        classify_small_sts(19)


def test_sts15_classes_distinct_and_complete(sts15):
    assert len(sts15) == 80
    forms = [canonical_form(encode_sts(s)) for s in sts15]
    assert len({f.canonical_bytes for f in forms}) == 80
    # labelled count of STS(15) is known independently of the class count
    assert sum(math.factorial(15) // f.automorphism_order for f in forms) == 60_281_712_691_200
    # relabeled copies land on existing classes
    rng = random.Random(3)
    known = {f.canonical_bytes for f in forms}
    for s in rng.sample(sts15, 5):
        p = list(range(15))
        rng.shuffle(p)
        assert canonical_form(encode_sts(s.relabel(p))).canonical_bytes in known


def test_labelled_counts():
    assert n_labelled(7) == 30 == labelled_sts_count(7)
    assert n_labelled(9) == 840 == math.factorial(9) // 432
    assert labelled_sts_count(13) == 1_197_504_000
    with pytest.raises(ValueError):
        n_labelled(13)


def test_mass_sides_small_identity():
    v = 7
    assert mass_lhs(v, [(math.factorial(v), 4)]) == 4
    assert mass_rhs(15, [(40320, 6240)]) == math.factorial(15) // 40320 * 30 * 6240
    with pytest.raises(ConsistencyError):
        mass_lhs(15, [(17, 1)])


def test_mass_check_v15(v15_run, sts15):
    rec, stats, designs = v15_run
    rows = [{"aut_order": d.aut_order, "U": d.u} for d in designs]
    configs = [{"config_index": 0, "aut_order": rec.aut.order, "factorizations": stats.factorizations,
                "complete": True}]
    res = mass_check(rows, configs, 15)
    assert res.equal
    # the oracle systems give the same left side
    oracle = []
    for s in sts15:
        k = len(find_subsystems(s, 7))
        if k:
            oracle.append((canonical_form(encode_sts(s)).automorphism_order, k))
    assert mass_lhs(15, oracle) == res.lhs
    with pytest.raises(ConsistencyError):
        mass_check(rows, [dict(configs[0], complete=False)], 15)


def test_aggregate():
    rows = [{"aut_order": 3, "U": 1, "I1": 0, "I3": 0}, {"aut_order": 3, "U": 1, "I1": 0, "I3": 0},
            {"aut_order": 2, "U": 3, "I1": 0, "I3": 3}]
    table, marginal = aggregate_results(rows)
    assert table == [(2, 3, 0, 3, 1), (3, 1, 0, 0, 2)]
    assert marginal == [(2, 1), (3, 2)]
    shuffled = rows[::-1]
    assert aggregate_results(shuffled) == (table, marginal)


def test_estimate_formulas():
    assert 0 < alpha() < 1 / 168
    assert math.isclose(alpha(), 1 - math.exp(-1 / 168), rel_tol=1e-12)
    assert mu(21, 7) == 30 * math.comb(21, 7) / 19 ** 7
    assert math.isclose(mu(10 ** 6, 7), 1 / 168, rel_tol=1e-4)
    assert latin_f(3) == 12 / 3 ** 9
    assert math.isclose(latin_f(10 ** 6), 1 / 18, rel_tol=1e-4)
    assert estimate_total(0) == 0
    assert ratio(1, 4) == 0.25
    with pytest.raises(ValueError):
        latin_f(2)
    with pytest.raises(ValueError):
        mu(5, 7)


def test_estimate_report_text():
    text = estimate_report().format()
    assert "alpha = 1 - exp(-1/168) = 0.00593470063028" in text
    assert "estimate_total = 1.96532176552e+16" in text
    assert "latin_f(10) = 0.020736" in text
