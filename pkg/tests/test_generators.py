import random
from fractions import Fraction

import numpy as np
import pytest

from asym.compat import in_alphabet
from asym.errors import NotUnarySeparated
from asym.fixtures import example66_system, rg_system, system_from_sizes, uniform_system
from asym.generators import (
    AgeCount,
    count_age,
    derive_seed,
    kn_classes,
    ratio_table,
    sample_age_uniform,
    sample_kn,
)

from oracles import age_count_oracle, in_age

SEPARATED = {
    "rg": rg_system(),
    "ex66": example66_system(),
    "two": uniform_system(2, 0, 2, separated=True),
    "base": system_from_sizes(2, 1, {(0, 0): 3, (0, 1): 1, (1, 1): 1}, separated=True),
}


def test_universe_size():
    ds = uniform_system(3, 1, 2)
    S, ca = sample_kn(ds, 5, 0)
    assert S.size == 5 * 2 + 1
    assert ca.cls == tuple(kn_classes(ds, 5).tolist())


def test_sampler_deterministic(ex66):
    a, _ = sample_kn(ex66, 9, 11)
    b, _ = sample_kn(ex66, 9, 11)
    c, _ = sample_kn(ex66, 9, 12)
    assert a == b and a.dumps() == b.dumps()
    assert a != c


@pytest.mark.parametrize("seed", range(10))
def test_sampler_in_alphabet(seed):
    ds = uniform_system(3, 1, 3)
    S, ca = sample_kn(ds, 6, seed)
    pair_ok, unary_ok = in_alphabet(S, ds, ca)
    assert pair_ok.all() and unary_ok.all()


def test_sampler_marginals_uniform(rg):
    # each within-class pair is an edge with probability 1/2
    edges = sum(sample_kn(rg, 20, s)[0].rel("E").sum() for s in range(50))
    pairs = 50 * 20 * 19
    assert abs(edges / pairs - 0.5) < 0.02


def test_derive_seed_distinct():
    assert len({derive_seed(1, n, t) for n in range(5) for t in range(5)}) == 25


def test_example66_anchors(ex66):
    assert count_age(ex66, 3).by_class_sizes[(3, 0)] == 64
    assert count_age(ex66, 2).total == 8
    assert ratio_table(ex66, 0, [2]) == [(2, Fraction(1, 2))]


@pytest.mark.parametrize("name", sorted(SEPARATED))
@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_count_matches_enumeration(name, n):
    ds = SEPARATED[name]
    assert count_age(ds, n).total == age_count_oracle(ds, n)


def test_count_requires_separation():
    with pytest.raises(NotUnarySeparated):
        count_age(uniform_system(2, 0, 1), 2)


def test_age_count_json_round_trip(ex66):
    c = count_age(ex66, 10)
    assert AgeCount.from_json(c.dumps()) == c
    assert isinstance(c.to_json()["total"], str)


def test_uniform_age_sample_in_age(ex66):
    for s in range(20):
        S = sample_age_uniform(ex66, 3, s)
        assert in_age(S, ex66)


def test_uniform_age_sampler_is_uniform(ex66):
    # 8 labeled members at n=2, each should appear about 1/8 of the time
    draws = [sample_age_uniform(ex66, 2, s).dumps() for s in range(2400)]
    counts = np.array(sorted({d: draws.count(d) for d in set(draws)}.values()))
    assert len(counts) == 8
    expected = 2400 / 8
    chi2 = ((counts - expected) ** 2 / expected).sum()
    assert chi2 < 24.3  # 0.999 quantile, 7 degrees of freedom


def test_ratio_table_increasing(ex66):
    ratios = [r for _, r in ratio_table(ex66, 0, [2, 3, 4, 5, 6])]
    assert all(a < b for a, b in zip(ratios, ratios[1:]))
