import itertools
import random

import numpy as np
import pytest

from asym.compat import ClassAssignment, classes_by_unary
from asym.errors import CapExceeded
from asym.extension import (
    EstimateTable,
    _Index,
    back_and_forth,
    check_all_tau,
    check_sigma_xi,
    check_tau,
    estimate_almost_sure,
    extensions,
    profile_count,
    profiles,
    wilson,
)
from asym.fixtures import diagram, random_system, rg_system, uniform_system
from asym.generators import derive_seed, sample_age_uniform, sample_kn
from asym.logic import evaluate, parse, random_formula
from asym.structures import FiniteStructure

from oracles import fo_oracle, profile_count_oracle, tau_formula, tau_oracle, wilson_oracle


def complete_graph(ds, n):
    V = ds.vocab
    pairs = [(a, b) for a in range(n) for b in range(n)]
    S = FiniteStructure.from_interp(V, n, {"Q": pairs, "E": [(a, b) for a, b in pairs if a != b]})
    return S, ClassAssignment(S, (0,) * n)


def empty_graph(ds, n):
    S = FiniteStructure.from_interp(ds.vocab, n, {"Q": [(a, b) for a in range(n) for b in range(n)]})
    return S, ClassAssignment(S, (0,) * n)


def test_profile_counts(rg):
    assert len(profiles(rg, 2)) == 2
    assert len(profiles(rg, 3)) == 8
    assert len(profiles(uniform_system(2, 1, 1), 2)) == 3


@pytest.mark.parametrize("seed", range(12))
def test_profile_count_formula(seed):
    ds = random_system(random.Random(seed))
    for k in (1, 2, 3):
        ps = profiles(ds, k)
        assert len(ps) == profile_count(ds, k) == profile_count_oracle(ds, k)
        assert len(set(ps)) == len(ps)


def test_profile_cap(rg):
    with pytest.raises(CapExceeded):
        profiles(rg, 5)


def test_extension_edges(ex66):
    for p in profiles(ex66, 2):
        exts = extensions(p)
        assert exts and all(q.restrict() == p for q in exts)
    assert sum(len(extensions(p)) for p in profiles(ex66, 2)) == len(profiles(ex66, 3))


@pytest.mark.parametrize("seed", range(4))
def test_each_tuple_realizes_at_most_one_profile(seed):
    ds = uniform_system(2, 1, 2)
    S, ca = sample_kn(ds, 3, seed)
    index = _Index(S, ca, ds)
    seen = []
    for p in profiles(ds, 3):
        seen += [tuple(t) for t in index.realizations(p).tolist()]
    assert len(seen) == len(set(seen))
    # every distinct 3-tuple of a sample avoiding two base elements realizes one
    expected = sum(1 for t in itertools.permutations(range(S.size), 3))
    assert len(seen) == expected


def test_same_profile_same_quantifier_free_type(ex66):
    S, ca = sample_kn(ex66, 6, 2)
    index = _Index(S, ca, ex66)
    rng = random.Random(0)
    formulas = [random_formula(ex66.vocab, 0, rng, free=("x", "y")) for _ in range(60)]
    for p in profiles(ex66, 2):
        T = index.realizations(p).tolist()
        for f in formulas:
            values = {evaluate(S, f, {"x": a, "y": b}) for a, b in T}
            assert len(values) <= 1


@pytest.mark.parametrize("seed", range(6))
def test_tau_matches_loop_oracle(seed):
    ds = uniform_system(2, 1, 2)
    S, ca = sample_kn(ds, 4, seed)
    reports = check_all_tau(S, ca, ds, 1) + check_all_tau(S, ca, ds, 2)
    got = [r.verdict for r in reports]
    want = [tau_oracle(S, ca.cls, ds, p, q) for k in (1, 2) for p in profiles(ds, k) for q in extensions(p)]
    assert got == want


@pytest.mark.parametrize("seed", range(4))
def test_tau_matches_compiled_sentence(ex66, seed):
    S, ca = sample_kn(ex66, 3, seed)
    for p in profiles(ex66, 2):
        for q in extensions(p):
            rep = check_tau(S, ca, p, q)
            assert (rep.verdict != "fails") == fo_oracle(S, tau_formula(p, q))


def test_tau_counterexample_is_real(rg):
    S, ca = complete_graph(rg, 6)
    edge = next(p for p in profiles(rg, 2) if S.pair_codes[0, 1] == p.diagrams[0])
    nonnbr = next(q for q in extensions(edge) if q.diagram(0, 2) != edge.diagrams[0] and q.diagram(1, 2) != edge.diagrams[0])
    rep = check_tau(S, ca, edge, nonnbr)
    assert rep.verdict == "fails" and not rep
    a, b = rep.witness
    assert S.holds("E", a, b)
    assert not any(not S.holds("E", a, z) and not S.holds("E", b, z) for z in range(6) if z not in (a, b))


def test_tau_vacuous(rg):
    S, ca = complete_graph(rg, 4)
    nonedge = next(p for p in profiles(rg, 2) if S.pair_codes[0, 1] != p.diagrams[0])
    reps = [check_tau(S, ca, nonedge, q) for q in extensions(nonedge)]
    assert all(r.verdict == "vacuous" for r in reps)


def test_tau_into_base_class():
    ds = uniform_system(2, 1, 2)
    S, ca = sample_kn(ds, 5, 0)
    for p in profiles(ds, 1):
        for q in extensions(p):
            if q.classes[-1] == 1 and p.classes[0] == 0:
                assert check_tau(S, ca, p, q).verdict == "holds"


def test_tau_holds_on_rg_samples(rg):
    ok = 0
    for s in range(100):
        S, ca = sample_kn(rg, 64, derive_seed(99, s))
        ok += all(check_all_tau(S, ca, rg, 2, stop_early=True))
    assert ok >= 95


@pytest.mark.parametrize("seed", range(5))
def test_sigma_xi_hold_on_samples(seed):
    ds = uniform_system(3, 1, 2)
    S, ca = sample_kn(ds, 4, seed)
    for k in (1, 2, 3, 4):
        sigma, xi = check_sigma_xi(S, ca, ds, k)
        assert sigma.verdict == "holds" and xi.verdict == "holds"


def test_sigma_fails_on_out_of_alphabet_pair(rg):
    S, ca = empty_graph(rg, 4)
    V = rg.vocab
    # a directed edge is not in the symmetric alphabet
    S = FiniteStructure.from_interp(V, 4, {"Q": [(a, b) for a in range(4) for b in range(4)], "E": [(1, 2)]})
    sigma, xi = check_sigma_xi(S, ClassAssignment(S, (0,) * 4), rg, 2)
    assert sigma.verdict == "fails" and sigma.witness == (1, 2)
    assert xi.verdict == "fails"
    a, b, y = xi.witness
    assert {1, 2} & {a, b, y}


def test_sigma_xi_on_age_samples(ex66):
    for s in range(10):
        S = sample_age_uniform(ex66, 4, s)
        ca = classes_by_unary(S, ex66)
        for k in (1, 2, 3):
            sigma, xi = check_sigma_xi(S, ca, ex66, k)
            assert sigma and xi


def test_wilson_matches_closed_form():
    for s, n in [(0, 10), (3, 10), (10, 10), (57, 200)]:
        lo, hi = wilson(s, n)
        olo, ohi = wilson_oracle(s, n)
        assert lo == pytest.approx(max(0.0, olo), abs=1e-9) and hi == pytest.approx(min(1.0, ohi), abs=1e-9)


def test_estimate_edge_sentence(rg):
    f = parse("exists x. exists y. (~x=y & E(x,y))", rg.vocab)
    table = estimate_almost_sure(rg, f, [2, 3, 4, 8], 300, seed=5)
    for row in table:
        exact = 1 - 0.5 ** (row.n * (row.n - 1) // 2)
        assert row.lo <= exact <= row.hi
    assert EstimateTable.from_csv(table.to_csv()).to_csv() == table.to_csv()


def test_estimate_independent_of_jobs(rg):
    a = estimate_almost_sure(rg, "ext:2", [8, 12], 12, seed=1, jobs=1)
    b = estimate_almost_sure(rg, "ext:2", [8, 12], 12, seed=1, jobs=2)
    assert a.to_csv() == b.to_csv()


def test_spanning_probability_trend():
    ds = uniform_system(1, 0, 4)
    table = estimate_almost_sure(ds, "spanning", [2, 3, 4, 6, 8], 200, seed=3)
    assert table.nondecreasing_up_to_overlap()
    assert table.rows[-1].estimate > 0.97
    assert table.rows[0].estimate == 0


def test_estimate_rejects_unknown_property(rg):
    with pytest.raises(ValueError):
        estimate_almost_sure(rg, "bogus:2", [4], 2, seed=0)


def _is_partial_iso(res, A, ca, B, cb):
    pairs = res.pairs
    for a, b in pairs:
        if ca.cls[a] != cb.cls[b] or A.unary_codes[a] != B.unary_codes[b]:
            return False
    return all(A.pair_codes[a1, a2] == B.pair_codes[b1, b2] for (a1, b1), (a2, b2) in itertools.permutations(pairs, 2))


def test_back_and_forth_identity(ex66):
    S, ca = sample_kn(ex66, 10, 4)
    res = back_and_forth(S, ca, S, ca, ex66, 20, seed=0, witness="identity")
    assert res.success and all(a == b for a, b in res.pairs) and len(res.pairs) == 20


def test_back_and_forth_stuck_at_two(rg):
    A, ca = complete_graph(rg, 5)
    B, cb = empty_graph(rg, 5)
    res = back_and_forth(A, ca, B, cb, rg, 4, seed=0)
    assert not res.success
    assert len(res.pairs) == 1 and res.stuck.side == "B"
    assert len(res.stuck.pairs) == 1


@pytest.mark.parametrize("seed", range(10))
def test_back_and_forth_maps_are_partial_isomorphisms(ex66, seed):
    A, ca = sample_kn(ex66, 40, 2 * seed)
    B, cb = sample_kn(ex66, 40, 2 * seed + 1)
    res = back_and_forth(A, ca, B, cb, ex66, 5, seed=seed)
    assert _is_partial_iso(res, A, ca, B, cb)


def test_back_and_forth_without_backtracking_can_get_stuck(ex66):
    outcomes = []
    for s in range(10):
        A, ca = sample_kn(ex66, 16, 2 * s)
        B, cb = sample_kn(ex66, 16, 2 * s + 1)
        outcomes.append(back_and_forth(A, ca, B, cb, ex66, 6, seed=s, backtrack=False).success)
    assert not all(outcomes)
