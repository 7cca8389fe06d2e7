import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asym.logic import definable_partition, evaluate, parse, random_formula, to_text
from asym.meq import block_census, expand, relativize
from asym.structures import FiniteStructure, Vocabulary

from test_structures import structures

V = Vocabulary.of(("E", 2), ("P", 1))


def parity():
    E = [(a, b) for a in range(4) for b in range(4) if a // 2 == b // 2]
    return FiniteStructure.from_interp(V, 4, {"E": E})


def test_parity_blocks():
    S = parity()
    X = expand(S, [("B", parse("E(x,y)", V))])
    assert X.expansion.size == 6
    assert X.expansion.rel("P_B").tolist() == [False] * 4 + [True, True]
    assert int(X.expansion.rel("R_B").sum()) == 4
    assert X.sort_map == ("home",) * 4 + (("B", 0), ("B", 1))
    assert X.to_json()["sorts"][4] == ["B", 0]


def test_equality_gives_singletons():
    S = parity()
    X = expand(S, [("I", parse("x=y", V))])
    assert X.expansion.size == 8
    assert block_census(X, "I") == {1: 4}


def test_fallback_empties_everything():
    S = parity()
    X = expand(S, [("B", parse("E(x,y)", V)), ("D", parse("E(x,y) & ~x=y", V))])
    assert X.is_fallback and X.expansion.size == 4
    for name in ("R_B", "P_B", "R_D", "P_D"):
        assert not X.expansion.rel(name).any()
    assert X.expansion.restrict(V) == S


def test_home_sort_and_base_relations():
    S = parity()
    X = expand(S, [("B", parse("E(x,y)", V))])
    assert X.expansion.rel("Peq").tolist() == [True] * 4 + [False] * 2
    assert not X.expansion.rel("E")[4:, :].any() and not X.expansion.rel("E")[:, 4:].any()
    assert np.array_equal(X.expansion.rel("E")[:4, :4], S.rel("E"))


@pytest.mark.parametrize(
    "src,want",
    [
        ("forall x. E(x,x)", "forall x. (Peq(x) -> E(x,x))"),
        ("E(x,y)", "E(x,y)"),
        ("exists x. forall y. E(x,y)", "exists x. (Peq(x) & forall y. (Peq(y) -> E(x,y)))"),
    ],
)
def test_relativize_examples(src, want):
    assert to_text(relativize(parse(src, V))) == want


@settings(max_examples=50, deadline=None)
@given(structures(V, max_n=4), st.integers(0, 10**6))
def test_transfer(S, seed):
    rng = random.Random(seed)
    rels = [("A", parse("P(x) <-> P(y)", V)), ("B", parse("x=y", V))]
    X = expand(S, rels)
    for _ in range(5):
        f = random_formula(V, 3, rng)
        assert evaluate(S, f) == evaluate(X.expansion, relativize(f))


@settings(max_examples=50, deadline=None)
@given(structures(V, max_n=5))
def test_census_matches_partition(S):
    f = parse("P(x) <-> P(y)", V)
    X = expand(S, [("A", f)])
    assert block_census(X, "A") == definable_partition(S, f).census()


def test_name_clash_rejected():
    W = Vocabulary.of(("Peq", 1))
    with pytest.raises(ValueError):
        expand(FiniteStructure.empty(W, 1), [])
