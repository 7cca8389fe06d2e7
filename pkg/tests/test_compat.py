import json
import random

import pytest

from asym.compat import (
    ClassAssignment,
    DeltaSystem,
    MissingDiagram,
    NotRestricted,
    classes_by_unary,
    in_alphabet,
    induced_delta,
    is_valid,
    pad,
    q_blocks,
    require_valid,
    spanning_witnesses,
    validate,
)
from asym.errors import BaseSetsPresent, InvalidSystem, NotUnarySeparated
from asym.fixtures import random_system, uniform_system
from asym.generators import sample_kn
from asym.structures import FiniteStructure, Vocabulary

from family import invalid_family, valid_family


@pytest.mark.parametrize("name", sorted(valid_family()))
def test_valid_family(name):
    assert validate(valid_family()[name]) == []


@pytest.mark.parametrize("name", sorted(invalid_family()))
def test_invalid_family_isolated(name):
    ds, kind = invalid_family()[name]
    kinds = {v.kind for v in validate(ds)}
    assert kinds == {kind}
    with pytest.raises(InvalidSystem):
        require_valid(ds)


def test_empty_cell_is_reported():
    ds = uniform_system(2, 0, 1)
    delta = [list(r) for r in ds.delta]
    delta[0][1] = frozenset()
    delta[1][0] = frozenset()
    bad = DeltaSystem(ds.vocab, ds.q, 2, 0, tuple(map(tuple, delta)))
    assert {v.kind for v in validate(bad)} == {"empty"}


@pytest.mark.parametrize("seed", range(20))
def test_random_systems_valid_and_json_round_trip(seed):
    ds = random_system(random.Random(seed))
    assert is_valid(ds)
    again = DeltaSystem.from_json(json.loads(ds.dumps()))
    assert again == ds


def test_json_uses_one_based_keys(rg):
    assert list(rg.to_json()["delta"]) == ["1,1"]


def test_sizes(ex66):
    assert ex66.sizes.tolist() == [[4, 1], [1, 2]]
    assert ex66.is_unary_separated()


def test_pad_equalizes_sizes(ex66):
    padded = pad(ex66)
    assert is_valid(padded)
    assert (padded.sizes == 5).all()
    assert len(padded.vocab) == len(ex66.vocab) + 1 + 3 + 4


def test_pad_requires_no_base():
    with pytest.raises(BaseSetsPresent):
        pad(uniform_system(2, 1, 1))


def test_sample_is_in_alphabet_and_spanning(ex66):
    S, ca = sample_kn(ex66, 12, 3)
    pair_ok, unary_ok = in_alphabet(S, ex66, ca)
    assert pair_ok.all() and unary_ok.all()
    assert ca.problems(ex66, full=True) == []
    wit = spanning_witnesses(S, ex66, ca)
    assert wit and len(wit) == 4 + 1 + 1 + 2


def test_spanning_missing():
    ds = uniform_system(1, 0, 4)
    S, ca = sample_kn(ds, 2, 0)
    res = spanning_witnesses(S, ds, ca)
    assert isinstance(res, MissingDiagram) and not res


def test_induced_delta_recovers_system(ex66):
    S, ca = sample_kn(ex66, 20, 7)
    got, ca2 = induced_delta(S, "Q")
    assert got == ex66
    assert ca2.cls == ca.cls


def test_induced_delta_base_blocks():
    ds = uniform_system(3, 1, 2)
    S, ca = sample_kn(ds, 10, 1)
    got, _ = induced_delta(S, "Q")
    assert (got.l, got.t) == (3, 1)
    want = ds.sizes.copy()
    want[2, 2] = 0  # a singleton block has no internal pairs to observe
    assert got.sizes.tolist() == want.tolist()


def test_q_blocks_not_equivalence():
    V = Vocabulary.of(("Q", 2))
    S = FiniteStructure.from_interp(V, 2, {"Q": [(0, 0), (1, 1), (0, 1)]})
    assert isinstance(q_blocks(S, "Q"), NotRestricted)


def test_classes_by_unary(ex66):
    S, ca = sample_kn(ex66, 5, 0)
    assert classes_by_unary(S, ex66) == ca
    with pytest.raises(NotUnarySeparated):
        classes_by_unary(S, uniform_system(2, 0, 1))


def test_class_assignment_problems(rg):
    S, _ = sample_kn(rg, 4, 0)
    assert ClassAssignment(S, (0, 0, 0, 1)).problems(rg) != []
