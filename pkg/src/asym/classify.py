"""Syntactic classification of the limit theory of a Delta-system, and finite indiscernibility tests.

The classifier is a function of the system alone.  The finite tests look at a
single structure and must not be read as statements about the theory.

In a vocabulary of arity at most two, the atomic type of a tuple is the
collection of its unary and pair diagrams.  So a set ``X`` is indiscernible
over ``M - X`` exactly when all its elements share one unary diagram, all its
pairs (in either order) share one pair diagram, and every outside element
``z`` has the same pair diagram with each member of ``X``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .compat import ClassAssignment, DeltaSystem, require_valid
from .structures import FiniteStructure


@dataclass(frozen=True)
class TheoryClass:
    simple_su1_trivial: bool
    omega_stable: bool
    strongly_minimal: bool
    random_structure_warning: bool
    justification: str

    def to_json(self) -> dict:
        return {
            "simple_su1_trivial": self.simple_su1_trivial,
            "omega_stable": self.omega_stable,
            "strongly_minimal": self.strongly_minimal,
            "random_structure_warning": self.random_structure_warning,
            "justification": self.justification,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def classify_theory(ds: DeltaSystem) -> TheoryClass:
    require_valid(ds)
    sizes = ds.sizes
    singleton = bool((sizes == 1).all())
    one_free = ds.l - ds.t == 1
    warning = ds.t > 0 and bool((sizes >= 2).any())
    if singleton and one_free:
        why = "every cell is a singleton and exactly one class is infinite: strongly minimal"
    elif singleton:
        why = f"every cell is a singleton: omega-stable; {ds.l - ds.t} infinite classes rule out strong minimality"
    else:
        i, j = (int(v) for v in np.argwhere(sizes >= 2)[0])
        why = f"cell ({i + 1},{j + 1}) has {int(sizes[i, j])} diagrams: simple of SU-rank 1, not omega-stable"
    if warning:
        why += "; base classes with a non-singleton cell: not a random structure candidate"
    return TheoryClass(True, singleton, singleton and one_free, warning, why)


def _homogeneous(S: FiniteStructure, X, outside) -> bool:
    X = list(X)
    if not X:
        return True
    if len({int(S.unary_codes[a]) for a in X}) > 1:
        return False
    codes = S.pair_codes
    if len(X) > 1:
        inner = {int(codes[a, b]) for a in X for b in X if a != b}
        if len(inner) > 1:
            return False
    for z in outside:
        col = codes[X, z]
        if (col != col[0]).any():
            return False
    return True


def check_class_indiscernibility(S: FiniteStructure, ca: ClassAssignment) -> list[bool]:
    """For each class, whether its members are indiscernible over the rest."""
    cls = ca.array
    l = int(cls.max()) + 1 if len(cls) else 0
    out = []
    for i in range(l):
        members = np.flatnonzero(cls == i)
        outside = np.flatnonzero(cls != i)
        out.append(_homogeneous(S, members, outside))
    return out


def find_indiscernible_complement(S: FiniteStructure, m_max: int = 2):
    """Smallest ``X`` with ``|X| <= m_max`` whose complement is indiscernible over ``X``, or None."""
    if m_max > 4:
        raise ValueError("m_max is capped at 4")
    n = S.size
    for m in range(min(m_max, n) + 1):
        for X in itertools.combinations(range(n), m):
            rest = [a for a in range(n) if a not in X]
            if _homogeneous(S, rest, X):
                return X, m
    return None


__all__ = ["TheoryClass", "check_class_indiscernibility", "classify_theory", "find_indiscernible_complement"]
