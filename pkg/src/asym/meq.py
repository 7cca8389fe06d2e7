"""Adjoining imaginary elements for definable equivalence relations.

For each named formula ``E(x, y)`` the expansion adds a unary symbol ``P_E``
holding on one new element per ``E``-block and a binary ``R_E`` linking each
home element to its block.  ``Peq`` marks the home elements.  If any of the
formulas fails to define an equivalence relation, every ``R_E`` and ``P_E`` is
left empty and no element is added.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .logic import (
    And,
    Atom,
    Equals,
    Exists,
    ExistsExactly,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Partition,
    definable_partition,
    free_vars,
)
from .structures import FiniteStructure, Vocabulary

GUARD = "Peq"


@dataclass(frozen=True)
class ExpandedStructure:
    base: FiniteStructure
    expansion: FiniteStructure
    sort_map: tuple  # "home" or (relation name, block index) per element
    partitions: dict  # relation name -> Partition, or {} in the fallback case
    guard: str = GUARD

    @property
    def is_fallback(self) -> bool:
        return not self.partitions

    @staticmethod
    def symbol_names(name: str) -> tuple[str, str]:
        """``(R_name, P_name)`` as they appear in the expanded vocabulary."""
        return f"R_{name}", f"P_{name}"

    def to_json(self) -> dict:
        data = self.expansion.to_json()
        data["sorts"] = ["home" if s == "home" else [s[0], s[1]] for s in self.sort_map]
        return data

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def expanded_vocabulary(vocab: Vocabulary, names: Sequence[str]) -> Vocabulary:
    new = [(GUARD, 1)]
    for name in names:
        new += [(f"R_{name}", 2), (f"P_{name}", 1)]
    clash = [s for s, _ in new if s in vocab]
    if clash:
        raise ValueError(f"expansion symbols {clash} already occur in the vocabulary")
    return vocab.extend(new)


def expand(S: FiniteStructure, rels: Sequence[tuple[str, Formula]]) -> ExpandedStructure:
    """The expansion of ``S`` by the named formulas with free variables among ``x, y``."""
    names = [name for name, _ in rels]
    if len(set(names)) != len(names):
        raise ValueError("relation names must be distinct")
    for name, f in rels:
        if not free_vars(f) <= {"x", "y"}:
            raise ValueError(f"formula for {name!r} may only have free variables x and y")
    vocab = expanded_vocabulary(S.vocab, names)
    partitions: dict[str, Partition] = {}
    for name, f in rels:
        part = definable_partition(S, f)
        if not part:
            partitions = {}
            break
        partitions[name] = part
    n = S.size
    total = n + sum(len(p.blocks) for p in partitions.values())
    out = {}
    for sym, ar in S.vocab:
        arr = np.zeros((total,) * ar, dtype=bool)
        arr[(slice(0, n),) * ar] = S.rel(sym)
        out[sym] = arr
    peq = np.zeros(total, dtype=bool)
    peq[:n] = True
    out[GUARD] = peq
    sorts: list = ["home"] * n
    offset = n
    for name in names:
        R = np.zeros((total, total), dtype=bool)
        P = np.zeros(total, dtype=bool)
        part = partitions.get(name)
        if part is not None:
            for k, block in enumerate(part.blocks):
                P[offset + k] = True
                R[list(block), offset + k] = True
                sorts.append((name, k))
            offset += len(part.blocks)
        out[f"R_{name}"] = R
        out[f"P_{name}"] = P
    return ExpandedStructure(S, FiniteStructure(vocab, total, out), tuple(sorts), partitions)


def block_census(E: ExpandedStructure, name: str) -> dict[int, int]:
    """Block size -> count, read off ``R_name`` in the expansion."""
    R = E.expansion.rel(f"R_{name}")
    P = E.expansion.rel(f"P_{name}")
    out: dict[int, int] = {}
    for c in np.flatnonzero(P):
        k = int(R[:, c].sum())
        out[k] = out.get(k, 0) + 1
    return dict(sorted(out.items()))


def relativize(f: Formula, guard: str = GUARD) -> Formula:
    """Restrict every quantifier of ``f`` to elements satisfying ``guard``."""
    if isinstance(f, (Atom, Equals)):
        return f
    if isinstance(f, Not):
        return Not(relativize(f.body, guard))
    if isinstance(f, (And, Or, Implies, Iff)):
        return type(f)(relativize(f.left, guard), relativize(f.right, guard))
    g = Atom(guard, (getattr(f, "var"),))
    if isinstance(f, Forall):
        return Forall(f.var, Implies(g, relativize(f.body, guard)))
    if isinstance(f, Exists):
        return Exists(f.var, And(g, relativize(f.body, guard)))
    if isinstance(f, ExistsExactly):
        return ExistsExactly(f.count, f.var, And(g, relativize(f.body, guard)))
    raise TypeError(f"not a formula: {f!r}")


__all__ = ["ExpandedStructure", "GUARD", "block_census", "expand", "expanded_vocabulary", "relativize"]
