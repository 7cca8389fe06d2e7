"""Ready-made Delta-systems used by the demos, the tests and the CLI data files."""

from __future__ import annotations

import random

from .compat import DeltaSystem
from .structures import PairDiagram, Vocabulary

BINARY_SLOTS = ("xx", "xy", "yx", "yy")


def diagram(vocab: Vocabulary, true_atoms=()) -> PairDiagram:
    """Pair diagram in which exactly the listed ``(symbol, slot)`` atoms hold."""
    values = {name: {s: False for s in (("x", "y") if ar == 1 else BINARY_SLOTS)} for name, ar in vocab}
    for name, slot in true_atoms:
        values[name][slot] = True
    return PairDiagram.from_atoms(vocab, values)


def _inside(q):
    return [(q, "xx"), (q, "yy"), (q, "xy"), (q, "yx")]


def _between(q):
    return [(q, "xx"), (q, "yy")]


def rg_system() -> DeltaSystem:
    """One class whose pairs are edges or non-edges of a symmetric irreflexive ``E``."""
    vocab = Vocabulary.of(("Q", 2), ("E", 2))
    edge = diagram(vocab, _inside("Q") + [("E", "xy"), ("E", "yx")])
    nonedge = diagram(vocab, _inside("Q"))
    return DeltaSystem.from_upper(vocab, "Q", 1, 0, {(0, 0): [edge, nonedge]})


def example66_system() -> DeltaSystem:
    """Disjoint union of a two-relation random structure and a ``P``-marked random graph.

    Class 1 (``P`` false) carries two symmetric irreflexive relations ``E1``,
    ``E2`` (4 diagrams); class 2 (``P`` true) carries ``E1`` only (2 diagrams);
    no relation crosses the classes (1 diagram).
    """
    vocab = Vocabulary.of(("Q", 2), ("E1", 2), ("E2", 2), ("P", 1))
    inside = _inside("Q")
    c1 = []
    for e1 in (False, True):
        for e2 in (False, True):
            atoms = list(inside)
            if e1:
                atoms += [("E1", "xy"), ("E1", "yx")]
            if e2:
                atoms += [("E2", "xy"), ("E2", "yx")]
            c1.append(diagram(vocab, atoms))
    marked = [("P", "x"), ("P", "y")]
    c2 = [diagram(vocab, inside + marked), diagram(vocab, inside + marked + [("E1", "xy"), ("E1", "yx")])]
    cross = [diagram(vocab, _between("Q") + [("P", "y")])]
    return DeltaSystem.from_upper(vocab, "Q", 2, 0, {(0, 0): c1, (1, 1): c2, (0, 1): cross})


def _class_vocab(l: int, separated: bool) -> Vocabulary:
    syms = [("Q", 2), ("E", 2), ("F", 2)]
    if separated:
        syms += [(f"P{i + 1}", 1) for i in range(l)]
    return Vocabulary.of(*syms)


def _unary_atoms(i, separated, side):
    return [(f"P{i + 1}", side)] if separated else []


def inside_options(vocab: Vocabulary, i: int, separated: bool) -> list[PairDiagram]:
    """The four symmetric diagrams available inside class ``i``."""
    out = []
    base = _inside("Q") + _unary_atoms(i, separated, "x") + _unary_atoms(i, separated, "y")
    for e in (False, True):
        for f in (False, True):
            atoms = list(base)
            if e:
                atoms += [("E", "xy"), ("E", "yx")]
            if f:
                atoms += [("F", "xy"), ("F", "yx")]
            out.append(diagram(vocab, atoms))
    return out


def between_options(vocab: Vocabulary, i: int, j: int, separated: bool) -> list[PairDiagram]:
    """The sixteen diagrams available from class ``i`` (as x) to class ``j`` (as y)."""
    out = []
    base = _between("Q") + _unary_atoms(i, separated, "x") + _unary_atoms(j, separated, "y")
    slots = [("E", "xy"), ("E", "yx"), ("F", "xy"), ("F", "yx")]
    for mask in range(16):
        out.append(diagram(vocab, base + [slots[k] for k in range(4) if (mask >> k) & 1]))
    return out


def uniform_system(l: int, t: int = 0, size: int = 1, separated: bool = False) -> DeltaSystem:
    """Every non-base cell holds the first ``size`` options (base columns hold one)."""
    sizes = {}
    for i in range(l):
        for j in range(i, l):
            sizes[(i, j)] = 1 if (j >= l - t or i >= l - t) else size
    return system_from_sizes(l, t, sizes, separated)


def system_from_sizes(l: int, t: int, sizes, separated: bool = False) -> DeltaSystem:
    """Valid system whose upper cells ``(i, j)`` have the requested sizes (1..4 inside, 1..16 between)."""
    vocab = _class_vocab(l, separated)
    cells = {}
    for i in range(l):
        for j in range(i, l):
            opts = inside_options(vocab, i, separated) if i == j else between_options(vocab, i, j, separated)
            cells[(i, j)] = opts[: sizes[(i, j)]]
    return DeltaSystem.from_upper(vocab, "Q", l, t, cells)


def random_system(rng: random.Random, l: int | None = None, t: int | None = None, separated: bool = False,
                  max_size: int = 3) -> DeltaSystem:
    """A random valid system; cell contents are random subsets of the available options."""
    l = l if l is not None else rng.randint(1, 3)
    t = t if t is not None else rng.randint(0, l - 1)
    vocab = _class_vocab(l, separated)
    cells = {}
    for i in range(l):
        for j in range(i, l):
            base_cell = i >= l - t or j >= l - t
            opts = inside_options(vocab, i, separated) if i == j else between_options(vocab, i, j, separated)
            k = 1 if base_cell else rng.randint(1, min(max_size, len(opts)))
            cells[(i, j)] = rng.sample(opts, k)
    return DeltaSystem.from_upper(vocab, "Q", l, t, cells)


def strongly_minimal_system(t: int = 1) -> DeltaSystem:
    """One infinite class plus ``t`` base elements, every cell a singleton."""
    return uniform_system(t + 1, t, 1)
