"""Compatible sets of pair diagrams (Delta-systems) and their realizations.

A :class:`DeltaSystem` describes ``l`` classes of a designated equivalence
symbol ``Q``.  Classes ``0 .. l-t-1`` are the infinite-intent classes and the
last ``t`` classes are base (singleton) classes.  ``delta[i][j]`` is the set
of pair diagrams allowed between an element of class ``i`` (as ``x``) and an
element of class ``j`` (as ``y``).

Class indices are 0-based in the Python API and 1-based in the JSON format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .errors import BaseSetsPresent, InvalidSystem, NotUnarySeparated, VocabularyMismatch
from .structures import FiniteStructure, PairDiagram, UnaryDiagram, Vocabulary, pair_diagram


@dataclass(frozen=True)
class DeltaSystem:
    vocab: Vocabulary
    q: str
    l: int
    t: int
    delta: tuple[tuple[frozenset, ...], ...]

    def __post_init__(self):
        delta = tuple(tuple(frozenset(cell) for cell in row) for row in self.delta)
        object.__setattr__(self, "delta", delta)
        if self.q not in self.vocab or self.vocab.arity(self.q) != 2:
            raise ValueError(f"designated symbol {self.q!r} must be a binary symbol of the vocabulary")
        if self.l < 1:
            raise ValueError("l must be positive")
        if not 0 <= self.t < self.l:
            raise ValueError("t must satisfy 0 <= t < l")
        if len(delta) != self.l or any(len(row) != self.l for row in delta):
            raise ValueError(f"delta must be an {self.l} x {self.l} matrix")
        for row in delta:
            for cell in row:
                for d in cell:
                    if not isinstance(d, PairDiagram) or d.vocab != self.vocab:
                        raise VocabularyMismatch("every diagram must be a PairDiagram over the system's vocabulary")

    @classmethod
    def from_upper(cls, vocab, q, l, t, cells: Mapping[tuple[int, int], Iterable[PairDiagram]]) -> "DeltaSystem":
        """Build from cells with ``i <= j``; cells below the diagonal are the reversals."""
        delta = [[frozenset() for _ in range(l)] for _ in range(l)]
        for (i, j), diagrams in cells.items():
            if i > j:
                continue
            delta[i][j] = frozenset(diagrams)
            if i != j:
                delta[j][i] = frozenset(d.reverse() for d in diagrams)
        for (i, j), diagrams in cells.items():
            if i > j:
                delta[i][j] = frozenset(diagrams)
        return cls(vocab, q, l, t, tuple(tuple(row) for row in delta))

    @property
    def n_free(self) -> int:
        return self.l - self.t

    def is_base(self, j: int) -> bool:
        return j >= self.l - self.t

    @property
    def base_classes(self) -> range:
        return range(self.l - self.t, self.l)

    @cached_property
    def sizes(self) -> np.ndarray:
        out = np.array([[len(c) for c in row] for row in self.delta], dtype=np.int64)
        out.setflags(write=False)
        return out

    def codes(self, i: int, j: int) -> tuple[int, ...]:
        return self._codes[i][j]

    @cached_property
    def _codes(self):
        return tuple(tuple(tuple(sorted(d.code for d in cell)) for cell in row) for row in self.delta)

    def unary(self, i: int) -> UnaryDiagram | None:
        """Unary diagram of class ``i`` read from row ``i`` (None if the row is empty)."""
        for cell in self.delta[i]:
            for d in sorted(cell):
                return d.unary_x()
        for row in self.delta:
            for d in sorted(row[i]):
                return d.unary_y()
        return None

    @cached_property
    def unary_codes(self) -> tuple[int | None, ...]:
        return tuple(None if (u := self.unary(i)) is None else u.code for i in range(self.l))

    def is_unary_separated(self) -> bool:
        keys = [None if u is None else u.without([self.q]) for u in map(self.unary, range(self.l))]
        return None not in keys and len(set(keys)) == self.l

    def to_json(self) -> dict:
        cells = {}
        for i in range(self.l):
            for j in range(self.l):
                diagrams = sorted(self.delta[i][j])
                if i > j:
                    mirrored = sorted(d.reverse() for d in self.delta[j][i])
                    if diagrams == mirrored:
                        continue
                cells[f"{i + 1},{j + 1}"] = [d.to_json() for d in diagrams]
        return {"vocab": self.vocab.to_json(), "q": self.q, "l": self.l, "t": self.t, "delta": cells}

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data) -> "DeltaSystem":
        if isinstance(data, str):
            data = json.loads(data)
        vocab = Vocabulary.from_json(data["vocab"])
        l, t = int(data["l"]), int(data["t"])
        cells = {}
        for key, diagrams in data["delta"].items():
            i, j = (int(v) - 1 for v in key.split(","))
            if not (0 <= i < l and 0 <= j < l):
                raise ValueError(f"cell {key!r} outside a {l} x {l} system")
            cells[(i, j)] = [PairDiagram.from_json(vocab, d) for d in diagrams]
        return cls.from_upper(vocab, data["q"], l, t, cells)


@dataclass(frozen=True)
class Violation:
    kind: str  # "empty" | "reversal" | "unary" | "base" | "q"
    i: int
    j: int
    diagram: PairDiagram | None = None
    detail: str = ""

    def __str__(self):
        where = f"cell ({self.i + 1},{self.j + 1})"
        return f"{self.kind}: {where} {self.detail}".rstrip()

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "cell": [self.i + 1, self.j + 1],
            "diagram": None if self.diagram is None else self.diagram.to_json(),
            "detail": self.detail,
        }


def validate(ds: DeltaSystem) -> list[Violation]:
    """All violations of the compatibility conditions; an empty list means valid."""
    out = []
    l, q = ds.l, ds.q
    for i in range(l):
        for j in range(l):
            if not ds.delta[i][j]:
                out.append(Violation("empty", i, j, None, "no diagrams allowed"))
    for i in range(l):
        for j in range(l):
            for d in sorted(ds.delta[i][j]):
                if d.reverse() not in ds.delta[j][i]:
                    out.append(Violation("reversal", i, j, d, f"reversed diagram missing from cell ({j + 1},{i + 1})"))
    for i in range(l):
        row = sorted((d for j in range(l) for d in ds.delta[i][j]))
        if row:
            first = row[0].unary_x()
            for j in range(l):
                for d in sorted(ds.delta[i][j]):
                    if d.unary_x() != first:
                        out.append(Violation("unary", i, j, d, f"x has {d.unary_x()!r}, row expects {first!r}"))
    for j in ds.base_classes:
        for i in range(l):
            if len(ds.delta[i][j]) != 1:
                out.append(
                    Violation("base", i, j, None, f"base class column has {len(ds.delta[i][j])} diagrams, needs 1")
                )
    for i in range(l):
        for j in range(l):
            for d in sorted(ds.delta[i][j]):
                xy, yx, xx = d.value(q, "xy"), d.value(q, "yx"), d.value(q, "xx")
                ok = (xy and yx and xx) if i == j else (not xy and not yx and xx)
                if not ok:
                    want = f"{q}(x,y), {q}(y,x), {q}(x,x)" if i == j else f"~{q}(x,y), ~{q}(y,x), {q}(x,x)"
                    out.append(Violation("q", i, j, d, f"needs {want}"))
    return out


def is_valid(ds: DeltaSystem) -> bool:
    return not validate(ds)


def require_valid(ds: DeltaSystem) -> None:
    violations = validate(ds)
    if violations:
        raise InvalidSystem(violations)


@dataclass(frozen=True)
class ClassAssignment:
    """A map from the elements of ``structure`` to class indices ``0..l-1``."""

    structure: FiniteStructure
    cls: tuple[int, ...]

    def __post_init__(self):
        cls = tuple(int(c) for c in self.cls)
        object.__setattr__(self, "cls", cls)
        if len(cls) != self.structure.size:
            raise ValueError("class assignment must cover the whole universe")

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.asarray(self.cls, dtype=np.int64)
        arr.setflags(write=False)
        return arr

    def members(self, i: int) -> list[int]:
        return [a for a, c in enumerate(self.cls) if c == i]

    def problems(self, ds: DeltaSystem, q: str | None = None, full: bool = False) -> list[str]:
        """Reasons this assignment is inconsistent with ``ds`` (empty if consistent)."""
        q = q or ds.q
        out = []
        if any(not 0 <= c < ds.l for c in self.cls):
            out.append("class index out of range")
            return out
        Q = self.structure.rel(q)
        same = self.array[:, None] == self.array[None, :]
        if not np.array_equal(Q, same):
            out.append(f"{q}-blocks differ from the class preimages")
        for j in ds.base_classes:
            k = len(self.members(j))
            if k > 1 or (full and k != 1):
                out.append(f"base class {j + 1} has {k} elements")
        return out


@dataclass(frozen=True)
class MissingDiagram:
    i: int
    j: int
    diagram: PairDiagram

    def __bool__(self):
        return False


def spanning_witnesses(S: FiniteStructure, ds: DeltaSystem, ca: ClassAssignment):
    """A pair ``(a, b)`` realizing every allowed diagram of every cell.

    Returns a dict ``{(i, j, diagram): (a, b)}`` or the first :class:`MissingDiagram`.
    The diagonal cells of base classes have no realizable pairs and are skipped.
    """
    require_valid(ds)
    if S.vocab != ds.vocab:
        raise VocabularyMismatch("structure and system have different vocabularies")
    codes = S.pair_codes
    cls = ca.array
    table = {}
    for i in range(ds.l):
        rows = np.flatnonzero(cls == i)
        for j in range(ds.l):
            if i == j and ds.is_base(i):
                continue
            cols = np.flatnonzero(cls == j)
            block = codes[np.ix_(rows, cols)]
            for d in sorted(ds.delta[i][j]):
                hits = np.argwhere(block == d.code)
                if len(hits) == 0:
                    return MissingDiagram(i, j, d)
                r, c = hits[0]
                table[(i, j, d)] = (int(rows[r]), int(cols[c]))
    return table


@dataclass(frozen=True)
class NotRestricted:
    reason: str

    def __bool__(self):
        return False


def q_blocks(S: FiniteStructure, q: str) -> list[list[int]] | NotRestricted:
    """Blocks of ``q`` ordered by size (descending) then least element."""
    Q = S.rel(q)
    n = S.size
    if not np.all(np.diagonal(Q)):
        return NotRestricted(f"{q} is not reflexive")
    if not np.array_equal(Q, Q.T):
        return NotRestricted(f"{q} is not symmetric")
    Qi = Q.astype(np.int64)
    if n and np.any(((Qi @ Qi) > 0) & ~Q):
        return NotRestricted(f"{q} is not transitive")
    seen = set()
    blocks = []
    for a in range(n):
        if a not in seen:
            block = [int(b) for b in np.flatnonzero(Q[a])]
            seen.update(block)
            blocks.append(block)
    blocks.sort(key=lambda b: (-len(b), b[0]))
    return blocks


def induced_delta(S: FiniteStructure, q: str):
    """The Delta-system observed in ``S`` together with its class assignment.

    Returns ``(DeltaSystem, ClassAssignment)`` or :class:`NotRestricted` when ``q``
    is not an equivalence relation.  Singleton blocks are base classes, except
    that at least one class is kept as an infinite-intent class.  Cells with no
    observed pair (inside a singleton block) are empty.
    """
    blocks = q_blocks(S, q)
    if isinstance(blocks, NotRestricted):
        return blocks
    l = len(blocks)
    if l == 0:
        return NotRestricted("empty structure has no classes")
    t = min(sum(1 for b in blocks if len(b) == 1), l - 1)
    cls = [0] * S.size
    for i, block in enumerate(blocks):
        for a in block:
            cls[a] = i
    cls_arr = np.asarray(cls)
    codes = S.pair_codes
    delta = []
    for i in range(l):
        row = []
        for j in range(l):
            block = codes[np.ix_(np.flatnonzero(cls_arr == i), np.flatnonzero(cls_arr == j))]
            observed = {int(c) for c in np.unique(block) if c != -1} if block.size else set()
            row.append(frozenset(PairDiagram(S.vocab, c) for c in observed))
        delta.append(tuple(row))
    ds = DeltaSystem(S.vocab, q, l, t, tuple(delta))
    return ds, ClassAssignment(S, tuple(cls))


def classes_by_unary(S: FiniteStructure, ds: DeltaSystem) -> ClassAssignment:
    """Class assignment of a structure over a unary-separated system."""
    if not ds.is_unary_separated():
        raise NotUnarySeparated("classes are not determined by unary diagrams")
    lookup = {ds.unary(i).code: i for i in range(ds.l)}
    cls = []
    for a in range(S.size):
        code = int(S.unary_codes[a])
        if code not in lookup:
            raise ValueError(f"element {a} has a unary diagram matching no class")
        cls.append(lookup[code])
    return ClassAssignment(S, tuple(cls))


def in_alphabet(S: FiniteStructure, ds: DeltaSystem, ca: ClassAssignment) -> tuple[np.ndarray, np.ndarray]:
    """``(pair_ok, unary_ok)``: which pairs and elements respect ``ds`` under ``ca``.

    ``pair_ok[a, b]`` is false when the diagram of ``(a, b)`` is not allowed
    between their classes or when ``a`` and ``b`` share a base class.  The
    diagonal is true.
    """
    codes = S.pair_codes
    cls = ca.array
    n = S.size
    pair_ok = np.zeros((n, n), dtype=bool)
    for i in range(ds.l):
        ri = cls == i
        for j in range(ds.l):
            mask = ri[:, None] & (cls == j)[None, :]
            allowed = np.isin(codes, np.asarray(ds.codes(i, j), dtype=codes.dtype)) if ds.codes(i, j) else False
            if i == j and ds.is_base(i):
                allowed = False
            pair_ok |= mask & allowed
    if n:
        np.fill_diagonal(pair_ok, True)
    want = np.array([-1 if c is None else c for c in ds.unary_codes], dtype=np.int64)
    unary_ok = (S.unary_codes == want[cls]) if n else np.zeros(0, dtype=bool)
    return pair_ok, unary_ok


def age_pair_constraint(ds: DeltaSystem):
    """Pair predicate accepting exactly the pairs an age member may contain.

    For unary-separated systems this, applied to every pair, characterizes the
    finite structures embeddable in the limit structure.
    """
    by_unary: dict[int, list[int]] = {}
    for i in range(ds.l):
        u = ds.unary(i)
        if u is not None:
            by_unary.setdefault(u.code, []).append(i)
    allowed = {(i, j): set(ds.codes(i, j)) for i in range(ds.l) for j in range(ds.l)}

    def constraint(ux: UnaryDiagram, uy: UnaryDiagram, d: PairDiagram) -> bool:
        for i in by_unary.get(ux.code, ()):
            for j in by_unary.get(uy.code, ()):
                if i == j and ds.is_base(i):
                    continue
                if d.code in allowed[(i, j)]:
                    return True
        return False

    return constraint


def unary_constraint(ds: DeltaSystem):
    codes = {u.code for u in map(ds.unary, range(ds.l)) if u is not None}
    return lambda u: u.code in codes


def pad(ds: DeltaSystem) -> DeltaSystem:
    """Pad every cell to the same number of diagrams with fresh binary symbols.

    With ``r = max |delta[i][j]| + 1``, cell ``(i, j)`` (``i <= j``) gains
    ``r - |delta[i][j]|`` fresh symbols ``R{s}_{i}_{j}`` and the diagrams
    ``P_s = P_{s-1} + R{s}_{i}_{j}(x,y) + R{s}_{i}_{j}(y,x)`` built on its least
    diagram ``P_0``.  Cells below the diagonal are the reversals.
    """
    require_valid(ds)
    if ds.t > 0:
        raise BaseSetsPresent("padding is defined only for systems without base classes")
    r = int(ds.sizes.max()) + 1
    fresh: dict[tuple[int, int], list[str]] = {}
    vocab = ds.vocab
    for i in range(ds.l):
        for j in range(i, ds.l):
            names = []
            for s in range(1, r - len(ds.delta[i][j]) + 1):
                name = vocab.fresh_name(f"R{s}_{i + 1}_{j + 1}")
                vocab = vocab.extend([(name, 2)])
                names.append(name)
            fresh[(i, j)] = names
    cells = {}
    for i in range(ds.l):
        for j in range(i, ds.l):
            lifted = [d.lift(vocab) for d in sorted(ds.delta[i][j])]
            current = lifted[0]
            for name in fresh[(i, j)]:
                current = current.with_values({(name, "xy"): True, (name, "yx"): True})
                lifted.append(current)
            cells[(i, j)] = lifted
    return DeltaSystem.from_upper(vocab, ds.q, ds.l, 0, cells)
