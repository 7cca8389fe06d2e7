"""Vocabularies, finite structures, two-variable atomic diagrams and embeddings.

Binary relations are stored as read-only ``n x n`` boolean matrices and unary
relations as read-only length-``n`` boolean vectors.  Atomic diagrams of
pairs are encoded as integers: bit ``k`` is the truth value of the ``k``-th
atom of :attr:`Vocabulary.pair_atoms`.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    CapExceeded,
    ElementOutOfRange,
    EqualElements,
    UnknownSymbol,
    VocabularyMismatch,
)

NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

UNARY_SLOTS = ("x", "y")
BINARY_SLOTS = ("xx", "xy", "yx", "yy")
_SWAP = {"x": "y", "y": "x", "xx": "yy", "yy": "xx", "xy": "yx", "yx": "xy"}

# numpy int64 holds at most 63 usable bits; wider diagrams fall back to Python ints
_MAX_INT64_ATOMS = 62

ENUMERATION_CAP = 7


@dataclass(frozen=True)
class Vocabulary:
    """An ordered list of relation symbols of arity 1 or 2."""

    symbols: tuple[tuple[str, int], ...]

    def __post_init__(self):
        symbols = tuple((str(name), int(arity)) for name, arity in self.symbols)
        object.__setattr__(self, "symbols", symbols)
        seen = set()
        for name, arity in symbols:
            if not NAME_RE.match(name):
                raise ValueError(f"invalid symbol name {name!r}")
            if name in seen:
                raise ValueError(f"duplicate symbol {name!r}")
            if arity not in (1, 2):
                raise ValueError(f"symbol {name!r} has arity {arity}; only 1 and 2 are supported")
            seen.add(name)

    @classmethod
    def of(cls, *symbols: tuple[str, int]) -> "Vocabulary":
        return cls(tuple(symbols))

    def __contains__(self, name) -> bool:
        return name in self._arity

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self):
        return len(self.symbols)

    @cached_property
    def _arity(self) -> dict[str, int]:
        return dict(self.symbols)

    def arity(self, name: str) -> int:
        try:
            return self._arity[name]
        except KeyError:
            raise UnknownSymbol(f"symbol {name!r} is not in the vocabulary") from None

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.symbols)

    @property
    def unary(self) -> tuple[str, ...]:
        return tuple(name for name, arity in self.symbols if arity == 1)

    @property
    def binary(self) -> tuple[str, ...]:
        return tuple(name for name, arity in self.symbols if arity == 2)

    def extend(self, symbols: Iterable[tuple[str, int]]) -> "Vocabulary":
        return Vocabulary(self.symbols + tuple(symbols))

    def restrict(self, names: Iterable[str]) -> "Vocabulary":
        keep = set(names)
        return Vocabulary(tuple(s for s in self.symbols if s[0] in keep))

    def fresh_name(self, stem: str) -> str:
        name = stem
        while name in self:
            name += "_"
        return name

    @cached_property
    def pair_atoms(self) -> tuple[tuple[str, str], ...]:
        atoms = []
        for name, arity in self.symbols:
            for slot in (UNARY_SLOTS if arity == 1 else BINARY_SLOTS):
                atoms.append((name, slot))
        return tuple(atoms)

    @cached_property
    def unary_atoms(self) -> tuple[tuple[str, str], ...]:
        return tuple((name, "x" if arity == 1 else "xx") for name, arity in self.symbols)

    @cached_property
    def _pair_bit(self) -> dict[tuple[str, str], int]:
        return {atom: k for k, atom in enumerate(self.pair_atoms)}

    @cached_property
    def _reverse_perm(self) -> tuple[int, ...]:
        bit = self._pair_bit
        return tuple(bit[(name, _SWAP[slot])] for name, slot in self.pair_atoms)

    @cached_property
    def _x_to_unary(self) -> tuple[tuple[int, int], ...]:
        # (pair bit, unary bit) for the atoms describing x alone
        bit = self._pair_bit
        return tuple((bit[atom], k) for k, atom in enumerate(self.unary_atoms))

    def to_json(self) -> list:
        return [[name, arity] for name, arity in self.symbols]

    @classmethod
    def from_json(cls, data) -> "Vocabulary":
        return cls(tuple((name, arity) for name, arity in data))


def _decode(atoms, code: int) -> dict[str, dict[str, bool]]:
    out: dict[str, dict[str, bool]] = {}
    for k, (name, slot) in enumerate(atoms):
        out.setdefault(name, {})[slot] = bool((code >> k) & 1)
    return out


def _encode(atoms, values: Mapping[str, Mapping[str, bool]], what: str) -> int:
    code = 0
    expected = {}
    for name, slot in atoms:
        expected.setdefault(name, set()).add(slot)
    if set(values) != set(expected):
        raise ValueError(f"{what} must assign exactly the symbols {sorted(expected)}, got {sorted(values)}")
    for name, slots in values.items():
        if set(slots) != expected[name]:
            raise ValueError(f"{what} for {name!r} must assign exactly {sorted(expected[name])}")
    for k, (name, slot) in enumerate(atoms):
        if values[name][slot]:
            code |= 1 << k
    return code


@dataclass(frozen=True, order=True)
class UnaryDiagram:
    """Truth values of ``P(x)`` for unary ``P`` and ``R(x,x)`` for binary ``R``."""

    vocab: Vocabulary
    code: int

    @classmethod
    def from_atoms(cls, vocab: Vocabulary, values: Mapping[str, Mapping[str, bool]]) -> "UnaryDiagram":
        return cls(vocab, _encode(vocab.unary_atoms, values, "unary diagram"))

    def atoms(self) -> dict[str, dict[str, bool]]:
        return _decode(self.vocab.unary_atoms, self.code)

    def without(self, names: Iterable[str]) -> tuple:
        """Atom values with the given symbols dropped, as a comparable tuple."""
        drop = set(names)
        return tuple(
            (name, slot, bool((self.code >> k) & 1))
            for k, (name, slot) in enumerate(self.vocab.unary_atoms)
            if name not in drop
        )

    def __repr__(self):
        true = [f"{n}({'x' if s == 'x' else 'x,x'})" for n, d in self.atoms().items() for s, v in d.items() if v]
        return f"UnaryDiagram({', '.join(true) or 'all false'})"


@dataclass(frozen=True, order=True)
class PairDiagram:
    """The atomic diagram of two distinct elements ``x`` and ``y``.

    Equality between ``x`` and ``y`` is never an atom; the elements are always
    assumed distinct.
    """

    vocab: Vocabulary
    code: int

    @classmethod
    def from_atoms(cls, vocab: Vocabulary, values: Mapping[str, Mapping[str, bool]]) -> "PairDiagram":
        return cls(vocab, _encode(vocab.pair_atoms, values, "pair diagram"))

    def atoms(self) -> dict[str, dict[str, bool]]:
        return _decode(self.vocab.pair_atoms, self.code)

    def to_json(self) -> dict:
        return self.atoms()

    @classmethod
    def from_json(cls, vocab: Vocabulary, data) -> "PairDiagram":
        return cls.from_atoms(vocab, data)

    def value(self, name: str, slot: str) -> bool:
        try:
            k = self.vocab._pair_bit[(name, slot)]
        except KeyError:
            raise UnknownSymbol(f"no atom {name}[{slot}] in the vocabulary") from None
        return bool((self.code >> k) & 1)

    def reverse(self) -> "PairDiagram":
        return PairDiagram(self.vocab, reverse_code(self.vocab, self.code))

    def unary_x(self) -> UnaryDiagram:
        return UnaryDiagram(self.vocab, _x_unary_code(self.vocab, self.code))

    def unary_y(self) -> UnaryDiagram:
        return self.reverse().unary_x()

    def with_values(self, changes: Mapping[tuple[str, str], bool]) -> "PairDiagram":
        code = self.code
        for atom, v in changes.items():
            k = self.vocab._pair_bit[atom]
            code = (code | (1 << k)) if v else (code & ~(1 << k))
        return PairDiagram(self.vocab, code)

    def lift(self, vocab: Vocabulary) -> "PairDiagram":
        """Re-encode in a larger vocabulary; atoms of new symbols are false."""
        values = {name: {slot: False for slot in (UNARY_SLOTS if ar == 1 else BINARY_SLOTS)} for name, ar in vocab}
        for name, slots in self.atoms().items():
            if vocab._arity.get(name) != self.vocab.arity(name):
                raise VocabularyMismatch(f"symbol {name!r} missing or with different arity")
            values[name].update(slots)
        return PairDiagram.from_atoms(vocab, values)

    def restrict(self, vocab: Vocabulary) -> "PairDiagram":
        atoms = self.atoms()
        return PairDiagram.from_atoms(vocab, {name: atoms[name] for name in vocab.names})

    def __repr__(self):
        true = []
        for name, slots in self.atoms().items():
            for slot, v in slots.items():
                if v:
                    true.append(f"{name}({','.join(slot)})")
        return f"PairDiagram({', '.join(true) or 'all false'})"


def reverse_code(vocab: Vocabulary, code: int) -> int:
    out = 0
    for k, target in enumerate(vocab._reverse_perm):
        if (code >> k) & 1:
            out |= 1 << target
    return out


def _x_unary_code(vocab: Vocabulary, code: int) -> int:
    out = 0
    for pair_bit, unary_bit in vocab._x_to_unary:
        if (code >> pair_bit) & 1:
            out |= 1 << unary_bit
    return out


def reverse(d: PairDiagram) -> PairDiagram:
    return d.reverse()


def all_pair_diagrams(vocab: Vocabulary) -> Iterator[PairDiagram]:
    for code in range(1 << len(vocab.pair_atoms)):
        yield PairDiagram(vocab, code)


class FiniteStructure:
    """An immutable labeled structure on ``{0, ..., n-1}``."""

    __slots__ = ("vocab", "size", "_rels", "_codes", "_ucodes", "_hash")

    def __init__(self, vocab: Vocabulary, size: int, relations: Mapping[str, np.ndarray]):
        size = int(size)
        if size < 0:
            raise ValueError("structure size must be non-negative")
        if set(relations) != set(vocab.names):
            raise VocabularyMismatch(
                f"interpretation keys {sorted(relations)} do not match vocabulary {list(vocab.names)}"
            )
        rels = {}
        for name, arity in vocab:
            arr = np.array(relations[name], dtype=bool, copy=True)
            shape = (size,) * arity
            if arr.shape != shape:
                raise ValueError(f"relation {name!r} has shape {arr.shape}, expected {shape}")
            arr.setflags(write=False)
            rels[name] = arr
        self.vocab = vocab
        self.size = size
        self._rels = rels
        self._codes = None
        self._ucodes = None
        self._hash = None

    @classmethod
    def from_interp(cls, vocab: Vocabulary, size: int, interp: Mapping[str, Iterable]) -> "FiniteStructure":
        missing = set(vocab.names) - set(interp)
        extra = set(interp) - set(vocab.names)
        if extra:
            raise VocabularyMismatch(f"symbols {sorted(extra)} are not in the vocabulary")
        rels = {}
        for name, arity in vocab:
            arr = np.zeros((size,) * arity, dtype=bool)
            for tup in ([] if name in missing else interp[name]):
                idx = (tup,) if arity == 1 and not isinstance(tup, (list, tuple)) else tuple(tup)
                if len(idx) != arity:
                    raise ValueError(f"tuple {tup!r} for {name!r} has wrong length")
                for e in idx:
                    if not 0 <= int(e) < size:
                        raise ElementOutOfRange(f"element {e} of {name}{tuple(idx)} outside universe of size {size}")
                arr[tuple(int(e) for e in idx)] = True
            rels[name] = arr
        return cls(vocab, size, rels)

    @classmethod
    def empty(cls, vocab: Vocabulary, size: int) -> "FiniteStructure":
        return cls.from_interp(vocab, size, {})

    def __len__(self):
        return self.size

    def rel(self, name: str) -> np.ndarray:
        try:
            return self._rels[name]
        except KeyError:
            raise UnknownSymbol(f"symbol {name!r} is not in the vocabulary") from None

    def holds(self, name: str, *elements: int) -> bool:
        return bool(self.rel(name)[elements])

    def interp(self, name: str) -> list:
        arr = self.rel(name)
        if arr.ndim == 1:
            return [int(a) for a in np.flatnonzero(arr)]
        return [[int(a), int(b)] for a, b in zip(*np.nonzero(arr))]

    def _check_element(self, a):
        if not 0 <= a < self.size:
            raise ElementOutOfRange(f"element {a} outside universe of size {self.size}")

    @property
    def pair_codes(self) -> np.ndarray:
        """``codes[a, b]`` is the diagram code of ``(a, b)``; the diagonal is -1."""
        if self._codes is None:
            self._codes = _pair_code_matrix(self)
        return self._codes

    @property
    def unary_codes(self) -> np.ndarray:
        if self._ucodes is None:
            n = self.size
            codes = np.zeros(n, dtype=np.int64)
            for k, (name, slot) in enumerate(self.vocab.unary_atoms):
                arr = self._rels[name]
                bits = arr if arr.ndim == 1 else np.diagonal(arr)
                codes |= bits.astype(np.int64) << k
            codes.setflags(write=False)
            self._ucodes = codes
        return self._ucodes

    def unary_diagram(self, a: int) -> UnaryDiagram:
        self._check_element(a)
        return UnaryDiagram(self.vocab, int(self.unary_codes[a]))

    def restrict(self, vocab: Vocabulary) -> "FiniteStructure":
        """Reduct to a sub-vocabulary."""
        for name, arity in vocab:
            if self.vocab._arity.get(name) != arity:
                raise VocabularyMismatch(f"symbol {name!r} missing or with different arity")
        return FiniteStructure(vocab, self.size, {name: self._rels[name] for name in vocab.names})

    def induced(self, elements: Sequence[int]) -> "FiniteStructure":
        """Induced substructure on ``elements``, relabeled ``0..k-1`` in the given order."""
        idx = np.asarray(list(elements), dtype=np.int64)
        for a in idx:
            self._check_element(int(a))
        rels = {}
        for name, arr in self._rels.items():
            rels[name] = arr[idx] if arr.ndim == 1 else arr[np.ix_(idx, idx)]
        return FiniteStructure(self.vocab, len(idx), rels)

    def relabel(self, perm: Sequence[int]) -> "FiniteStructure":
        """Image under the bijection ``a -> perm[a]``."""
        perm = np.asarray(list(perm), dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.size)):
            raise ValueError("perm must be a permutation of the universe")
        inv = np.argsort(perm)
        return self.induced(inv)

    def to_json(self) -> dict:
        return {
            "vocab": self.vocab.to_json(),
            "size": self.size,
            "interp": {name: self.interp(name) for name in self.vocab.names},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data) -> "FiniteStructure":
        if isinstance(data, str):
            data = json.loads(data)
        vocab = Vocabulary.from_json(data["vocab"])
        return cls.from_interp(vocab, data["size"], data.get("interp", {}))

    def __eq__(self, other):
        if not isinstance(other, FiniteStructure):
            return NotImplemented
        return (
            self.vocab == other.vocab
            and self.size == other.size
            and all(np.array_equal(self._rels[k], other._rels[k]) for k in self._rels)
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vocab, self.size) + tuple(self._rels[k].tobytes() for k in self.vocab.names))
        return self._hash

    def __repr__(self):
        parts = ", ".join(f"{name}={self.interp(name)}" for name in self.vocab.names)
        return f"FiniteStructure(size={self.size}, {parts})"


def _pair_code_matrix(S: FiniteStructure) -> np.ndarray:
    n = S.size
    natoms = len(S.vocab.pair_atoms)
    wide = natoms > _MAX_INT64_ATOMS
    codes = np.zeros((n, n), dtype=object if wide else np.int64)
    for k, (name, slot) in enumerate(S.vocab.pair_atoms):
        arr = S._rels[name]
        if arr.ndim == 1:
            bits = np.broadcast_to(arr[:, None] if slot == "x" else arr[None, :], (n, n))
        else:
            diag = np.diagonal(arr)
            bits = {
                "xx": np.broadcast_to(diag[:, None], (n, n)),
                "yy": np.broadcast_to(diag[None, :], (n, n)),
                "xy": arr,
                "yx": arr.T,
            }[slot]
        if wide:
            codes = codes + np.where(bits, 1 << k, 0).astype(object)
        else:
            codes |= bits.astype(np.int64) << k
    if n:
        np.fill_diagonal(codes, -1)
    codes.setflags(write=False)
    return codes


def pair_diagram(S: FiniteStructure, a: int, b: int) -> PairDiagram:
    """Atomic diagram of ``(a, b)`` with ``x -> a`` and ``y -> b``."""
    S._check_element(a)
    S._check_element(b)
    if a == b:
        raise EqualElements("pair diagrams are defined for distinct elements only")
    return PairDiagram(S.vocab, int(S.pair_codes[a, b]))


def _as_map(f, size: int) -> list[int]:
    if isinstance(f, Mapping):
        missing = [a for a in range(size) if a not in f]
        if missing:
            raise ValueError(f"map is undefined on {missing}")
        return [int(f[a]) for a in range(size)]
    f = [int(v) for v in f]
    if len(f) != size:
        raise ValueError(f"map has {len(f)} values for a universe of size {size}")
    return f


def is_embedding(f, A: FiniteStructure, B: FiniteStructure) -> bool:
    """True iff ``f`` is injective and preserves and reflects every relation."""
    if A.vocab != B.vocab:
        raise VocabularyMismatch("structures have different vocabularies")
    img = _as_map(f, A.size)
    if len(set(img)) != len(img):
        return False
    if any(not 0 <= b < B.size for b in img):
        return False
    idx = np.asarray(img, dtype=np.int64)
    for name, arity in A.vocab:
        a, b = A.rel(name), B.rel(name)
        image = b[idx] if arity == 1 else b[np.ix_(idx, idx)]
        if not np.array_equal(a, image):
            return False
    return True


def _structure_from_codes(vocab: Vocabulary, n: int, ucodes: Sequence[int], pairs: Mapping[tuple[int, int], int]):
    rels = {name: np.zeros((n,) * arity, dtype=bool) for name, arity in vocab}
    for k, (name, slot) in enumerate(vocab.unary_atoms):
        arr = rels[name]
        for a in range(n):
            if (ucodes[a] >> k) & 1:
                if arr.ndim == 1:
                    arr[a] = True
                else:
                    arr[a, a] = True
    bit = vocab._pair_bit
    for name in vocab.binary:
        kxy, kyx = bit[(name, "xy")], bit[(name, "yx")]
        arr = rels[name]
        for (a, b), code in pairs.items():
            arr[a, b] = bool((code >> kxy) & 1)
            arr[b, a] = bool((code >> kyx) & 1)
    return FiniteStructure(vocab, n, rels)


def _pair_options(vocab: Vocabulary, ux: int, uy: int) -> list[int]:
    """All pair-diagram codes whose x/y unary parts are ``ux``/``uy``."""
    bit = vocab._pair_bit
    base = 0
    for k, (name, slot) in enumerate(vocab.unary_atoms):
        if (ux >> k) & 1:
            base |= 1 << bit[(name, slot)]
        if (uy >> k) & 1:
            base |= 1 << bit[(name, "y" if slot == "x" else "yy")]
    free = [bit[(name, s)] for name in vocab.binary for s in ("xy", "yx")]
    out = []
    for combo in itertools.product((0, 1), repeat=len(free)):
        code = base
        for k, v in zip(free, combo):
            if v:
                code |= 1 << k
        out.append(code)
    return out


def enumerate_structures(
    vocab: Vocabulary,
    n: int,
    pair_constraint: Callable[[UnaryDiagram, UnaryDiagram, PairDiagram], bool] | None = None,
    cap: int = ENUMERATION_CAP,
) -> Iterator[FiniteStructure]:
    """Yield every labeled structure on ``{0..n-1}`` exactly once.

    With ``pair_constraint`` only structures in which every pair ``a < b``
    satisfies ``pair_constraint(unary(a), unary(b), diagram(a, b))`` are yielded.
    """
    if n > cap:
        raise CapExceeded(f"enumeration of size {n} exceeds cap {cap}")
    nunary = len(vocab.unary_atoms)
    unary_choices = range(1 << nunary)
    pairs = list(itertools.combinations(range(n), 2))
    option_cache: dict[tuple[int, int], list[int]] = {}

    def options(ux, uy):
        key = (ux, uy)
        if key not in option_cache:
            opts = _pair_options(vocab, ux, uy)
            if pair_constraint is not None:
                dx, dy = UnaryDiagram(vocab, ux), UnaryDiagram(vocab, uy)
                opts = [c for c in opts if pair_constraint(dx, dy, PairDiagram(vocab, c))]
            option_cache[key] = opts
        return option_cache[key]

    for ucodes in itertools.product(unary_choices, repeat=n):
        per_pair = [options(ucodes[a], ucodes[b]) for a, b in pairs]
        if any(not opts for opts in per_pair):
            continue
        for combo in itertools.product(*per_pair):
            yield _structure_from_codes(vocab, n, ucodes, dict(zip(pairs, combo)))


def structure_count_formula(vocab: Vocabulary, n: int) -> int:
    """Number of labeled structures on ``n`` elements: ``2^(n*u + n^2*b)``."""
    return 2 ** (n * len(vocab.unary) + n * n * len(vocab.binary))


def isomorphic(A: FiniteStructure, B: FiniteStructure) -> bool:
    """Brute-force isomorphism test by backtracking; intended for ``n <= 7``."""
    if A.vocab != B.vocab or A.size != B.size:
        return False
    n = A.size
    if sorted(A.unary_codes.tolist()) != sorted(B.unary_codes.tolist()):
        return False
    ca, cb = A.pair_codes, B.pair_codes
    ua, ub = A.unary_codes, B.unary_codes
    f = [-1] * n
    used = [False] * n

    def extend(a):
        if a == n:
            return True
        for b in range(n):
            if used[b] or ua[a] != ub[b]:
                continue
            if all(ca[p, a] == cb[f[p], b] for p in range(a)):
                f[a], used[b] = b, True
                if extend(a + 1):
                    return True
                used[b] = False
        return False

    return extend(0)
