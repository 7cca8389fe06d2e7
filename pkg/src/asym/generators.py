"""Sampling the class-structured ensembles and exact counting of ages.

Pair draws use a counter-based generator (Philox) keyed by the seed: the
pair ``(a, b)`` with ``a < b`` at position ``p`` of the row-major upper
triangle always receives the ``p``-th output of the keyed stream, so draws do
not depend on evaluation order.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .compat import ClassAssignment, DeltaSystem, require_valid
from .errors import NotUnarySeparated
from .structures import FiniteStructure


def derive_seed(seed: int, *keys: int) -> int:
    """A 64-bit seed derived from ``seed`` and an integer key path."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0])


def _pair_stream(seed: int, count: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=int(seed) & ((1 << 64) - 1)))
    return gen.random(count)


def _build(ds: DeltaSystem, cls: np.ndarray, seed: int) -> FiniteStructure:
    """Structure on ``len(cls)`` elements with every pair diagram drawn uniformly."""
    n = len(cls)
    vocab = ds.vocab
    iu, ju = np.triu_indices(n, 1)
    u = _pair_stream(seed, len(iu))
    ci, cj = cls[iu], cls[ju]
    natoms = len(vocab.pair_atoms)
    chosen = np.zeros(len(iu), dtype=object if natoms > 62 else np.int64)
    for i in range(ds.l):
        for j in range(ds.l):
            mask = (ci == i) & (cj == j)
            if not mask.any():
                continue
            options = ds.codes(i, j)
            idx = np.minimum((u[mask] * len(options)).astype(np.int64), len(options) - 1)
            chosen[mask] = np.asarray(options, dtype=chosen.dtype)[idx]
    rels = {}
    bit = vocab._pair_bit
    unary = np.asarray([ds.unary_codes[c] for c in cls], dtype=np.int64) if n else np.zeros(0, dtype=np.int64)
    for k, (name, slot) in enumerate(vocab.unary_atoms):
        on = ((unary >> k) & 1).astype(bool)
        if slot == "x":
            rels[name] = on
        else:
            arr = np.zeros((n, n), dtype=bool)
            arr[np.arange(n), np.arange(n)] = on
            rels[name] = arr
    for name in vocab.binary:
        arr = rels[name]
        kxy, kyx = bit[(name, "xy")], bit[(name, "yx")]
        arr[iu, ju] = ((chosen >> kxy) & 1).astype(bool)
        arr[ju, iu] = ((chosen >> kyx) & 1).astype(bool)
    return FiniteStructure(vocab, n, rels)


def kn_classes(ds: DeltaSystem, n: int) -> np.ndarray:
    """Class of each element of the ``n``-th universe, infinite-intent classes first."""
    free = np.repeat(np.arange(ds.n_free), n)
    return np.concatenate([free, np.asarray(list(ds.base_classes), dtype=np.int64)]).astype(np.int64)


def sample_kn(ds: DeltaSystem, n: int, seed: int) -> tuple[FiniteStructure, ClassAssignment]:
    """Uniform sample from the ensemble with ``n`` elements per infinite-intent class.

    The universe has ``n * (l - t) + t`` elements: class ``i < l - t`` occupies
    labels ``i*n .. i*n + n - 1`` and the base classes follow, one element each.
    """
    require_valid(ds)
    if n < 1:
        raise ValueError("n must be positive")
    cls = kn_classes(ds, n)
    S = _build(ds, cls, seed)
    return S, ClassAssignment(S, tuple(int(c) for c in cls))


@dataclass(frozen=True)
class SampleSpec:
    ds: DeltaSystem
    n: int
    seed: int

    def __post_init__(self):
        require_valid(self.ds)
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def draw(self):
        return sample_kn(self.ds, self.n, self.seed)


@dataclass(frozen=True)
class AgeCount:
    n: int
    total: int
    by_class_sizes: dict

    def __post_init__(self):
        if self.total != sum(self.by_class_sizes.values()):
            raise ValueError("total must equal the sum over class-size vectors")

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "total": str(self.total),
            "by_class_sizes": [
                {"sizes": list(sizes), "count": str(count)} for sizes, count in sorted(self.by_class_sizes.items())
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data) -> "AgeCount":
        if isinstance(data, str):
            data = json.loads(data)
        by = {tuple(e["sizes"]): int(e["count"]) for e in data["by_class_sizes"]}
        return cls(int(data["n"]), int(data["total"]), by)


def _require_separated(ds: DeltaSystem):
    require_valid(ds)
    if not ds.is_unary_separated():
        raise NotUnarySeparated(
            "classes share a unary diagram outside the designated symbol; counting would need inclusion-exclusion"
        )


def class_size_vectors(ds: DeltaSystem, n: int) -> Iterable[tuple[int, ...]]:
    """All ``(n_1..n_l)`` summing to ``n`` with base classes holding at most one element."""
    caps = [1 if ds.is_base(j) else n for j in range(ds.l)]

    def rec(j, left):
        if j == ds.l - 1:
            if left <= caps[j]:
                yield (left,)
            return
        for k in range(min(left, caps[j]) + 1):
            for rest in rec(j + 1, left - k):
                yield (k,) + rest

    yield from rec(0, n)


def count_for_sizes(ds: DeltaSystem, sizes: Sequence[int]) -> int:
    n = sum(sizes)
    count = math.factorial(n)
    for k in sizes:
        count //= math.factorial(k)
    sz = ds.sizes
    for i in range(ds.l):
        count *= int(sz[i, i]) ** math.comb(sizes[i], 2)
        for j in range(i + 1, ds.l):
            count *= int(sz[i, j]) ** (sizes[i] * sizes[j])
    return count


def count_age(ds: DeltaSystem, n: int) -> AgeCount:
    """Exact number of labeled structures on ``{0..n-1}`` embeddable in the limit.

    Only unary-separated systems are supported: there the class of every
    element of an age member is forced by its unary diagram.
    """
    _require_separated(ds)
    if n < 0:
        raise ValueError("n must be non-negative")
    by = {sizes: count_for_sizes(ds, sizes) for sizes in class_size_vectors(ds, n)}
    return AgeCount(n, sum(by.values()), by)


def ratio_table(ds: DeltaSystem, dominant_class: int, n_list: Iterable[int]) -> list[tuple[int, Fraction]]:
    """Exact share of age members lying entirely in ``dominant_class``."""
    out = []
    for n in n_list:
        counts = count_age(ds, n)
        key = tuple(n if j == dominant_class else 0 for j in range(ds.l))
        out.append((n, Fraction(counts.by_class_sizes.get(key, 0), counts.total)))
    return out


def sample_age_uniform(ds: DeltaSystem, n: int, seed: int) -> FiniteStructure:
    """Exactly uniform sample of the age members of size ``n``."""
    counts = count_age(ds, n)
    rng = random.Random(derive_seed(seed, 0))
    r = rng.randrange(counts.total)
    for sizes, count in sorted(counts.by_class_sizes.items()):
        if r < count:
            break
        r -= count
    labels = [j for j, k in enumerate(sizes) for _ in range(k)]
    rng.shuffle(labels)
    return _build(ds, np.asarray(labels, dtype=np.int64), derive_seed(seed, 1))


def class_size_profile(ds: DeltaSystem, S: FiniteStructure) -> tuple[int, ...]:
    """Number of elements of each class in a structure over a unary-separated system."""
    lookup = {ds.unary(i).code: i for i in range(ds.l)}
    out = [0] * ds.l
    for c in S.unary_codes.tolist():
        out[lookup[c]] += 1
    return tuple(out)


def all_classes_exceed(ds: DeltaSystem, S: FiniteStructure, threshold: float) -> bool:
    return all(k > threshold for k in class_size_profile(ds, S))


__all__ = [
    "AgeCount",
    "SampleSpec",
    "all_classes_exceed",
    "class_size_profile",
    "class_size_vectors",
    "count_age",
    "count_for_sizes",
    "derive_seed",
    "kn_classes",
    "ratio_table",
    "sample_age_uniform",
    "sample_kn",
]
