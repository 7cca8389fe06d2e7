"""Divisibility consequences of definable equivalence relations and of linear closures."""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CapExceeded, DependentSample, NotEquivalenceOnTarget
from .logic import Formula, equivalence_blocks, evaluate, free_vars
from .structures import FiniteStructure

MAX_PARAMS = 3


@dataclass(frozen=True)
class DivisibilityEntry:
    params: tuple[int, ...]
    target_size: int
    class_sizes: tuple[int, ...]

    @property
    def gcd(self) -> int:
        return math.gcd(*self.class_sizes) if self.class_sizes else 0

    @property
    def divides(self) -> bool:
        g = self.gcd
        return self.target_size == 0 if g == 0 else self.target_size % g == 0

    @property
    def uncovered(self) -> int:
        return self.target_size - sum(self.class_sizes)

    def to_json(self) -> dict:
        return {
            "params": list(self.params),
            "target_size": self.target_size,
            "class_sizes": list(self.class_sizes),
            "uncovered": self.uncovered,
            "gcd": self.gcd,
            "divides": self.divides,
        }


@dataclass(frozen=True)
class DivisibilityReport:
    param_vars: tuple[str, ...]
    entries: tuple[DivisibilityEntry, ...]

    @property
    def holds(self) -> bool:
        return all(e.divides for e in self.entries)

    def __bool__(self):
        return self.holds

    def to_json(self) -> dict:
        return {"param_vars": list(self.param_vars), "holds": self.holds,
                "entries": [e.to_json() for e in self.entries]}

    def json_lines(self) -> str:
        return "".join(json.dumps(e.to_json()) + "\n" for e in self.entries)


def check_divisibility(S: FiniteStructure, phi: Formula, psi: Formula, xi: Formula | None = None,
                       x: str = "x", y: str = "y") -> DivisibilityReport:
    """Does the gcd of the ``psi``-class sizes divide the size of ``phi(S, b)``?

    Parameters are the free variables other than ``x`` and ``y``, in sorted
    order.  Every parameter tuple satisfying ``xi`` is checked (every tuple when
    ``xi`` is absent).  ``psi`` must be an equivalence relation on each target
    set in the partial sense: symmetric and transitive there.  Elements with
    ``psi(a, a)`` false belong to no class but still count towards the target
    size.  Otherwise :class:`NotEquivalenceOnTarget` is raised.
    """
    params = free_vars(phi) | free_vars(psi) | (free_vars(xi) if xi is not None else frozenset())
    params = tuple(sorted(params - {x, y}))
    if x in (free_vars(xi) if xi is not None else ()) or y in free_vars(phi):
        raise ValueError(f"phi may not mention {y}, xi may not mention {x} or {y}")
    if len(params) > MAX_PARAMS:
        raise CapExceeded(f"{len(params)} parameters exceed the cap of {MAX_PARAMS}")
    entries = []
    for b in itertools.product(range(S.size), repeat=len(params)):
        env = dict(zip(params, b))
        if xi is not None and not evaluate(S, xi, env):
            continue
        target = [a for a in range(S.size) if evaluate(S, phi, {**env, x: a})]
        rel = {a: {c: evaluate(S, psi, {**env, x: a, y: c}) for c in target} for a in target}
        covered = [a for a in target if rel[a][a]]
        stray = next(((a, c) for a in target for c in target if rel[a][c] and a not in covered), None)
        if stray:
            raise NotEquivalenceOnTarget(b, f"symmetry or transitivity fails at {stray}")
        part = equivalence_blocks(rel, covered)
        if not part:
            raise NotEquivalenceOnTarget(b, f"{part.property} fails at {part.witness}")
        entries.append(DivisibilityEntry(b, len(target), tuple(len(blk) for blk in part.blocks)))
    return DivisibilityReport(params, tuple(entries))


def _rank_basis(vectors: np.ndarray, p: int) -> np.ndarray:
    """Row-reduced basis (mod ``p``) of the span of ``vectors``."""
    M = np.array(vectors, dtype=np.int64).reshape(-1, vectors.shape[-1] if len(vectors) else 0) % p
    rows, cols = M.shape if M.size else (0, 0)
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if M[i, c]), None)
        if pivot is None:
            continue
        M[[r, pivot]] = M[[pivot, r]]
        M[r] = (M[r] * pow(int(M[r, c]), -1, p)) % p
        for i in range(rows):
            if i != r and M[i, c]:
                M[i] = (M[i] - M[i, c] * M[r]) % p
        r += 1
        if r == rows:
            break
    return M[:r]


class VectorGeometry:
    """Linear span closure on the ``d``-dimensional space over the prime field ``GF(p)``."""

    def __init__(self, p: int, d: int, m: int = 1):
        if m != 1:
            raise NotImplementedError("only prime fields (m = 1) are supported")
        if p < 2 or any(p % q == 0 for q in range(2, int(p**0.5) + 1)):
            raise ValueError(f"{p} is not prime")
        if d < 0:
            raise ValueError("dimension must be non-negative")
        self.p, self.d, self.m = p, d, m

    @property
    def size(self) -> int:
        return self.p ** (self.m * self.d)

    def points(self) -> Iterable[tuple[int, ...]]:
        return itertools.product(range(self.p), repeat=self.d)

    def random_point(self, rng: random.Random) -> tuple[int, ...]:
        return tuple(rng.randrange(self.p) for _ in range(self.d))

    def rank(self, X: Iterable[Sequence[int]]) -> int:
        X = list(X)
        return len(_rank_basis(np.asarray(X, dtype=np.int64).reshape(len(X), self.d), self.p)) if X else 0

    def closure(self, X: Iterable[Sequence[int]]) -> frozenset:
        X = list(X)
        if not X:
            return frozenset({(0,) * self.d})
        B = _rank_basis(np.asarray(X, dtype=np.int64).reshape(len(X), self.d), self.p)
        coeffs = np.array(list(itertools.product(range(self.p), repeat=len(B))), dtype=np.int64)
        span = (coeffs @ B) % self.p if len(B) else np.zeros((1, self.d), dtype=np.int64)
        return frozenset(tuple(int(v) for v in row) for row in span)

    def independent(self, X: Sequence[Sequence[int]]) -> bool:
        return self.rank(X) == len(X)


class TrivialGeometry:
    """``cl(X) = X`` together with a fixed closed set ``base``."""

    def __init__(self, points: Iterable, base: Iterable = ()):
        self._points = tuple(points)
        self.base = frozenset(base)

    @property
    def size(self) -> int:
        return len(self._points)

    def points(self):
        return iter(self._points)

    def random_point(self, rng: random.Random):
        return rng.choice(self._points)

    def closure(self, X) -> frozenset:
        return frozenset(X) | self.base


@dataclass(frozen=True)
class AuditRow:
    n: int
    step: int  # |cl(a_1..a_n)| - |cl(a_1..a_{n-1})|
    remaining: int  # |A| - |cl(a_1..a_{n-1})|
    expected_step: int
    base_divides: bool  # |cl(a_1..a_{n-1})| divides |A|

    @property
    def divides(self) -> bool:
        return self.remaining % self.step == 0

    @property
    def exact(self) -> bool:
        return self.step == self.expected_step and self.divides and self.base_divides

    def to_json(self) -> dict:
        return {"n": self.n, "step": self.step, "remaining": self.remaining, "expected_step": self.expected_step,
                "divides": self.divides, "base_divides": self.base_divides}


def _independent_sample(g: VectorGeometry, n: int, rng: random.Random, tries: int = 1000):
    for _ in range(tries):
        pts = [g.random_point(rng) for _ in range(n)]
        if g.independent(pts):
            return pts
    raise DependentSample(f"no independent {n}-point sample found in {tries} tries")


def closure_audit(g: VectorGeometry, samples: int = 5, seed: int = 0) -> list[AuditRow]:
    """Step sizes of the closure along random independent sequences, for every ``n <= d``."""
    rng = random.Random(seed)
    q = g.p**g.m
    rows = []
    for n in range(1, g.d + 1):
        for _ in range(samples):
            pts = _independent_sample(g, n, rng)
            small = len(g.closure(pts[:-1]))
            big = len(g.closure(pts))
            rows.append(AuditRow(n, big - small, g.size - small, q ** (n - 1) * (q - 1), g.size % small == 0))
    return rows


@dataclass(frozen=True)
class ExchangeResult:
    passed: bool
    axiom: str = ""
    counterexample: tuple = ()

    def __bool__(self):
        return self.passed


def exchange_check(g, trials: int = 200, seed: int = 0, max_set: int = 3) -> ExchangeResult:
    """Randomized check of reflexivity, monotonicity, finite character and exchange."""
    rng = random.Random(seed)
    for _ in range(trials):
        X = frozenset(g.random_point(rng) for _ in range(rng.randint(0, max_set)))
        a, b = g.random_point(rng), g.random_point(rng)
        clX = g.closure(X)
        if not X <= clX:
            return ExchangeResult(False, "reflexivity", (tuple(X),))
        if not clX <= g.closure(X | {a}):
            return ExchangeResult(False, "monotonicity", (tuple(X), a))
        # finite character: membership is witnessed by some subset of X
        for c in list(clX)[:8]:
            if not any(c in g.closure(sub) for r in range(len(X) + 1) for sub in itertools.combinations(X, r)):
                return ExchangeResult(False, "finite character", (tuple(X), c))
        gained = sorted(g.closure(X | {b}) - clX)
        if gained:
            a = rng.choice(gained)
            if b not in g.closure(X | {a}):
                return ExchangeResult(False, "exchange", (tuple(X), a, b))
    return ExchangeResult(True)


__all__ = [
    "AuditRow",
    "DivisibilityEntry",
    "DivisibilityReport",
    "ExchangeResult",
    "TrivialGeometry",
    "VectorGeometry",
    "check_divisibility",
    "closure_audit",
    "exchange_check",
]
