"""Extension axioms as tuple profiles, finite checks of them, and back-and-forth.

A *profile* of arity ``k`` fixes a class for each of ``k`` distinct elements
and, for every ``r < s``, the pair diagram of the ``r``-th and ``s``-th
element.  A tuple realizes a profile when its classes (under a class
assignment), its unary diagrams and all its pair diagrams agree.  Because the
vocabulary is at most binary, two tuples realizing the same profile satisfy
the same quantifier-free formulas.

Axioms are checked directly on profiles:

* ``sigma:k``  every distinct ``k``-tuple realizes some profile;
* ``xi:k``     every one-element extension of a realizing ``k``-tuple realizes
  some ``(k+1)``-profile;
* ``tau``      every realization of ``p`` has a witness realizing the
  extension ``q``.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from .compat import ClassAssignment, DeltaSystem, in_alphabet, require_valid, spanning_witnesses
from .errors import CapExceeded
from .generators import derive_seed, sample_kn
from .logic import Formula, evaluate, to_text
from .structures import FiniteStructure, reverse_code

PROFILE_CAP = 4
_CHUNK = 1 << 22


def _pairs(k: int) -> list[tuple[int, int]]:
    return [(r, s) for s in range(k) for r in range(s)]


@dataclass(frozen=True)
class TupleProfile:
    """Classes ``c_1..c_k`` and a diagram code for every ``r < s``.

    ``diagrams`` is ordered like ``(0,1), (0,2), (1,2), (0,3), ...`` so that a
    profile's restriction to its first ``k - 1`` coordinates is a prefix.
    """

    ds: DeltaSystem = field(repr=False, compare=False)
    classes: tuple[int, ...]
    diagrams: tuple[int, ...]

    def __post_init__(self):
        k = len(self.classes)
        if k < 1:
            raise ValueError("profiles have positive arity")
        if len(self.diagrams) != k * (k - 1) // 2:
            raise ValueError("need one diagram per pair r < s")
        for c in self.classes:
            if not 0 <= c < self.ds.l:
                raise ValueError(f"class {c} out of range")
        used = [c for c in self.classes if self.ds.is_base(c)]
        if len(used) != len(set(used)):
            raise ValueError("a base class may appear at most once")
        for (r, s), code in zip(_pairs(k), self.diagrams):
            if code not in self.ds.codes(self.classes[r], self.classes[s]):
                raise ValueError(f"diagram for ({r}, {s}) is not allowed between its classes")

    @property
    def k(self) -> int:
        return len(self.classes)

    def diagram(self, r: int, s: int) -> int:
        """Code of the diagram of the ``r``-th and ``s``-th element (either order)."""
        if r == s:
            raise ValueError("r and s must differ")
        if r < s:
            return self.diagrams[s * (s - 1) // 2 + r]
        return reverse_code(self.ds.vocab, self.diagram(s, r))

    def restrict(self) -> "TupleProfile":
        """The profile of the first ``k - 1`` coordinates."""
        k = self.k - 1
        return TupleProfile(self.ds, self.classes[:k], self.diagrams[: k * (k - 1) // 2])

    @property
    def key(self) -> str:
        cls = ",".join(str(c + 1) for c in self.classes)
        return f"[{cls}|{','.join(str(d) for d in self.diagrams)}]"

    def __str__(self):
        return self.key


def _class_vectors(ds: DeltaSystem, k: int) -> Iterator[tuple[int, ...]]:
    for vec in itertools.product(range(ds.l), repeat=k):
        base = [c for c in vec if ds.is_base(c)]
        if len(base) == len(set(base)):
            yield vec


def profile_count(ds: DeltaSystem, k: int) -> int:
    """Number of ``k``-profiles, from the product formula."""
    sz = ds.sizes
    total = 0
    for vec in _class_vectors(ds, k):
        total += math.prod(int(sz[vec[r], vec[s]]) for r, s in _pairs(k))
    return total


def profiles(ds: DeltaSystem, k: int, cap: int = PROFILE_CAP) -> list[TupleProfile]:
    """All ``k``-profiles of ``ds``, class vectors in lexicographic order."""
    require_valid(ds)
    if k < 1:
        raise ValueError("k must be positive")
    if k > cap:
        raise CapExceeded(f"k={k} exceeds the profile cap {cap}")
    out = []
    for vec in _class_vectors(ds, k):
        options = [ds.codes(vec[r], vec[s]) for r, s in _pairs(k)]
        for choice in itertools.product(*options):
            out.append(TupleProfile(ds, vec, tuple(choice)))
    return out


def extensions(p: TupleProfile) -> list[TupleProfile]:
    """Every ``(k+1)``-profile whose restriction is ``p``."""
    ds = p.ds
    out = []
    for c in range(ds.l):
        if ds.is_base(c) and c in p.classes:
            continue
        options = [ds.codes(p.classes[r], c) for r in range(p.k)]
        for choice in itertools.product(*options):
            out.append(TupleProfile(ds, p.classes + (c,), p.diagrams + tuple(choice)))
    return out


class _Index:
    """Precomputed per-structure arrays used by the realization engine."""

    def __init__(self, S: FiniteStructure, ca: ClassAssignment, ds: DeltaSystem):
        self.S = S
        self.codes = S.pair_codes
        cls = ca.array
        want = np.array([-1 if c is None else c for c in ds.unary_codes], dtype=np.int64)
        ok = S.unary_codes == want[cls] if S.size else np.zeros(0, dtype=bool)
        self.eligible = [(cls == c) & ok for c in range(ds.l)]

    def candidates(self, T: np.ndarray, p: TupleProfile, s: int) -> np.ndarray:
        """Mask (rows of ``T`` x elements) of valid ``s``-th coordinates."""
        mask = np.broadcast_to(self.eligible[p.classes[s]], (len(T), self.S.size)).copy()
        for r in range(s):
            mask &= self.codes[T[:, r]] == p.diagram(r, s)
        return mask

    def realizations(self, p: TupleProfile) -> np.ndarray:
        """All tuples realizing ``p``, one per row, in lexicographic order."""
        T = np.flatnonzero(self.eligible[p.classes[0]]).reshape(-1, 1)
        for s in range(1, p.k):
            parts = []
            step = max(1, _CHUNK // max(1, self.S.size))
            for lo in range(0, len(T), step):
                block = T[lo : lo + step]
                rows, cols = np.nonzero(self.candidates(block, p, s))
                parts.append(np.column_stack([block[rows], cols]))
            T = np.concatenate(parts) if parts else np.zeros((0, s + 1), dtype=np.int64)
        return T.astype(np.int64)


@dataclass(frozen=True)
class AxiomReport:
    """Outcome of checking one axiom; ``witness`` is a counterexample when it fails."""

    axiom: str
    verdict: str  # "holds" | "fails" | "vacuous"
    witness: tuple[int, ...] = ()

    def __bool__(self):
        return self.verdict != "fails"

    def to_json(self) -> dict:
        return {"axiom": self.axiom, "verdict": self.verdict, "witness": list(self.witness)}


def _tau(index: _Index, p: TupleProfile, exts: Sequence[TupleProfile]) -> list[AxiomReport]:
    T = index.realizations(p)
    out = []
    for q in exts:
        name = f"tau:{p.key}->{q.key}"
        if len(T) == 0:
            out.append(AxiomReport(name, "vacuous"))
            continue
        stuck = None
        step = max(1, _CHUNK // max(1, index.S.size))
        for lo in range(0, len(T), step):
            block = T[lo : lo + step]
            found = index.candidates(block, q, p.k).any(axis=1)
            if not found.all():
                stuck = tuple(int(a) for a in block[int(np.argmin(found))])
                break
        out.append(AxiomReport(name, "holds") if stuck is None else AxiomReport(name, "fails", stuck))
    return out


def check_tau(S: FiniteStructure, ca: ClassAssignment, p: TupleProfile, q: TupleProfile) -> AxiomReport:
    """Does every realization of ``p`` extend to a realization of ``q``?"""
    if q.k != p.k + 1 or q.restrict() != p:
        raise ValueError("q must extend p by exactly one coordinate")
    return _tau(_Index(S, ca, p.ds), p, [q])[0]


def check_all_tau(S: FiniteStructure, ca: ClassAssignment, ds: DeltaSystem, k: int, cap: int = PROFILE_CAP,
                  stop_early: bool = False) -> list[AxiomReport]:
    """Every ``tau`` from ``k``-profiles to their extensions."""
    if k + 1 > cap:
        raise CapExceeded(f"k+1={k + 1} exceeds the profile cap {cap}")
    index = _Index(S, ca, ds)
    out = []
    for p in profiles(ds, k, cap):
        reports = _tau(index, p, extensions(p))
        out.extend(reports)
        if stop_early and not all(reports):
            break
    return out


def _good_tuple(ok: np.ndarray, good: np.ndarray, k: int, include: int, exclude: int) -> tuple[int, ...] | None:
    """A ``k``-set of good elements, pairwise ok, containing ``include`` and not ``exclude``."""
    if not good[include]:
        return None
    pool = [int(a) for a in np.flatnonzero(good & ok[include]) if a != include and a != exclude]

    def extend(chosen, start):
        if len(chosen) == k:
            return tuple(chosen)
        for idx in range(start, len(pool)):
            a = pool[idx]
            if all(ok[a, b] for b in chosen):
                found = extend(chosen + [a], idx + 1)
                if found:
                    return found
        return None

    return extend([include], 0)


def check_sigma_xi(S: FiniteStructure, ca: ClassAssignment, ds: DeltaSystem, k: int,
                   cap: int = PROFILE_CAP) -> tuple[AxiomReport, AxiomReport]:
    """``(sigma_k, xi_k)`` reports for ``S`` under ``ca``."""
    if k < 1 or k > cap:
        raise CapExceeded(f"k={k} outside 1..{cap}")
    n = S.size
    pair_ok, unary_ok = in_alphabet(S, ds, ca)
    cls = ca.array
    good = unary_ok & (cls >= 0) & (cls < ds.l)
    bad_pairs = np.argwhere(~pair_ok)
    bad_elems = np.flatnonzero(~good)

    def padded(core):
        rest = [a for a in range(n) if a not in core]
        return tuple(core) + tuple(rest[: k - len(core)])

    if n < k:
        sigma = AxiomReport(f"sigma:{k}", "vacuous")
    elif len(bad_elems):
        sigma = AxiomReport(f"sigma:{k}", "fails", padded([int(bad_elems[0])]))
    elif k >= 2 and len(bad_pairs):
        a, b = (int(v) for v in bad_pairs[0])
        sigma = AxiomReport(f"sigma:{k}", "fails", padded([a, b]))
    else:
        sigma = AxiomReport(f"sigma:{k}", "holds")

    # xi fails iff a good k-tuple has a one-point extension that breaks the alphabet
    realized = any(_good_tuple(pair_ok, good, k, a, -1) for a in range(n)) if n >= k else False
    xi = AxiomReport(f"xi:{k}", "holds" if realized else "vacuous")
    for y in bad_elems.tolist():
        for a in range(n):
            if a != y:
                t = _good_tuple(pair_ok, good, k, a, y)
                if t:
                    return sigma, AxiomReport(f"xi:{k}", "fails", t + (y,))
    for a, y in bad_pairs.tolist():
        t = _good_tuple(pair_ok, good, k, a, y)
        if t:
            return sigma, AxiomReport(f"xi:{k}", "fails", t + (y,))
    return sigma, xi


def extension_property(S: FiniteStructure, ca: ClassAssignment, ds: DeltaSystem, k: int) -> bool:
    """``sigma_k`` together with every ``tau`` from ``k``-profiles."""
    sigma, _ = check_sigma_xi(S, ca, ds, k)
    if not sigma:
        return False
    return all(check_all_tau(S, ca, ds, k, stop_early=True))


def property_id(prop) -> str:
    return to_text(prop) if not isinstance(prop, str) else prop


def _holds(prop, ds: DeltaSystem, S: FiniteStructure, ca: ClassAssignment) -> bool:
    if not isinstance(prop, str):
        return evaluate(S, prop)
    if prop == "spanning":
        return bool(spanning_witnesses(S, ds, ca))
    kind, _, arg = prop.partition(":")
    k = int(arg)
    if kind == "sigma":
        return bool(check_sigma_xi(S, ca, ds, k)[0])
    if kind == "xi":
        return bool(check_sigma_xi(S, ca, ds, k)[1])
    if kind == "tau":
        return all(check_all_tau(S, ca, ds, k, stop_early=True))
    if kind == "ext":
        return extension_property(S, ca, ds, k)
    raise ValueError(f"unknown property id {prop!r}")


def _validate_prop(prop):
    if isinstance(prop, str):
        if prop == "spanning":
            return
        kind, sep, arg = prop.partition(":")
        if kind not in ("sigma", "xi", "tau", "ext") or not sep or not arg.isdigit():
            raise ValueError(f"unknown property id {prop!r}; use sigma:k, xi:k, tau:k, ext:k or spanning")


def _trial(args) -> bool:
    ds, prop, n, seed = args
    S, ca = sample_kn(ds, n, seed)
    return _holds(prop, ds, S, ca)


@dataclass(frozen=True)
class EstimateRow:
    n: int
    trials: int
    successes: int
    estimate: float
    lo: float
    hi: float
    property_id: str
    seed: int


COLUMNS = ("n", "trials", "successes", "estimate", "lo", "hi", "property_id", "seed")


@dataclass(frozen=True)
class EstimateTable:
    rows: tuple[EstimateRow, ...]

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow([r.n, r.trials, r.successes, f"{r.estimate:.6f}", f"{r.lo:.6f}", f"{r.hi:.6f}",
                        r.property_id, r.seed])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "EstimateTable":
        lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
        rows = []
        for rec in csv.DictReader(lines):
            rows.append(EstimateRow(int(rec["n"]), int(rec["trials"]), int(rec["successes"]), float(rec["estimate"]),
                                    float(rec["lo"]), float(rec["hi"]), rec["property_id"], int(rec["seed"])))
        return cls(tuple(rows))

    def nondecreasing_up_to_overlap(self) -> bool:
        """Each estimate is at least the previous one, or their intervals overlap."""
        return all(b.estimate >= a.estimate or b.hi >= a.lo for a, b in zip(self.rows, self.rows[1:]))


def wilson(successes: int, trials: int, alpha: float = 0.05) -> tuple[float, float]:
    lo, hi = proportion_confint(successes, trials, alpha=alpha, method="wilson")
    return float(lo), float(hi)


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("ASYM_JOBS", "1")))
    except ValueError:
        return 1


def estimate_almost_sure(ds: DeltaSystem, prop, n_list: Sequence[int], trials: int, seed: int,
                         jobs: int | None = None) -> EstimateTable:
    """Fraction of ``sample_kn`` draws satisfying ``prop``, per ``n``, with 95% Wilson intervals.

    ``prop`` is a sentence or one of ``sigma:k``, ``xi:k``, ``tau:k``, ``ext:k``
    (``sigma_k`` and every ``tau`` from ``k``-profiles) and ``spanning``.
    Trial ``i`` at size ``n`` uses seed ``derive_seed(seed, n, i)``, so results do
    not depend on ``jobs``.
    """
    require_valid(ds)
    _validate_prop(prop)
    if trials < 1:
        raise ValueError("trials must be positive")
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    pid = property_id(prop)
    rows = []
    pool = ProcessPoolExecutor(jobs) if jobs > 1 else None
    try:
        for n in n_list:
            tasks = [(ds, prop, int(n), derive_seed(seed, n, i)) for i in range(trials)]
            results = list(pool.map(_trial, tasks, chunksize=max(1, trials // (4 * jobs)))) if pool else [
                _trial(t) for t in tasks
            ]
            s = sum(results)
            lo, hi = wilson(s, trials)
            rows.append(EstimateRow(int(n), trials, s, s / trials, lo, hi, pid, int(seed)))
    finally:
        if pool:
            pool.shutdown()
    return EstimateTable(tuple(rows))


@dataclass(frozen=True)
class Stuck:
    """Where a back-and-forth run could not continue."""

    side: str  # side of the element that found no partner: "A" or "B"
    element: int
    pairs: tuple[tuple[int, int], ...]

    def to_json(self) -> dict:
        return {"side": self.side, "element": self.element, "pairs": [list(p) for p in self.pairs]}


@dataclass(frozen=True)
class BackForthResult:
    """On failure ``pairs`` is the largest partial map reached and ``stuck`` says where it stopped."""

    pairs: tuple[tuple[int, int], ...]
    target: int
    stuck: Stuck | None = None
    nodes: int = 0

    @property
    def success(self) -> bool:
        return len(self.pairs) >= self.target

    def __bool__(self):
        return self.success

    def as_map(self) -> dict[int, int]:
        return dict(self.pairs)

    def to_json(self) -> dict:
        return {
            "success": self.success,
            "target": self.target,
            "pairs": [list(p) for p in self.pairs],
            "stuck": self.stuck.to_json() if self.stuck else None,
            "nodes": self.nodes,
        }


class _Side:
    def __init__(self, S: FiniteStructure, ca: ClassAssignment):
        self.S = S
        self.cls = ca.array
        self.codes = S.pair_codes
        self.unary = S.unary_codes


def _partners(src: _Side, dst: _Side, e: int, chosen_src: list[int], chosen_dst: list[int]) -> np.ndarray:
    mask = (dst.cls == src.cls[e]) & (dst.unary == src.unary[e])
    for a, b in zip(chosen_src, chosen_dst):
        mask &= dst.codes[b] == src.codes[a, e]
    if chosen_dst:
        mask[chosen_dst] = False
    return np.flatnonzero(mask)


def back_and_forth(A: FiniteStructure, ca_A: ClassAssignment, B: FiniteStructure, ca_B: ClassAssignment,
                   ds: DeltaSystem, target_size: int, seed: int, witness: str = "random",
                   backtrack: bool = True, max_nodes: int = 100_000) -> BackForthResult:
    """Grow a class- and diagram-preserving partial map, alternating between sides.

    Step ``s`` picks a fresh element uniformly at random on side A (even ``s``)
    or B (odd ``s``) and matches it with a partner on the other side.  Partners
    are chosen uniformly among the valid ones (``witness="random"``), the least
    one (``"first"``) or the element with the same label when that is valid
    (``"identity"``).  With ``backtrack`` the other partners are tried in turn
    before giving up, up to ``max_nodes`` partner attempts; the picked elements
    never change.  The map preserves classes and every pair diagram, hence is a
    partial isomorphism.
    """
    if A.vocab != B.vocab or A.vocab != ds.vocab:
        raise ValueError("structures and system must share a vocabulary")
    if witness not in ("random", "first", "identity"):
        raise ValueError("witness must be 'random', 'first' or 'identity'")
    rng = random.Random(derive_seed(seed, 0))
    sides = {"A": _Side(A, ca_A), "B": _Side(B, ca_B)}
    target = min(int(target_size), A.size, B.size)
    picks: list[tuple[str, int]] = []
    used = {"A": set(), "B": set()}
    chosen = {"A": [], "B": []}
    nodes = 0
    deepest: Stuck | None = None

    def pick(step):
        side = "A" if step % 2 == 0 else "B"
        if len(picks) > step and picks[step][1] not in used[side]:
            return picks[step]
        # first visit, or backtracking made the earlier pick a partner
        free = [e for e in range(sides[side].S.size) if e not in used[side]]
        del picks[step:]
        picks.append((side, rng.choice(free)))
        return picks[step]

    def order(options, e):
        opts = options.tolist()
        if witness == "first":
            return opts
        rng.shuffle(opts)
        if witness == "identity" and e in opts:
            opts.remove(e)
            opts.insert(0, e)
        return opts

    def search(step):
        nonlocal nodes, deepest
        if step == target:
            return True
        side, e = pick(step)
        other = "B" if side == "A" else "A"
        options = order(_partners(sides[side], sides[other], e, chosen[side], chosen[other]), e)
        if not options:
            if deepest is None or step >= len(deepest.pairs):
                deepest = Stuck(side, e, tuple(zip(chosen["A"], chosen["B"])))
            return False
        for b in options:
            nodes += 1
            chosen[side].append(e)
            chosen[other].append(b)
            used[side].add(e)
            used[other].add(b)
            if search(step + 1):
                return True
            chosen[side].pop()
            chosen[other].pop()
            used[side].discard(e)
            used[other].discard(b)
            if not backtrack or nodes >= max_nodes:
                return False
        return False

    if search(0):
        return BackForthResult(tuple(zip(chosen["A"], chosen["B"])), target, None, nodes)
    return BackForthResult(deepest.pairs if deepest else (), target, deepest, nodes)


__all__ = [
    "AxiomReport",
    "BackForthResult",
    "EstimateRow",
    "EstimateTable",
    "Stuck",
    "TupleProfile",
    "back_and_forth",
    "check_all_tau",
    "check_sigma_xi",
    "check_tau",
    "estimate_almost_sure",
    "extension_property",
    "extensions",
    "profile_count",
    "profiles",
    "wilson",
]
