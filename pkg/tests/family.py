"""The compatibility fixture family: valid systems and single-condition violations."""

from __future__ import annotations

from asym.compat import DeltaSystem
from asym.fixtures import example66_system, rg_system, uniform_system


def _replace(ds, cells):
    delta = [list(row) for row in ds.delta]
    for (i, j), cell in cells.items():
        delta[i][j] = frozenset(cell)
    return DeltaSystem(ds.vocab, ds.q, ds.l, ds.t, tuple(tuple(r) for r in delta))


def _flip(d, changes):
    return d.with_values(changes)


def valid_family():
    return {
        "l1t0": uniform_system(1, 0, 2),
        "l2t0": uniform_system(2, 0, 2, separated=True),
        "l2t1": uniform_system(2, 1, 3),
        "l3t0": uniform_system(3, 0, 2),
        "l3t1": uniform_system(3, 1, 2, separated=True),
        "rg": rg_system(),
        "example66": example66_system(),
    }


def invalid_family():
    """name -> (system, the single violated condition)."""
    out = {}
    base = uniform_system(2, 0, 2, separated=True)
    # reversal: drop the mirror of one cross diagram
    d01 = sorted(base.delta[0][1])
    out["reversal"] = (_replace(base, {(1, 0): [d01[0].reverse()]}), "reversal")
    # unary: a cross diagram whose x carries the other class's marker
    bad = _flip(d01[1], {("P1", "x"): False, ("P2", "x"): True})
    out["unary"] = (_replace(base, {(0, 1): [d01[0], bad], (1, 0): [d01[0].reverse(), bad.reverse()]}), "unary")
    # base column with two diagrams
    b = uniform_system(2, 1, 2)
    two = sorted(uniform_system(2, 0, 2).delta[0][1])
    out["base"] = (_replace(b, {(0, 1): two, (1, 0): [d.reverse() for d in two]}), "base")
    # Q false inside a class
    rg = rg_system()
    d = sorted(rg.delta[0][0])[0]
    out["q_inside"] = (_replace(rg, {(0, 0): [d, _flip(d, {("Q", "xy"): False, ("Q", "yx"): False})]}), "q")
    # Q true between classes
    u = uniform_system(2, 0, 1)
    c = sorted(u.delta[0][1])[0]
    cq = _flip(c, {("Q", "xy"): True, ("Q", "yx"): True})
    out["q_between"] = (_replace(u, {(0, 1): [cq], (1, 0): [cq.reverse()]}), "q")
    return out
