"""Command-line interface: ``asym <command> ...``.

Exit status is 0 on success, 1 when a check fails or an input cannot be
read, and 2 on usage errors.  Every output embeds the run configuration.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import contextmanager

from . import __version__
from .arithmetic import check_divisibility
from .classify import classify_theory
from .compat import ClassAssignment, DeltaSystem, classes_by_unary, validate
from .errors import AsymError, FormulaSyntaxError, InvalidSystem
from .extension import back_and_forth, check_all_tau, check_sigma_xi, default_jobs, estimate_almost_sure
from .generators import count_age, derive_seed, sample_kn
from .logic import parse
from .meq import expand
from .structures import FiniteStructure


class DataError(Exception):
    """An input file or argument value that could not be used."""


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _load(path: str, loader):
    data = _read_json(path)
    try:
        return loader(data), data
    except InvalidSystem:
        raise
    except (AsymError, KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: {type(exc).__name__}: {exc}") from None


def _system(path: str) -> DeltaSystem:
    return _load(path, DeltaSystem.from_json)[0]


def _structure(path: str):
    return _load(path, FiniteStructure.from_json)


def _formula(text: str, vocab, what: str):
    if os.path.isfile(text):
        with open(text, encoding="utf-8") as fh:
            text = fh.read().strip()
    try:
        return parse(text, vocab)
    except FormulaSyntaxError as exc:
        raise DataError(f"{what}: {exc}\n  {text}\n  {' ' * exc.position}^") from None
    except AsymError as exc:
        raise DataError(f"{what}: {exc}") from None


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2**64)")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _config(args) -> dict:
    skip = {"func", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=False)


# -- commands ---------------------------------------------------------------

def cmd_validate(args, out) -> int:
    ds_data = _read_json(args.system)
    try:
        ds = DeltaSystem.from_json(ds_data)
    except (AsymError, KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{args.system}: {type(exc).__name__}: {exc}") from None
    violations = validate(ds)
    out.write(_dump({"valid": not violations, "violations": [v.to_json() for v in violations],
                     "config": _config(args)}) + "\n")
    return 1 if violations else 0


def _classes(ca: ClassAssignment) -> list[int]:
    return [c + 1 for c in ca.cls]


def cmd_sample(args, out) -> int:
    ds = _system(args.system)
    for i in range(args.count):
        seed = derive_seed(args.seed, i) if args.count > 1 else args.seed
        S, ca = sample_kn(ds, args.n, seed)
        rec = S.to_json()
        rec["classes"] = _classes(ca)
        rec["config"] = {**_config(args), "index": i, "draw_seed": seed}
        out.write(_dump(rec) + "\n")
    return 0


def cmd_axioms(args, out) -> int:
    ds = _system(args.system)
    failed = False
    totals = {"holds": 0, "fails": 0, "vacuous": 0}
    for trial in range(args.trials):
        seed = derive_seed(args.seed, args.n, trial)
        S, ca = sample_kn(ds, args.n, seed)
        sigma, xi = check_sigma_xi(S, ca, ds, args.k)
        taus = check_all_tau(S, ca, ds, args.k) if args.k < 4 else []
        counts = {"holds": 0, "fails": 0, "vacuous": 0}
        for r in taus:
            counts[r.verdict] += 1
        for key in totals:
            totals[key] += counts[key]
        first = next((r for r in (sigma, xi, *taus) if not r), None)
        failed |= first is not None
        out.write(_dump({"trial": trial, "draw_seed": seed, "sigma": sigma.to_json(), "xi": xi.to_json(),
                         "tau": counts, "first_failure": first.to_json() if first is not None else None}) + "\n")
    out.write(_dump({"summary": {"trials": args.trials, "all_hold": not failed, "tau": totals},
                     "config": _config(args)}) + "\n")
    return 1 if failed else 0


def cmd_estimate(args, out) -> int:
    ds = _system(args.system)
    prop = args.axiom if args.axiom else _formula(args.sentence, ds.vocab, "--sentence")
    jobs = args.jobs if args.jobs is not None else default_jobs()
    try:
        table = estimate_almost_sure(ds, prop, args.n_list, args.trials, args.seed, jobs=jobs)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    cfg = _config(args)
    cfg.pop("jobs", None)  # output does not depend on it
    out.write("# config: " + _dump(cfg) + "\n")
    out.write(table.to_csv())
    return 0


def _assignment(S: FiniteStructure, data: dict, ds: DeltaSystem, path: str) -> ClassAssignment:
    try:
        if "classes" in data:
            return ClassAssignment(S, tuple(int(c) - 1 for c in data["classes"]))
        return classes_by_unary(S, ds)
    except (AsymError, ValueError) as exc:
        raise DataError(f"{path}: cannot assign classes: {exc}") from None


def cmd_efgame(args, out) -> int:
    ds = _system(args.system)
    A, a_data = _structure(args.a)
    B, b_data = _structure(args.b)
    if A.vocab != ds.vocab or B.vocab != ds.vocab:
        raise DataError("structures and system must share one vocabulary")
    ca = _assignment(A, a_data, ds, args.a)
    cb = _assignment(B, b_data, ds, args.b)
    res = back_and_forth(A, ca, B, cb, ds, args.target, args.seed, witness=args.witness)
    out.write(_dump({**res.to_json(), "config": _config(args)}) + "\n")
    return 0 if res.success else 1


def cmd_meq(args, out) -> int:
    S, _ = _structure(args.structure)
    rels = []
    for spec in args.rel:
        name, sep, text = spec.partition("=")
        if not sep or not name.isidentifier():
            raise DataError(f"--rel expects name=formula, got {spec!r}")
        rels.append((name, _formula(text, S.vocab, f"--rel {name}")))
    try:
        E = expand(S, rels)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    rec = E.to_json()
    rec["fallback"] = E.is_fallback
    rec["config"] = _config(args)
    out.write(_dump(rec) + "\n")
    return 0


def cmd_divides(args, out) -> int:
    S, _ = _structure(args.structure)
    phi = _formula(args.phi, S.vocab, "--phi")
    psi = _formula(args.psi, S.vocab, "--psi")
    xi = _formula(args.xi, S.vocab, "--xi") if args.xi else None
    try:
        report = check_divisibility(S, phi, psi, xi)
    except AsymError as exc:
        out.write(_dump({"error": str(exc), "config": _config(args)}) + "\n")
        return 1
    if args.format == "json":
        out.write(_dump({**report.to_json(), "config": _config(args)}) + "\n")
    else:
        out.write(f"# config: {_dump(_config(args))}\n")
        head = ("params", "target", "class sizes", "gcd", "divides")
        rows = [(",".join(map(str, e.params)) or "-", str(e.target_size), ",".join(map(str, e.class_sizes)) or "-",
                 str(e.gcd), "yes" if e.divides else "no") for e in report.entries]
        widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(head)]
        out.write("  ".join(h.ljust(w) for h, w in zip(head, widths)).rstrip() + "\n")
        for r in rows:
            out.write("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() + "\n")
        out.write(f"verdict: {'holds' if report.holds else 'fails'}\n")
    return 0 if report.holds else 1


def cmd_count(args, out) -> int:
    ds = _system(args.system)
    for n in args.n_list:
        try:
            rec = count_age(ds, n).to_json()
        except AsymError as exc:
            raise DataError(f"{args.system}: {exc}") from None
        rec["config"] = _config(args)
        out.write(_dump(rec) + "\n")
    return 0


def cmd_classify(args, out) -> int:
    ds = _system(args.system)
    out.write(_dump({**classify_theory(ds).to_json(), "config": _config(args)}) + "\n")
    return 0


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asym", description="Finite experiments with class-structured 0-1 laws.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def command(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--out", help="output file (default: stdout)")
        p.set_defaults(func=func)
        return p

    p = command("validate", cmd_validate, "check a Delta-system for compatibility")
    p.add_argument("system")

    p = command("sample", cmd_sample, "draw structures from the K_n ensemble (NDJSON)")
    p.add_argument("system")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--count", type=_positive, default=1)

    p = command("axioms", cmd_axioms, "check sigma/xi/tau axioms on sampled structures")
    p.add_argument("system")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--k", type=_positive, default=2)
    p.add_argument("--trials", type=_positive, default=1)
    p.add_argument("--seed", type=_seed, required=True)

    p = command("estimate", cmd_estimate, "estimate the probability of a property per n (CSV)")
    p.add_argument("system")
    what = p.add_mutually_exclusive_group(required=True)
    what.add_argument("--sentence", help="sentence text or a file containing it")
    what.add_argument("--axiom", help="sigma:k, xi:k, tau:k, ext:k or spanning")
    p.add_argument("--n-list", type=_int_list, required=True)
    p.add_argument("--trials", type=_positive, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--jobs", type=_positive, help="worker processes (default: $ASYM_JOBS or 1)")

    p = command("efgame", cmd_efgame, "grow a partial isomorphism between two structures by back-and-forth")
    p.add_argument("a", metavar="A.json")
    p.add_argument("b", metavar="B.json")
    p.add_argument("system")
    p.add_argument("--target", type=_positive, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--witness", choices=("random", "first", "identity"), default="random")

    p = command("meq", cmd_meq, "expand a structure by imaginaries for definable equivalence relations")
    p.add_argument("structure")
    p.add_argument("--rel", action="append", required=True, metavar="NAME=FORMULA")

    p = command("divides", cmd_divides, "check that class sizes of a definable equivalence divide the target size")
    p.add_argument("structure")
    p.add_argument("--phi", required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--xi")
    p.add_argument("--format", choices=("table", "json"), default="table")

    p = command("count", cmd_count, "exact age counts (NDJSON, big integers as strings)")
    p.add_argument("system")
    p.add_argument("--n-list", type=_int_list, required=True)

    p = command("classify", cmd_classify, "classify the limit theory of a Delta-system")
    p.add_argument("system")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with _output(args.out) as out:
            return args.func(args, out)
    except DataError as exc:
        print(f"asym {args.command}: {exc}", file=sys.stderr)
        return 1
    except InvalidSystem as exc:
        print(f"asym {args.command}: invalid system: {exc}", file=sys.stderr)
        return 1
    except AsymError as exc:
        print(f"asym {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
