"""First-order formulas over a binary relational vocabulary.

Grammar (precedence from loosest to tightest: ``<->``, ``->``, ``|``, ``&``, ``~``)::

    formula := quant | bin
    quant   := ("forall" | "exists") VAR "." formula | "exists^=" INT VAR "." formula
    bin     := bin ("<->" | "->" | "|" | "&") bin | "~" bin | "(" formula ")" | atom
    atom    := NAME "(" VAR {"," VAR} ")" | VAR "=" VAR

``&``, ``|`` and ``<->`` associate to the left, ``->`` to the right.  A
quantifier body extends as far to the right as possible.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .errors import ArityMismatch, FormulaSyntaxError, UnboundVariable, UnknownSymbol
from .structures import FiniteStructure, Vocabulary


@dataclass(frozen=True)
class Atom:
    symbol: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Equals:
    left: str
    right: str


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class ExistsExactly:
    count: int
    var: str
    body: "Formula"


Formula = Union[Atom, Equals, Not, And, Or, Implies, Iff, Forall, Exists, ExistsExactly]

BINARY_OPS = {And: "&", Or: "|", Implies: "->", Iff: "<->"}
QUANTIFIERS = (Forall, Exists, ExistsExactly)


def conj(parts: Iterable[Formula]) -> Formula:
    """Left-nested conjunction of at least one part."""
    parts = list(parts)
    if not parts:
        raise ValueError("empty conjunction")
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        raise ValueError("empty disjunction")
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset(f.args)
    if isinstance(f, Equals):
        return frozenset((f.left, f.right))
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, QUANTIFIERS):
        return free_vars(f.body) - {f.var}
    return free_vars(f.left) | free_vars(f.right)


def is_sentence(f: Formula) -> bool:
    return not free_vars(f)


def quantifier_depth(f: Formula) -> int:
    if isinstance(f, (Atom, Equals)):
        return 0
    if isinstance(f, Not):
        return quantifier_depth(f.body)
    if isinstance(f, QUANTIFIERS):
        return 1 + quantifier_depth(f.body)
    return max(quantifier_depth(f.left), quantifier_depth(f.right))


def symbols(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset((f.symbol,))
    if isinstance(f, Equals):
        return frozenset()
    if isinstance(f, (Not,) + QUANTIFIERS):
        return symbols(f.body)
    return symbols(f.left) | symbols(f.right)


def check_vocabulary(f: Formula, vocab: Vocabulary) -> None:
    if isinstance(f, Atom):
        if f.symbol not in vocab:
            raise UnknownSymbol(f"unknown symbol {f.symbol!r}")
        if vocab.arity(f.symbol) != len(f.args):
            raise ArityMismatch(f"{f.symbol} has arity {vocab.arity(f.symbol)}, used with {len(f.args)} arguments")
    elif isinstance(f, Equals):
        return
    elif isinstance(f, (Not,) + QUANTIFIERS):
        check_vocabulary(f.body, vocab)
    else:
        check_vocabulary(f.left, vocab)
        check_vocabulary(f.right, vocab)


# -- printing ---------------------------------------------------------------

def to_text(f: Formula) -> str:
    if isinstance(f, Atom):
        return f"{f.symbol}({','.join(f.args)})"
    if isinstance(f, Equals):
        return f"{f.left}={f.right}"
    if isinstance(f, Not):
        return "~" + _operand(f.body)
    if isinstance(f, Forall):
        return f"forall {f.var}. {_body(f.body)}"
    if isinstance(f, Exists):
        return f"exists {f.var}. {_body(f.body)}"
    if isinstance(f, ExistsExactly):
        return f"exists^={f.count} {f.var}. {_body(f.body)}"
    right = f.right
    # a trailing quantifier needs no parentheses: its body extends to the right anyway
    rtext = _body(right) if isinstance(right, QUANTIFIERS) else _operand(right)
    return f"{_operand(f.left)} {BINARY_OPS[type(f)]} {rtext}"


def _body(f: Formula) -> str:
    return _operand(f) if isinstance(f, tuple(BINARY_OPS)) else to_text(f)


def _operand(f: Formula) -> str:
    if isinstance(f, (Atom, Equals, Not)):
        return to_text(f)
    return f"({to_text(f)})"


# -- parsing ----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<op><->|->|exists\^=|[()~&|.,=])
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)
_KEYWORDS = {"forall", "exists"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if kind == "name" and value in _KEYWORDS:
                kind = "op"
            tokens.append((kind, value, pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, vocab: Vocabulary | None):
        self.tokens = _tokenize(text)
        self.i = 0
        self.vocab = vocab

    def peek(self, offset=0):
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def take(self, value=None, kind=None):
        tok = self.peek()
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind) or tok[0] == "end":
            want = repr(value) if value is not None else kind
            got = repr(tok[1]) if tok[0] != "end" else "end of input"
            raise FormulaSyntaxError(f"expected {want}, found {got}", tok[2])
        self.i += 1
        return tok

    def at(self, value):
        return self.peek()[1] == value and self.peek()[0] == "op"

    def parse(self):
        f = self.formula()
        tok = self.peek()
        if tok[0] != "end":
            raise FormulaSyntaxError(f"unexpected {tok[1]!r}", tok[2])
        return f

    def formula(self):
        if self.at("forall") or self.at("exists") or self.at("exists^="):
            return self.quant()
        return self.iff()

    def quant(self):
        tok = self.take()
        if tok[1] == "exists^=":
            count = int(self.take(kind="int")[1])
            var = self.take(kind="name")[1]
            self.take(".")
            return ExistsExactly(count, var, self.formula())
        var = self.take(kind="name")[1]
        self.take(".")
        body = self.formula()
        return Forall(var, body) if tok[1] == "forall" else Exists(var, body)

    def iff(self):
        left = self.implies()
        while self.at("<->"):
            self.take()
            left = Iff(left, self.implies())
        return left

    def implies(self):
        left = self.disjunction()
        if self.at("->"):
            self.take()
            return Implies(left, self._rhs(self.implies))
        return left

    def _rhs(self, rule):
        if self.at("forall") or self.at("exists") or self.at("exists^="):
            return self.quant()
        return rule()

    def disjunction(self):
        left = self.conjunction()
        while self.at("|"):
            self.take()
            left = Or(left, self._rhs(self.conjunction))
        return left

    def conjunction(self):
        left = self.unary()
        while self.at("&"):
            self.take()
            left = And(left, self._rhs(self.unary))
        return left

    def unary(self):
        if self.at("~"):
            self.take()
            return Not(self._rhs(self.unary))
        if self.at("("):
            self.take()
            f = self.formula()
            self.take(")")
            return f
        if self.at("forall") or self.at("exists") or self.at("exists^="):
            return self.quant()
        return self.atom()

    def atom(self):
        tok = self.peek()
        if tok[0] != "name":
            got = repr(tok[1]) if tok[0] != "end" else "end of input"
            raise FormulaSyntaxError(f"expected an atom, found {got}", tok[2])
        nxt = self.peek(1)
        if nxt[1] == "(":
            name = self.take()[1]
            self.take("(")
            args = [self.take(kind="name")[1]]
            while self.at(","):
                self.take()
                args.append(self.take(kind="name")[1])
            self.take(")")
            if self.vocab is not None:
                if name not in self.vocab:
                    raise UnknownSymbol(f"unknown symbol {name!r} at position {tok[2]}")
                if self.vocab.arity(name) != len(args):
                    raise ArityMismatch(
                        f"{name} has arity {self.vocab.arity(name)}, used with {len(args)} arguments at position {tok[2]}"
                    )
            return Atom(name, tuple(args))
        if nxt[1] == "=":
            left = self.take()[1]
            self.take("=")
            return Equals(left, self.take(kind="name")[1])
        raise FormulaSyntaxError(f"expected '(' or '=' after {tok[1]!r}", nxt[2])


def parse(text: str, vocab: Vocabulary | None) -> Formula:
    """Parse ``text``; symbols and arities are checked against ``vocab`` when given."""
    return _Parser(text, vocab).parse()


# -- semantics --------------------------------------------------------------

def evaluate(S: FiniteStructure, f: Formula, env: Mapping[str, int] | None = None) -> bool:
    """Tarskian truth of ``f`` in ``S`` under ``env``; quantifiers range over the universe."""
    return _eval(S, f, dict(env or {}))


def _lookup(env, var):
    try:
        return env[var]
    except KeyError:
        raise UnboundVariable(var) from None


def _eval(S, f, env):
    if isinstance(f, Atom):
        args = tuple(_lookup(env, v) for v in f.args)
        arr = S.rel(f.symbol)
        if arr.ndim != len(args):
            raise ArityMismatch(f"{f.symbol} has arity {arr.ndim}, used with {len(args)} arguments")
        return bool(arr[args])
    if isinstance(f, Equals):
        return _lookup(env, f.left) == _lookup(env, f.right)
    if isinstance(f, Not):
        return not _eval(S, f.body, env)
    if isinstance(f, And):
        return _eval(S, f.left, env) and _eval(S, f.right, env)
    if isinstance(f, Or):
        return _eval(S, f.left, env) or _eval(S, f.right, env)
    if isinstance(f, Implies):
        return (not _eval(S, f.left, env)) or _eval(S, f.right, env)
    if isinstance(f, Iff):
        return _eval(S, f.left, env) == _eval(S, f.right, env)
    if isinstance(f, (Forall, Exists, ExistsExactly)):
        saved = env.get(f.var, _MISSING)
        try:
            if isinstance(f, Forall):
                result = True
                for a in range(S.size):
                    env[f.var] = a
                    if not _eval(S, f.body, env):
                        result = False
                        break
            elif isinstance(f, Exists):
                result = False
                for a in range(S.size):
                    env[f.var] = a
                    if _eval(S, f.body, env):
                        result = True
                        break
            else:
                hits = 0
                for a in range(S.size):
                    env[f.var] = a
                    if _eval(S, f.body, env):
                        hits += 1
                        if hits > f.count:
                            break
                result = hits == f.count
        finally:
            if saved is _MISSING:
                env.pop(f.var, None)
            else:
                env[f.var] = saved
        return result
    raise TypeError(f"not a formula: {f!r}")


_MISSING = object()


@dataclass(frozen=True)
class Partition:
    blocks: tuple[tuple[int, ...], ...]

    def census(self) -> dict[int, int]:
        """Map block size -> number of blocks of that size."""
        out: dict[int, int] = {}
        for b in self.blocks:
            out[len(b)] = out.get(len(b), 0) + 1
        return dict(sorted(out.items()))

    def block_of(self, a: int) -> int:
        for k, b in enumerate(self.blocks):
            if a in b:
                return k
        raise KeyError(a)


@dataclass(frozen=True)
class NotEquivalence:
    """Why a binary definable relation fails to be an equivalence relation."""

    property: str  # "reflexivity" | "symmetry" | "transitivity"
    witness: tuple[int, ...]

    def __bool__(self):
        return False


def relation_matrix(S: FiniteStructure, f: Formula, x: str = "x", y: str = "y"):
    extra = free_vars(f) - {x, y}
    if extra:
        raise ValueError(f"formula has free variables {sorted(extra)} besides {x}, {y}")
    return [[_eval(S, f, {x: a, y: b}) for b in range(S.size)] for a in range(S.size)]


def equivalence_blocks(rel, elements: Iterable[int]) -> Partition | NotEquivalence:
    """Blocks of ``rel`` restricted to ``elements`` or the first violated property."""
    elems = sorted(elements)
    for a in elems:
        if not rel[a][a]:
            return NotEquivalence("reflexivity", (a,))
    for a in elems:
        for b in elems:
            if rel[a][b] and not rel[b][a]:
                return NotEquivalence("symmetry", (a, b))
    for a in elems:
        for b in elems:
            if not rel[a][b]:
                continue
            for c in elems:
                if rel[b][c] and not rel[a][c]:
                    return NotEquivalence("transitivity", (a, b, c))
    blocks = []
    seen = set()
    for a in elems:
        if a in seen:
            continue
        block = tuple(b for b in elems if rel[a][b])
        seen.update(block)
        blocks.append(block)
    return Partition(tuple(blocks))


def definable_partition(S: FiniteStructure, f: Formula) -> Partition | NotEquivalence:
    """The partition of the universe defined by ``f(x, y)``, if it is an equivalence."""
    return equivalence_blocks(relation_matrix(S, f), range(S.size))


# -- random formulas --------------------------------------------------------

def random_formula(
    vocab: Vocabulary,
    depth: int,
    rng: random.Random,
    free: Iterable[str] = (),
    size: int = 3,
    variables: tuple[str, ...] = ("x", "y", "z", "w"),
    counting: bool = True,
) -> Formula:
    """A random formula of quantifier depth at most ``depth``.

    Its free variables are a subset of ``free``.  ``size`` bounds the number of
    connective levels between quantifiers.
    """
    return _random(vocab, depth, rng, tuple(free), size, variables, counting)


def _random_atom(vocab, rng, scope):
    choices = [("eq", None)] + [("sym", s) for s in vocab.symbols]
    kind, sym = rng.choice(choices)
    if kind == "eq":
        return Equals(rng.choice(scope), rng.choice(scope))
    name, arity = sym
    return Atom(name, tuple(rng.choice(scope) for _ in range(arity)))


def _random(vocab, depth, rng, scope, size, variables, counting):
    can_quantify = depth > 0
    if not scope:
        if not can_quantify:
            raise ValueError("cannot build a closed formula of depth 0")
        return _quantify(vocab, depth, rng, scope, size, variables, counting)
    r = rng.random()
    if size <= 0 or r < 0.25:
        if can_quantify and rng.random() < 0.5:
            return _quantify(vocab, depth, rng, scope, size, variables, counting)
        return _random_atom(vocab, rng, scope)
    if r < 0.4:
        return Not(_random(vocab, depth, rng, scope, size - 1, variables, counting))
    if can_quantify and r < 0.65:
        return _quantify(vocab, depth, rng, scope, size, variables, counting)
    op = rng.choice((And, Or, Implies, Iff))
    return op(
        _random(vocab, depth, rng, scope, size - 1, variables, counting),
        _random(vocab, depth, rng, scope, size - 1, variables, counting),
    )


def _quantify(vocab, depth, rng, scope, size, variables, counting):
    var = rng.choice(variables)
    inner = scope if var in scope else scope + (var,)
    body = _random(vocab, depth - 1, rng, inner, max(size, 1), variables, counting)
    q = rng.random()
    if counting and q < 0.15:
        return ExistsExactly(rng.randint(0, 2), var, body)
    return Forall(var, body) if q < 0.575 else Exists(var, body)
