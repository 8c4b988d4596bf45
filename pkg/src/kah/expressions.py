"""Expressions with least fixpoints, substitution, fragments and concrete syntax."""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass

from .theory import ONE, PAR, SEQ, Signature, Term, TheoryConfig, TheoryError, app, var


class Expr:
    """Base class for expressions; ``+``, ``*`` and ``|`` build sums, products and parallel products."""

    __slots__ = ()

    def __add__(self, other: Expr) -> Expr:
        return Plus(self, other)

    def __mul__(self, other: Expr) -> Expr:
        return Sym(SEQ, (self, other))

    def __or__(self, other: Expr) -> Expr:
        return Sym(PAR, (self, other))

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class RecVar(Expr):
    name: str


@dataclass(frozen=True)
class Zero(Expr):
    pass


@dataclass(frozen=True)
class Plus(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sym(Expr):
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class Mu(Expr):
    var: str
    body: Expr


ZERO = Zero()
UNIT = Sym(ONE, ())

_fresh = itertools.count(1)


def fresh_name() -> str:
    return f"_r{next(_fresh)}"


def one() -> Expr:
    return UNIT


def seq(*parts: Expr) -> Expr:
    """Left-nested product; the empty product is 1."""
    if not parts:
        return UNIT
    out = parts[0]
    for p in parts[1:]:
        out = Sym(SEQ, (out, p))
    return out


def par(*parts: Expr) -> Expr:
    if not parts:
        return UNIT
    out = parts[0]
    for p in parts[1:]:
        out = Sym(PAR, (out, p))
    return out


def plus(*parts: Expr) -> Expr:
    """Left-nested sum; the empty sum is 0."""
    if not parts:
        return ZERO
    out = parts[0]
    for p in parts[1:]:
        out = Plus(out, p)
    return out


def _require(symbol: str, theory: TheoryConfig | None) -> None:
    if theory is not None and symbol not in theory.signature:
        raise TheoryError(f"theory {theory.kind!r} has no symbol {symbol!r}")


def star(e: Expr, theory: TheoryConfig | None = None) -> Mu:
    """``e*`` as ``mu x. 1 + e.x`` with a fresh ``x``."""
    _require(SEQ, theory)
    x = fresh_name()
    return Mu(x, Plus(UNIT, Sym(SEQ, (e, RecVar(x)))))


def parstar(e: Expr, theory: TheoryConfig | None = None) -> Mu:
    """``e^||`` as ``mu x. 1 + e||x`` with a fresh ``x``."""
    _require(PAR, theory)
    x = fresh_name()
    return Mu(x, Plus(UNIT, Sym(PAR, (e, RecVar(x)))))


def star_body(e: Expr, op: str = SEQ) -> Expr | None:
    """If ``e`` is ``mu x. 1 + f op x`` with ``x`` not free in ``f``, return ``f``."""
    if not isinstance(e, Mu):
        return None
    b = e.body
    if isinstance(b, Plus) and b.left == UNIT and isinstance(b.right, Sym) and b.right.name == op:
        f, r = b.right.args
        if r == RecVar(e.var) and e.var not in free_recvars(f):
            return f
    return None


# --- structural helpers -------------------------------------------------------

def children(e: Expr) -> tuple:
    if isinstance(e, Plus):
        return (e.left, e.right)
    if isinstance(e, Sym):
        return e.args
    if isinstance(e, Mu):
        return (e.body,)
    return ()


def subexpressions(e: Expr):
    yield e
    for c in children(e):
        yield from subexpressions(c)


def free_recvars(e: Expr) -> frozenset:
    if isinstance(e, RecVar):
        return frozenset([e.name])
    if isinstance(e, Mu):
        return free_recvars(e.body) - {e.var}
    out = frozenset()
    for c in children(e):
        out |= free_recvars(c)
    return out


def variables(e: Expr) -> frozenset:
    """The X-variables occurring in ``e``."""
    return frozenset(s.name for s in subexpressions(e) if isinstance(s, Var))


def is_closed(e: Expr) -> bool:
    return not free_recvars(e)


def expr_size(e: Expr) -> int:
    return 1 + sum(expr_size(c) for c in children(e))


def leaf_count(e: Expr) -> int:
    """Number of variable and constant leaves (units excluded)."""
    if isinstance(e, (Var, RecVar)):
        return 1
    if isinstance(e, Sym) and not e.args:
        return 0 if e.name == ONE else 1
    return sum(leaf_count(c) for c in children(e))


def substitute(e: Expr, rho: dict) -> Expr:
    """Apply the substitution ``rho`` (names to closed expressions); binders shadow."""
    if not rho:
        return e
    if isinstance(e, (Var, RecVar)):
        return rho.get(e.name, e)
    if isinstance(e, Zero):
        return e
    if isinstance(e, Plus):
        return Plus(substitute(e.left, rho), substitute(e.right, rho))
    if isinstance(e, Sym):
        if not e.args:
            return e
        return Sym(e.name, tuple(substitute(a, rho) for a in e.args))
    if isinstance(e, Mu):
        inner = {k: v for k, v in rho.items() if k != e.var}
        return Mu(e.var, substitute(e.body, inner))
    raise TypeError(f"not an expression: {e!r}")


def unfold(e: Expr) -> Expr:
    """``mu x. b`` to ``b[x := mu x. b]``."""
    if not isinstance(e, Mu):
        raise ValueError("unfold expects a fixpoint expression")
    return substitute(e.body, {e.var: e})


def canonical(e: Expr, env: dict | None = None, depth: int = 0) -> Expr:
    """Rename bound recursion variables by binding depth (de Bruijn style)."""
    env = env or {}
    if isinstance(e, RecVar):
        return RecVar(env.get(e.name, e.name))
    if isinstance(e, Mu):
        name = f"#{depth}"
        return Mu(name, canonical(e.body, {**env, e.var: name}, depth + 1))
    if isinstance(e, Plus):
        return Plus(canonical(e.left, env, depth), canonical(e.right, env, depth))
    if isinstance(e, Sym) and e.args:
        return Sym(e.name, tuple(canonical(a, env, depth) for a in e.args))
    return e


def alpha_equal(e: Expr, f: Expr) -> bool:
    return canonical(e) == canonical(f)


def term_to_expr(t: Term) -> Expr:
    if t.is_var:
        return Var(t.head)
    return Sym(t.head, tuple(term_to_expr(a) for a in t.args))


def atom_expr(theory: TheoryConfig, a) -> Expr:
    """The expression of a canonical representative of atom ``a``."""
    return term_to_expr(theory.embed(a))


def expr_to_term(e: Expr) -> Term | None:
    """The term denoted by a fixpoint-free, sum-free expression, else None."""
    if isinstance(e, Var):
        return var(e.name)
    if isinstance(e, Sym):
        kids = [expr_to_term(a) for a in e.args]
        if any(k is None for k in kids):
            return None
        return app(e.name, *kids)
    return None


def check_expr(e: Expr, theory: TheoryConfig) -> None:
    """Raise :class:`TheoryError` unless ``e`` is arity-correct over ``theory``."""
    for s in subexpressions(e):
        if isinstance(s, Sym) and theory.signature.arity(s.name) != len(s.args):
            raise TheoryError(f"symbol {s.name!r} used with {len(s.args)} arguments")
        if isinstance(s, Var) and s.name not in theory.variables:
            raise TheoryError(f"unknown variable {s.name!r}")


# --- fragments ----------------------------------------------------------------

class Fragment(enum.Enum):
    FULL = "full"
    FIXPOINT_FREE = "fixpoint-free"
    KLEENE_STAR = "kleene"
    BIKLEENE = "bikleene"

    @classmethod
    def parse(cls, name: str) -> Fragment:
        aliases = {"full": cls.FULL, "fixpointfree": cls.FIXPOINT_FREE, "fixpoint-free": cls.FIXPOINT_FREE,
                   "ff": cls.FIXPOINT_FREE, "kleene": cls.KLEENE_STAR, "kleenestar": cls.KLEENE_STAR,
                   "ka": cls.KLEENE_STAR, "bikleene": cls.BIKLEENE, "bika": cls.BIKLEENE}
        try:
            return aliases[name.lower()]
        except KeyError:
            raise ValueError(f"unknown fragment {name!r}") from None


def fragment_member(e: Expr, frag: Fragment) -> bool:
    """Whether every fixpoint sub-expression of ``e`` has the fragment's shape."""
    if frag is Fragment.FULL:
        return True
    for s in subexpressions(e):
        if not isinstance(s, Mu):
            continue
        if frag is Fragment.FIXPOINT_FREE:
            return False
        if star_body(s, SEQ) is not None:
            continue
        if frag is Fragment.BIKLEENE and star_body(s, PAR) is not None:
            continue
        return False
    return True


# --- printing -------------------------------------------------------------------

_LEVEL = {"plus": 0, PAR: 1, SEQ: 2, "post": 3, "atom": 4}


def show(e: Expr) -> str:
    return _show(e, -1)


def _paren(text: str, inner: int, outer: int) -> str:
    return f"({text})" if inner < outer else text


def _show(e: Expr, level: int) -> str:
    if isinstance(e, (Var, RecVar)):
        return e.name
    if isinstance(e, Zero):
        return "0"
    if isinstance(e, Plus):
        return _paren(f"{_show(e.left, 0)} + {_show(e.right, 1)}", 0, level)
    if isinstance(e, Sym):
        if not e.args:
            return e.name
        if e.name in (SEQ, PAR) and len(e.args) == 2:
            lv = _LEVEL[e.name]
            sep = "." if e.name == SEQ else " || "
            return _paren(f"{_show(e.args[0], lv)}{sep}{_show(e.args[1], lv + 1)}", lv, level)
        return f"{e.name}({', '.join(_show(a, -1) for a in e.args)})"
    if isinstance(e, Mu):
        for op, suffix in ((SEQ, "*"), (PAR, "^||")):
            body = star_body(e, op)
            if body is not None:
                return _paren(f"{_show(body, _LEVEL['post'] + 1)}{suffix}", _LEVEL["post"], level)
        return _paren(f"mu {e.var}. {_show(e.body, -1)}", -1, level)
    raise TypeError(f"not an expression: {e!r}")


# --- parsing --------------------------------------------------------------------

class ParseError(ValueError):
    """A syntax error with a 1-based line and column."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


_TOKEN = re.compile(r"\s*(?:(\^\|\||\|\||<=|[+.*(),;@/])|([A-Za-z_][A-Za-z0-9_']*)|(\d+)|(\S))")


@dataclass(frozen=True)
class Token:
    kind: str  # "op", "id", "num", "end"
    text: str
    line: int
    column: int


def tokenize(text: str, line: int = 1, column: int = 1) -> list[Token]:
    """Split ``text`` into tokens; positions are offset by (line, column)."""

    def where(offset: int) -> tuple[int, int]:
        nl = text.count("\n", 0, offset)
        if nl:
            return line + nl, offset - text.rfind("\n", 0, offset)
        return line, column + offset

    tokens = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        ln, col = where(m.start(m.lastindex))
        if m.group(1):
            tokens.append(Token("op", m.group(1), ln, col))
        elif m.group(2):
            tokens.append(Token("id", m.group(2), ln, col))
        elif m.group(3):
            tokens.append(Token("num", m.group(3), ln, col))
        else:
            raise ParseError(f"unexpected character {m.group(4)!r}", ln, col)
        pos = m.end()
    ln, col = where(len(text.rstrip()))
    tokens.append(Token("end", "", ln, col))
    return tokens


class ExprParser:
    """Recursive-descent parser over a token list.

    Identifiers bound by ``mu`` are recursion variables; other identifiers
    are constants of the signature or variables of ``variables``.
    """

    def __init__(self, tokens: list[Token], signature: Signature | None = None, variables=None):
        self.tokens = tokens
        self.i = 0
        self.signature = signature
        self.variables = None if variables is None else set(variables)
        self.bound: list[str] = []

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, msg: str):
        raise ParseError(msg, self.tok.line, self.tok.column)

    def accept(self, text: str) -> bool:
        if self.tok.kind in ("op", "num") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")

    def parse_expr(self) -> Expr:
        e = self.parse_par()
        while self.accept("+"):
            e = Plus(e, self.parse_par())
        return e

    def parse_par(self) -> Expr:
        e = self.parse_seq()
        while self.accept("||"):
            e = Sym(PAR, (e, self.parse_seq()))
        return e

    def parse_seq(self) -> Expr:
        e = self.parse_postfix()
        while self.accept("."):
            e = Sym(SEQ, (e, self.parse_postfix()))
        return e

    def parse_postfix(self) -> Expr:
        e = self.parse_primary()
        while True:
            if self.accept("*"):
                e = star(e)
            elif self.accept("^||"):
                e = parstar(e)
            else:
                return e

    def parse_primary(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            if t.text not in ("0", "1"):
                self.error(f"unexpected number {t.text!r}")
            self.i += 1
            return ZERO if t.text == "0" else UNIT
        if self.accept("("):
            e = self.parse_expr()
            self.expect(")")
            return e
        if t.kind != "id":
            self.error(f"unexpected {t.text or 'end of input'!r}")
        self.i += 1
        if t.text == "mu":
            name = self.tok
            if name.kind != "id":
                self.error("expected a recursion variable after 'mu'")
            if self.variables is not None and name.text in self.variables:
                self.error(f"recursion variable {name.text!r} clashes with a declared variable")
            self.i += 1
            self.expect(".")
            self.bound.append(name.text)
            body = self.parse_expr()
            self.bound.pop()
            return Mu(name.text, body)
        if self.accept("("):
            args = [self.parse_expr()]
            while self.accept(","):
                args.append(self.parse_expr())
            self.expect(")")
            self._check_symbol(t, len(args))
            return Sym(t.text, tuple(args))
        if t.text in self.bound:
            return RecVar(t.text)
        if self.signature is not None and t.text in self.signature:
            self._check_symbol(t, 0)
            return Sym(t.text, ())
        if self.variables is not None and t.text not in self.variables:
            raise ParseError(f"unknown variable {t.text!r}", t.line, t.column)
        return Var(t.text)

    def _check_symbol(self, t: Token, n: int) -> None:
        if self.signature is None:
            return
        if t.text not in self.signature:
            raise ParseError(f"unknown symbol {t.text!r}", t.line, t.column)
        if self.signature.arity(t.text) != n:
            raise ParseError(f"symbol {t.text!r} expects {self.signature.arity(t.text)} arguments", t.line, t.column)


def parse_expr(text: str, theory: TheoryConfig | None = None) -> Expr:
    """Parse the concrete syntax ``0 1 + . || f(e, e) mu x. e e* e^||``."""
    sig = theory.signature if theory is not None else None
    xs = theory.variables if theory is not None else None
    p = ExprParser(tokenize(text), sig, xs)
    e = p.parse_expr()
    if p.tok.kind != "end":
        p.error(f"unexpected {p.tok.text!r}")
    if theory is not None:
        for s in subexpressions(e):
            if isinstance(s, Sym) and s.name in (SEQ, PAR, ONE) and s.name not in theory.signature:
                raise TheoryError(f"theory {theory.kind!r} has no symbol {s.name!r}")
    return e
