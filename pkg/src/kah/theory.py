"""Signatures, terms, equational theories, canonical atoms and contexts.

Atoms are canonical representatives of terms modulo the equations of a
theory.  Each built-in theory uses its own hashable representation:

* monoid: a tuple of variable names (a word, ``()`` is the unit);
* commutative monoid: a sorted tuple of variable names (a multiset);
* bimonoid: a series-parallel term encoded as nested tuples
  ``("v", x)``, ``("s", children)`` or ``("p", sorted children)``;
* free theory: the :class:`Term` itself.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

HOLE = "□"
SEQ = "."
PAR = "||"
ONE = "1"


class TheoryError(ValueError):
    """Raised for malformed terms or unsupported theory operations."""


@dataclass(frozen=True, order=True)
class Term:
    """A first-order term; variables are leaves with ``is_var`` set."""

    head: str
    args: tuple = ()
    is_var: bool = False

    def __repr__(self) -> str:
        if self.is_var or not self.args:
            return self.head
        return f"{self.head}({', '.join(map(repr, self.args))})"

    def leaves(self) -> int:
        if not self.args:
            return 1
        return sum(a.leaves() for a in self.args)

    def nodes(self) -> int:
        return 1 + sum(a.nodes() for a in self.args)

    def height(self) -> int:
        h = self.__dict__.get("_height")
        if h is None:
            h = 1 + max((a.height() for a in self.args), default=0)
            object.__setattr__(self, "_height", h)
        return h

    def variables(self) -> Counter:
        if self.is_var:
            return Counter([self.head])
        out: Counter = Counter()
        for a in self.args:
            out.update(a.variables())
        return out

    def substitute(self, mapping: dict) -> Term:
        if self.is_var:
            return mapping.get(self.head, self)
        if not self.args:
            return self
        return Term(self.head, tuple(a.substitute(mapping) for a in self.args))


def var(name: str) -> Term:
    return Term(name, (), True)


def app(name: str, *args: Term) -> Term:
    return Term(name, tuple(args))


@dataclass(frozen=True)
class Signature:
    """A finite ranked alphabet given as ``(name, arity)`` pairs."""

    symbols: tuple = ()

    def __post_init__(self):
        symbols = tuple((str(n), int(k)) for n, k in self.symbols)
        names = [n for n, _ in symbols]
        if len(set(names)) != len(names):
            raise TheoryError(f"duplicate symbol names in {names}")
        if any(k < 0 for _, k in symbols):
            raise TheoryError("arities must be non-negative")
        object.__setattr__(self, "symbols", symbols)

    def arity(self, name: str) -> int:
        for n, k in self.symbols:
            if n == name:
                return k
        raise TheoryError(f"unknown symbol {name!r}")

    def __contains__(self, name: str) -> bool:
        return any(n == name for n, _ in self.symbols)

    def check_term(self, t: Term, variables: Iterable[str] | None = None) -> None:
        """Raise :class:`TheoryError` unless ``t`` is arity-correct."""
        if t.is_var:
            if variables is not None and t.head not in variables and t.head != HOLE:
                raise TheoryError(f"unknown variable {t.head!r}")
            return
        if self.arity(t.head) != len(t.args):
            raise TheoryError(f"symbol {t.head!r} expects {self.arity(t.head)} arguments, got {len(t.args)}")
        for a in t.args:
            self.check_term(a, variables)


MONOID_SIGNATURE = Signature(((SEQ, 2), (ONE, 0)))
BIMONOID_SIGNATURE = Signature(((SEQ, 2), (PAR, 2), (ONE, 0)))


def check_linear_regular(equations, signature: Signature | None = None) -> list[str]:
    """Classify each equation ``(lhs, rhs)`` as ``ok``, ``not_linear(x)`` or ``not_regular(x)``."""
    verdicts = []
    for lhs, rhs in equations:
        if not isinstance(lhs, Term) or not isinstance(rhs, Term):
            raise TheoryError("equations must relate two terms")
        if signature is not None:
            signature.check_term(lhs)
            signature.check_term(rhs)
        left, right = lhs.variables(), rhs.variables()
        bad = sorted(x for x in set(left) | set(right) if left[x] > 1 or right[x] > 1)
        if bad:
            verdicts.append(f"not_linear({bad[0]})")
            continue
        unbalanced = sorted(set(left) ^ set(right))
        verdicts.append(f"not_regular({unbalanced[0]})" if unbalanced else "ok")
    return verdicts


@dataclass(frozen=True, order=True)
class Context:
    """An atom with exactly one hole; ``data`` is theory specific."""

    data: object

    def __repr__(self) -> str:
        return f"Context({self.data!r})"


# --- bimonoid helpers -------------------------------------------------------

SP_UNIT = ("s", ())


def sp_var(x: str):
    return ("v", x)


def sp_seq(parts) -> tuple:
    flat = []
    for p in parts:
        if p[0] == "s":
            flat.extend(p[1])
        else:
            flat.append(p)
    if len(flat) == 1:
        return flat[0]
    return ("s", tuple(flat))


def sp_par(parts) -> tuple:
    flat = []
    for p in parts:
        if p == SP_UNIT:
            continue
        if p[0] == "p":
            flat.extend(p[1])
        else:
            flat.append(p)
    if not flat:
        return SP_UNIT
    if len(flat) == 1:
        return flat[0]
    return ("p", tuple(sorted(flat)))


def sp_size(a) -> int:
    if a[0] == "v":
        return 1
    return sum(sp_size(c) for c in a[1])


def sp_holes(a) -> int:
    if a[0] == "v":
        return int(a[1] == HOLE)
    return sum(sp_holes(c) for c in a[1])


def sp_plug(a, b):
    if a[0] == "v":
        return b if a[1] == HOLE else a
    kids = [sp_plug(c, b) for c in a[1]]
    return sp_seq(kids) if a[0] == "s" else sp_par(kids)


def _sub_multisets(items: tuple) -> Iterator[tuple[tuple, tuple]]:
    """Yield (chosen, rest) for every distinct sub-multiset of a sorted tuple."""
    counts = sorted(Counter(items).items())
    ranges = [range(c + 1) for _, c in counts]
    for pick in itertools.product(*ranges):
        chosen, rest = [], []
        for (item, c), k in zip(counts, pick):
            chosen.extend([item] * k)
            rest.extend([item] * (c - k))
        yield tuple(chosen), tuple(rest)


def sp_split(u, b) -> Iterator:
    """Yield contexts ``C`` (atoms with one hole) such that ``C[b] = u``; ``b`` not the unit."""
    hole = sp_var(HOLE)
    if u == b:
        yield hole
    if u[0] == "v":
        return
    kids = u[1]
    if u[0] == "s":
        if b[0] == "s":
            m = len(b[1])
            for i in range(len(kids) - m + 1):
                if kids[i:i + m] == b[1] and m < len(kids):
                    yield sp_seq(kids[:i] + (hole,) + kids[i + m:])
        for i, k in enumerate(kids):
            for c in sp_split(k, b):
                yield sp_seq(kids[:i] + (c,) + kids[i + 1:])
    else:
        if b[0] == "p":
            need, have = Counter(b[1]), Counter(kids)
            if all(have[x] >= n for x, n in need.items()) and need != have:
                rest = list((have - need).elements())
                yield sp_par([hole] + rest)
        seen = set()
        for i, k in enumerate(kids):
            if k in seen:
                continue
            seen.add(k)
            rest = kids[:i] + kids[i + 1:]
            for c in sp_split(k, b):
                yield sp_par((c,) + rest)


def sp_insert_hole(u) -> Iterator:
    """Yield contexts ``C`` with ``C[1] = u``: the hole inserted anywhere."""
    hole = sp_var(HOLE)
    if u == SP_UNIT:
        yield hole
        return
    yield sp_par([hole, u])
    yield sp_seq([hole, u])
    yield sp_seq([u, hole])
    if u[0] == "v":
        return
    kids = u[1]
    n = len(kids)
    if u[0] == "s":
        for i in range(1, n):
            yield sp_seq(kids[:i] + (hole,) + kids[i:])
        for i in range(n):
            for j in range(i + 1, n + 1):
                if j - i == n:
                    continue
                seg = kids[i:j]
                inner = seg[0] if len(seg) == 1 else ("s", seg)
                for c in sp_insert_hole(inner):
                    yield sp_seq(kids[:i] + (c,) + kids[j:])
    else:
        for chosen, rest in _sub_multisets(kids):
            if not chosen or not rest:
                continue
            inner = chosen[0] if len(chosen) == 1 else ("p", chosen)
            for c in sp_insert_hole(inner):
                yield sp_par((c,) + rest)


def sp_show(a, top: bool = True) -> str:
    if a == SP_UNIT:
        return ONE
    if a[0] == "v":
        return a[1]
    if a[0] == "s":
        text = ".".join(sp_show(c, False) for c in a[1])
        return text
    text = "||".join(sp_show(c, False) for c in a[1])
    return text if top else f"({text})"


def _sp_to_term(a) -> Term:
    if a == SP_UNIT:
        return app(ONE)
    if a[0] == "v":
        return var(a[1])
    op = SEQ if a[0] == "s" else PAR
    kids = [_sp_to_term(c) for c in a[1]]
    out = kids[0]
    for k in kids[1:]:
        out = app(op, out, k)
    return out


def _word_show(w: tuple) -> str:
    return ".".join(w) if w else ONE


def _term_with_hole(t: Term) -> int:
    return t.variables()[HOLE]


def _term_positions(t: Term, path=()) -> Iterator[tuple[tuple, Term]]:
    yield path, t
    for i, a in enumerate(t.args):
        yield from _term_positions(a, path + (i,))


def _term_replace(t: Term, path: tuple, new: Term) -> Term:
    if not path:
        return new
    i = path[0]
    args = list(t.args)
    args[i] = _term_replace(args[i], path[1:], new)
    return Term(t.head, tuple(args), t.is_var)


KINDS = ("free", "monoid", "cmonoid", "bimonoid", "custom")


@dataclass(frozen=True)
class TheoryConfig:
    """A signature, a choice of equations and a finite ordered set of variables.

    ``kind`` is one of ``free``, ``monoid``, ``cmonoid``, ``bimonoid`` or
    ``custom``.  Custom theories need ``equations`` (pairs of terms) and a
    ``normaliser`` mapping a term to its canonical representative.
    """

    kind: str
    signature: Signature
    variables: tuple
    equations: tuple = ()
    normaliser: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise TheoryError(f"unknown theory {self.kind!r}")
        object.__setattr__(self, "variables", tuple(self.variables))
        if len(set(self.variables)) != len(self.variables):
            raise TheoryError("duplicate variable names")
        if HOLE in self.variables:
            raise TheoryError(f"{HOLE!r} is reserved for context holes")
        for x in self.variables:
            if x in self.signature:
                raise TheoryError(f"variable {x!r} clashes with a symbol")
        expected = {"monoid": MONOID_SIGNATURE, "cmonoid": MONOID_SIGNATURE, "bimonoid": BIMONOID_SIGNATURE}
        if self.kind in expected and self.signature != expected[self.kind]:
            raise TheoryError(f"{self.kind} theory requires signature {expected[self.kind].symbols}")
        if self.kind == "custom":
            verdicts = check_linear_regular(self.equations, self.signature)
            bad = [v for v in verdicts if v != "ok"]
            if bad:
                raise TheoryError(f"custom equations are not linear-regular: {bad}")

    # --- constructors -------------------------------------------------------

    @classmethod
    def free(cls, symbols, variables) -> TheoryConfig:
        return cls("free", Signature(tuple(symbols)), tuple(variables))

    @classmethod
    def monoid(cls, variables) -> TheoryConfig:
        return cls("monoid", MONOID_SIGNATURE, tuple(variables))

    @classmethod
    def cmonoid(cls, variables) -> TheoryConfig:
        return cls("cmonoid", MONOID_SIGNATURE, tuple(variables))

    @classmethod
    def bimonoid(cls, variables) -> TheoryConfig:
        return cls("bimonoid", BIMONOID_SIGNATURE, tuple(variables))

    @classmethod
    def custom(cls, symbols, equations, variables, normaliser=None) -> TheoryConfig:
        return cls("custom", Signature(tuple(symbols)), tuple(variables), tuple(equations), normaliser)

    def with_variables(self, variables) -> TheoryConfig:
        return TheoryConfig(self.kind, self.signature, tuple(variables), self.equations, self.normaliser)

    @property
    def laws(self) -> list[tuple[str, Term, Term]]:
        """The equations E of the theory as named pairs of terms over x, y, z."""
        x, y, z = var("x"), var("y"), var("z")
        one = app(ONE)
        monoid = [
            ("seq-unit-r", app(SEQ, x, one), x),
            ("seq-unit-l", app(SEQ, one, x), x),
            ("seq-assoc", app(SEQ, x, app(SEQ, y, z)), app(SEQ, app(SEQ, x, y), z)),
        ]
        if self.kind == "monoid":
            return monoid
        if self.kind == "cmonoid":
            return monoid + [("seq-comm", app(SEQ, x, y), app(SEQ, y, x))]
        if self.kind == "bimonoid":
            return monoid + [
                ("par-unit-r", app(PAR, x, one), x),
                ("par-assoc", app(PAR, x, app(PAR, y, z)), app(PAR, app(PAR, x, y), z)),
                ("par-comm", app(PAR, x, y), app(PAR, y, x)),
            ]
        if self.kind == "custom":
            return [(f"eq{k}", u, v) for k, (u, v) in enumerate(self.equations)]
        return []

    @property
    def builtin_equations(self) -> list[tuple[Term, Term]]:
        return [(u, v) for _, u, v in self.laws]

    def context_term(self, c: Context) -> Term:
        """A term with one hole variable representing the context ``c``."""
        k = self.kind
        if k == "monoid":
            left, right = c.data
            return self.embed(left + (HOLE,) + right)
        if k == "cmonoid":
            return self.embed(c.data + (HOLE,))
        if k == "bimonoid":
            return _sp_to_term(c.data)
        return c.data

    # --- atoms ----------------------------------------------------------------

    def _custom_norm(self, t: Term) -> Term:
        if self.normaliser is None:
            raise TheoryError("custom theory has no registered normaliser hook")
        return self.normaliser(t)

    def normalize(self, t: Term):
        """Return the canonical atom of ``t`` modulo the theory's equations."""
        self.signature.check_term(t)
        return self._norm(t)

    def _norm(self, t: Term):
        k = self.kind
        if k == "free":
            return t
        if k == "custom":
            return self._custom_norm(t)
        if t.is_var:
            return sp_var(t.head) if k == "bimonoid" else (t.head,)
        kids = [self._norm(a) for a in t.args]
        return self.apply_symbol(t.head, kids)

    def var_atom(self, x: str):
        if self.kind in ("free", "custom"):
            return var(x) if self.kind == "free" else self._custom_norm(var(x))
        if self.kind == "bimonoid":
            return sp_var(x)
        return (x,)

    def apply_symbol(self, name: str, atoms):
        """Canonical atom of ``name(t1, ..., tn)`` for representatives ``ti`` of ``atoms``."""
        k = self.kind
        if k == "free":
            return Term(name, tuple(atoms))
        if k == "custom":
            return self._custom_norm(Term(name, tuple(self.embed(a) for a in atoms)))
        if name == ONE:
            return SP_UNIT if k == "bimonoid" else ()
        if k == "bimonoid":
            return sp_seq(atoms) if name == SEQ else sp_par(atoms)
        if name != SEQ:
            raise TheoryError(f"symbol {name!r} not in {k} signature")
        u, v = atoms
        return u + v if k == "monoid" else tuple(sorted(u + v))

    def embed(self, a) -> Term:
        """A term representing the atom ``a``."""
        k = self.kind
        if k in ("free", "custom"):
            return a
        if k == "bimonoid":
            return _sp_to_term(a)
        if not a:
            return app(ONE)
        out = var(a[0])
        for x in a[1:]:
            out = app(SEQ, out, var(x))
        return out

    def size(self, a) -> int:
        """Leaf count without units; node count for free and custom theories."""
        k = self.kind
        if k in ("free", "custom"):
            return a.nodes()
        if k == "bimonoid":
            return sp_size(a)
        return len(a)

    def depth(self, a) -> int:
        """Height of a tree atom, leaves having depth 1."""
        if self.kind not in ("free", "custom"):
            raise TheoryError("depth is only defined for tree atoms")
        return a.height()

    def measure(self, a, how: str = "size") -> int:
        return self.depth(a) if how == "depth" else self.size(a)

    def show(self, a) -> str:
        k = self.kind
        if k in ("free", "custom"):
            return repr(a)
        if k == "bimonoid":
            return sp_show(a)
        return _word_show(a)

    def atom_key(self, a):
        """Sort key giving a deterministic order on atoms."""
        return (self.size(a), a)

    def enumerate_atoms(self, size_bound: int, how: str = "size") -> list:
        """All atoms whose size (or depth) is at most ``size_bound``, sorted."""
        if size_bound < 0:
            return []
        k = self.kind
        xs = self.variables
        if k == "monoid":
            return [w for n in range(size_bound + 1) for w in itertools.product(xs, repeat=n)]
        if k == "cmonoid":
            return [w for n in range(size_bound + 1) for w in itertools.combinations_with_replacement(xs, n)]
        if k == "bimonoid":
            layers = _sp_layers([sp_var(x) for x in xs], size_bound)
            return [SP_UNIT] + [a for layer in layers[1:] for a in layer]
        if how == "depth":
            return sorted(self._trees_by_depth(size_bound), key=lambda t: (t.height(), t.nodes(), t))
        return self._trees_by_size(size_bound)

    def _trees_by_size(self, bound: int, extra=()) -> list:
        leaves = [app(n) for n, a in self.signature.symbols if a == 0] + [var(x) for x in self.variables + extra]
        layers: list[list] = [[] for _ in range(bound + 1)]
        if bound >= 1:
            layers[1] = [self._leaf_atom(t) for t in leaves]
        for n in range(2, bound + 1):
            for name, arity in self.signature.symbols:
                if arity == 0:
                    continue
                for parts in _compositions(n - 1, arity):
                    for kids in itertools.product(*(layers[p] for p in parts)):
                        layers[n].append(self.apply_symbol(name, kids))
        seen, out = set(), []
        for layer in layers:
            for t in layer:
                if t not in seen and self.size(t) <= bound:
                    seen.add(t)
                    out.append(t)
        return out

    def _leaf_atom(self, t: Term):
        return self._custom_norm(t) if self.kind == "custom" else t

    def _trees_by_depth(self, bound: int) -> set:
        leaves = [app(n) for n, a in self.signature.symbols if a == 0] + [var(x) for x in self.variables]
        trees: set = set()
        for _ in range(bound):
            nxt = {self._leaf_atom(t) for t in leaves}
            for name, arity in self.signature.symbols:
                if arity:
                    for kids in itertools.product(sorted(trees), repeat=arity):
                        nxt.add(self.apply_symbol(name, kids))
            trees = {t for t in nxt if self.depth(t) <= bound}
        return trees

    # --- contexts ---------------------------------------------------------------

    def identity_context(self) -> Context:
        k = self.kind
        if k == "monoid":
            return Context(((), ()))
        if k == "cmonoid":
            return Context(())
        if k == "bimonoid":
            return Context(sp_var(HOLE))
        return Context(var(HOLE))

    def apply_context(self, c: Context, a):
        """Plug ``a`` into the hole of ``c`` and normalise."""
        k = self.kind
        if k == "monoid":
            left, right = c.data
            return left + a + right
        if k == "cmonoid":
            return tuple(sorted(c.data + a))
        if k == "bimonoid":
            return sp_plug(c.data, a)
        plugged = c.data.substitute({HOLE: self.embed(a)})
        return self._custom_norm(plugged) if k == "custom" else plugged

    def apply_context_lang(self, c: Context, lang) -> set:
        return {self.apply_context(c, a) for a in lang}

    def context_size(self, c: Context) -> int:
        """Number of non-hole leaves (non-hole nodes when unary symbols exist)."""
        k = self.kind
        if k == "monoid":
            return len(c.data[0]) + len(c.data[1])
        if k == "cmonoid":
            return len(c.data)
        if k == "bimonoid":
            return sp_size(c.data) - 1
        if self._has_unary():
            return c.data.nodes() - 1
        return c.data.leaves() - 1

    def _has_unary(self) -> bool:
        return any(a == 1 for _, a in self.signature.symbols)

    def enumerate_contexts(self, size_bound: int) -> list:
        """All contexts of size at most ``size_bound``, sorted."""
        k = self.kind
        if size_bound < 0:
            return []
        if k == "monoid":
            words = self.enumerate_atoms(size_bound)
            out = [Context((l, r)) for l in words for r in words if len(l) + len(r) <= size_bound]
        elif k == "cmonoid":
            out = [Context(m) for m in self.enumerate_atoms(size_bound)]
        elif k == "bimonoid":
            layers = _sp_layers([sp_var(x) for x in self.variables + (HOLE,)], size_bound + 1)
            out = [Context(a) for layer in layers for a in layer if sp_holes(a) == 1]
        else:
            out = [Context(t) for t in self._tree_contexts(size_bound)]
        return sorted(set(out), key=lambda c: (self.context_size(c), c))

    def _tree_contexts(self, bound: int) -> set:
        # a context of leaf size n has at most 2n+1 non-hole nodes when all arities are >= 2
        node_bound = 2 * bound + 2 if not self._has_unary() else bound + 1
        found = set()
        for t in TheoryConfig("free", self.signature, self.variables)._trees_by_size(node_bound, (HOLE,)):
            if _term_with_hole(t) == 1:
                if self.kind == "custom":
                    t = self._custom_norm(t)
                if self.context_size(Context(t)) <= bound:
                    found.add(t)
        return found

    def split(self, u, b) -> list:
        """All contexts ``C`` with ``C[b] = u``."""
        k = self.kind
        if k == "monoid":
            n = len(b)
            return [Context((u[:i], u[i + n:])) for i in range(len(u) - n + 1) if u[i:i + n] == b]
        if k == "cmonoid":
            have, need = Counter(u), Counter(b)
            if all(have[x] >= n for x, n in need.items()):
                return [Context(tuple(sorted((have - need).elements())))]
            return []
        if k == "bimonoid":
            found = sp_insert_hole(u) if b == SP_UNIT else sp_split(u, b)
            return sorted({Context(c) for c in found})
        if k == "free":
            return [Context(_term_replace(u, p, var(HOLE))) for p, s in _term_positions(u) if s == b]
        return [c for c in self.enumerate_contexts(self.size(u)) if self.apply_context(c, b) == u]

    def show_context(self, c: Context) -> str:
        k = self.kind
        if k == "monoid":
            return f"({_word_show(c.data[0])}, {_word_show(c.data[1])})"
        if k == "cmonoid":
            return f"{_word_show(c.data)}.{HOLE}"
        if k == "bimonoid":
            return sp_show(c.data)
        return repr(c.data)


def _compositions(total: int, parts: int) -> Iterator[tuple]:
    """Ordered tuples of ``parts`` positive integers summing to ``total``."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _sp_layers(leaves: list, bound: int) -> list[list]:
    """Non-unit sp atoms grouped by size, each layer sorted."""
    layers: list[set] = [set() for _ in range(bound + 1)]
    if bound >= 1:
        layers[1] = set(leaves)
    for n in range(2, bound + 1):
        for i in range(1, n):
            for a in layers[i]:
                for b in layers[n - i]:
                    layers[n].add(sp_seq([a, b]))
                    layers[n].add(sp_par([a, b]))
    return [sorted(layer) for layer in layers]
