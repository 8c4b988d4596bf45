"""Pilling normal forms and semilinear Parikh images for commutative regular expressions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from ..expressions import UNIT, Expr, Mu, Plus, Sym, Var, Zero, atom_expr, plus, seq, show, star, star_body
from ..theory import ONE, SEQ, TheoryConfig
from .words import FragmentViolation

# A summand (w0, periods) stands for w0 . w1* . ... . wn*; multisets are sorted tuples.


def _merge(u: tuple, v: tuple) -> tuple:
    return tuple(sorted(u + v))


def _product(left: frozenset, right: frozenset) -> frozenset:
    return frozenset((_merge(w, w2), p | p2) for w, p in left for w2, p2 in right)


def _star_summand(w: tuple, periods: frozenset) -> frozenset:
    """The normal form of ``(w . periods*)*``."""
    if not w:
        return frozenset([((), periods)])
    if not periods:
        return frozenset([((), frozenset([w]))])
    return frozenset([((), frozenset()), (w, periods | {w})])


def _nf(e: Expr) -> frozenset:
    if isinstance(e, Var):
        return frozenset([((e.name,), frozenset())])
    if isinstance(e, Zero):
        return frozenset()
    if isinstance(e, Plus):
        return _nf(e.left) | _nf(e.right)
    if isinstance(e, Sym):
        if e.name == ONE and not e.args:
            return frozenset([((), frozenset())])
        if e.name == SEQ and len(e.args) == 2:
            return _product(_nf(e.args[0]), _nf(e.args[1]))
    if isinstance(e, Mu):
        body = star_body(e, SEQ)
        if body is not None:
            out = frozenset([((), frozenset())])
            for w, periods in sorted(_nf(body), key=_summand_key):
                out = _product(out, _star_summand(w, periods))
            return out
    raise FragmentViolation(f"{show(e)} is outside the commutative regular-expression fragment")


def _summand_key(s) -> tuple:
    w, periods = s
    return (len(w), w, len(periods), sorted(periods))


def pilling_normal_form(e: Expr) -> list:
    """Summands ``(w0, [w1, ..., wn])`` with pairwise distinct periods, each meaning ``w0.w1*...wn*``."""
    return [(w, sorted(periods, key=lambda p: (len(p), p))) for w, periods in sorted(_nf(e), key=_summand_key)]


def summand_expr(theory: TheoryConfig, w: tuple, periods) -> Expr:
    parts = [atom_expr(theory, w)] if w else []
    parts += [star(atom_expr(theory, p)) for p in periods]
    return seq(*parts) if parts else UNIT


def normal_form_expr(e: Expr, theory: TheoryConfig) -> Expr:
    return plus(*(summand_expr(theory, w, periods) for w, periods in pilling_normal_form(e)))


# --- semilinear sets --------------------------------------------------------------

@dataclass(frozen=True)
class LinearSet:
    offset: tuple
    periods: tuple

    def __str__(self) -> str:
        return f"{self.offset} + <{', '.join(map(str, self.periods))}>"


@dataclass(frozen=True)
class SemilinearSet:
    dims: tuple
    parts: tuple

    def __str__(self) -> str:
        return " | ".join(map(str, self.parts)) or "{}"


def _vector(w: tuple, dims: tuple) -> tuple:
    return tuple(w.count(x) for x in dims)


def parikh(e: Expr, theory: TheoryConfig) -> SemilinearSet:
    dims = tuple(theory.variables)
    parts = tuple(LinearSet(_vector(w, dims), tuple(_vector(p, dims) for p in periods))
                  for w, periods in pilling_normal_form(e))
    return SemilinearSet(dims, parts)


def linear_member(v: tuple, ls: LinearSet) -> bool:
    rest = tuple(a - b for a, b in zip(v, ls.offset))
    if any(x < 0 for x in rest):
        return False
    return _solve(rest, ls.periods)


@lru_cache(maxsize=100_000)
def _solve(rest: tuple, periods: tuple) -> bool:
    """Whether ``rest`` is a non-negative integer combination of ``periods``."""
    if not any(rest):
        return True
    if not periods:
        return False
    p, others = periods[0], periods[1:]
    k = 0
    cur = rest
    while all(x >= 0 for x in cur):
        if _solve(cur, others):
            return True
        cur = tuple(a - b for a, b in zip(cur, p))
        k += 1
    return False


def semilinear_member(v: tuple, s: SemilinearSet) -> bool:
    return any(linear_member(tuple(v), ls) for ls in s.parts)


@dataclass(frozen=True)
class BoundedInclusion:
    holds: bool
    bound: int
    counterexample: tuple | None = None

    def __bool__(self) -> bool:
        return self.holds


def semilinear_inclusion_bounded(s1: SemilinearSet, s2: SemilinearSet, bound: int) -> BoundedInclusion:
    """Check every vector with components at most ``bound``, smallest first."""
    vectors = sorted(itertools.product(range(bound + 1), repeat=len(s1.dims)), key=lambda v: (sum(v), v))
    for v in vectors:
        if semilinear_member(v, s1) and not semilinear_member(v, s2):
            return BoundedInclusion(False, bound, v)
    return BoundedInclusion(True, bound)
