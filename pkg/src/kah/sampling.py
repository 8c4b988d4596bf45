"""Seeded random expressions for corpora and property tests."""

from __future__ import annotations

import random

from .expressions import UNIT, ZERO, Expr, Fragment, Mu, Plus, RecVar, Sym, Var, fresh_name, parstar, star
from .theory import ONE, PAR, SEQ, TheoryConfig


def random_expr(rng: random.Random, theory: TheoryConfig, size: int, fragment: Fragment = Fragment.KLEENE_STAR,
                units: bool = True, zeros: bool = False) -> Expr:
    """A random expression with about ``size`` constructors.

    Kleene fragments use stars over the theory's products, the fixpoint-free
    fragment uses none, and the full fragment adds general ``mu`` binders.
    """
    symbols = [(s, n) for s, n in sorted(theory.signature.symbols) if s != ONE]

    def leaf(binders: list) -> Expr:
        choices: list = [Var(x) for x in theory.variables]
        nullary = [Sym(s, ()) for s, n in symbols if n == 0]
        choices += nullary
        if binders and rng.random() < 0.3:
            return RecVar(rng.choice(binders))
        if units and ONE in theory.signature and rng.random() < 0.1:
            return UNIT
        if zeros and rng.random() < 0.05:
            return ZERO
        return rng.choice(choices)

    def go(n: int, binders: list) -> Expr:
        if n <= 1:
            return leaf(binders)
        kinds = ["plus"] + [s for s, k in symbols if k > 0]
        if fragment in (Fragment.KLEENE_STAR, Fragment.BIKLEENE) and SEQ in theory.signature:
            kinds.append("star")
        if fragment == Fragment.BIKLEENE and PAR in theory.signature:
            kinds.append("parstar")
        if fragment == Fragment.FULL:
            kinds.append("mu")
        k = rng.choice(kinds)
        if k == "plus":
            m = rng.randint(1, n - 1)
            return Plus(go(m, binders), go(n - m, binders))
        if k == "star":
            return star(go(n - 1, binders))
        if k == "parstar":
            return parstar(go(n - 1, binders))
        if k == "mu":
            x = fresh_name()
            half = max(1, (n - 1) // 2)
            return Mu(x, Plus(go(half, binders), go(max(1, n - 1 - half), binders + [x])))
        arity = dict(symbols)[k]
        parts = _split(rng, n - 1, arity)
        return Sym(k, tuple(go(p, binders) for p in parts))

    return go(size, [])


def _split(rng: random.Random, total: int, parts: int) -> list:
    total = max(total, parts)
    cuts = sorted(rng.sample(range(1, total), parts - 1)) if parts > 1 else []
    bounds = [0] + cuts + [total]
    return [b - a for a, b in zip(bounds, bounds[1:])]


def corpus(theory: TheoryConfig, count: int, seed: int = 0, size: tuple = (2, 6),
           fragment: Fragment = Fragment.KLEENE_STAR, **kw) -> list:
    """``count`` expressions with sizes drawn uniformly from ``size``."""
    rng = random.Random(seed)
    return [random_expr(rng, theory, rng.randint(*size), fragment, **kw) for _ in range(count)]
