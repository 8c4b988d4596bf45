"""An ordered monoid satisfying the naive axioms but refuting ``a*.a <= a*``.

The carrier is the chain ``0 < 1 = a^0 < a < a^2 < ... < a* < T``.  Joins are
maxima, products follow the table below, and fixpoints are computed by
iteration with detection of the limit ``a*`` of an unbounded run of powers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import total_ordering

from ..expressions import Expr, Mu, Plus, RecVar, Sym, Var, Zero, expr_size, parse_expr, substitute, variables
from ..theory import ONE, SEQ, TheoryConfig
from .core import naive_axioms


@total_ordering
@dataclass(frozen=True)
class CElem:
    """``kind`` is ``0``, ``pow`` (with exponent ``n``), ``star`` or ``top``."""

    kind: str
    n: int = 0

    @property
    def rank(self) -> tuple:
        return ({"0": 0, "pow": 1, "star": 2, "top": 3}[self.kind], self.n)

    def __lt__(self, other: CElem) -> bool:
        return self.rank < other.rank

    def __str__(self) -> str:
        if self.kind == "pow":
            return {0: "1", 1: "a"}.get(self.n, f"a^{self.n}")
        return {"0": "0", "star": "a*", "top": "T"}[self.kind]


BOT = CElem("0")
UNIT_EL = CElem("pow", 0)
STAR_EL = CElem("star")
TOP = CElem("top")


def power(n: int) -> CElem:
    return CElem("pow", n)


def mul(x: CElem, y: CElem) -> CElem:
    if x == BOT or y == BOT:
        return BOT
    if x == TOP or y == TOP:
        return TOP
    if x.kind == "pow" and y.kind == "pow":
        return power(x.n + y.n)
    if x.kind == "pow":
        return STAR_EL
    if y == UNIT_EL:
        return STAR_EL
    return TOP


GENERATORS = (BOT, UNIT_EL, power(1), power(2), power(3), STAR_EL, TOP)


def _limit_steps(e: Expr) -> int:
    return 64 + 8 * expr_size(e)


def _eval(e: Expr, env: dict, atom: str) -> CElem:
    if isinstance(e, Var):
        if e.name in env:
            return env[e.name]
        if e.name != atom:
            raise ValueError(f"the counter-model interprets only the variable {atom!r}")
        return power(1)
    if isinstance(e, RecVar):
        return env[e.name]
    if isinstance(e, Zero):
        return BOT
    if isinstance(e, Plus):
        return max(_eval(e.left, env, atom), _eval(e.right, env, atom))
    if isinstance(e, Sym):
        if e.name == ONE and not e.args:
            return UNIT_EL
        if e.name == SEQ and len(e.args) == 2:
            return mul(_eval(e.args[0], env, atom), _eval(e.args[1], env, atom))
        raise ValueError(f"symbol {e.name!r} is not interpreted by the counter-model")
    if isinstance(e, Mu):
        return _lfp(e, env, atom)
    raise TypeError(f"not an expression: {e!r}")


def _lfp(m: Mu, env: dict, atom: str) -> CElem:
    """Least fixpoint by iteration; a long strictly increasing run of powers converges to ``a*``."""
    limit = _limit_steps(m)
    cur = BOT
    run = 0
    while True:
        nxt = _eval(m.body, {**env, m.var: cur}, atom)
        if nxt == cur:
            return cur
        if nxt < cur:
            raise ValueError("fixpoint iteration is not monotone")
        run = run + 1 if nxt.kind == "pow" else 0
        cur = nxt
        if run > limit:
            cur = STAR_EL
            run = 0


def countermodel_eval(e: Expr, env: dict | None = None, atom: str = "a") -> CElem:
    """The value of ``e`` in the counter-model, reading ``atom`` as the generator."""
    others = variables(e) - {atom} - set(env or {})
    if others:
        raise ValueError(f"the counter-model takes a single variable, found {sorted(others)}")
    return _eval(e, dict(env or {}), atom)


@dataclass
class CountermodelReport:
    instances: int = 0
    failures: list = field(default_factory=list)
    lhs_value: CElem | None = None
    rhs_value: CElem | None = None

    @property
    def axioms_hold(self) -> bool:
        return not self.failures

    @property
    def refuted(self) -> bool:
        return self.lhs_value is not None and not self.lhs_value <= self.rhs_value

    @property
    def ok(self) -> bool:
        return self.axioms_hold and self.refuted


# Bodies of fixpoint expressions over parameters x, y; z is the bound variable.
FIX_BODIES = ("1 + x.z", "y + x.z", "1 + z.x", "y + z.x", "x + z.z", "y + x.z.x", "x + z.y.z")


def countermodel_check(generators=GENERATORS) -> CountermodelReport:
    """Check every naive-axiom instance over ``generators`` and evaluate ``a*.a <= a*``."""
    rep = CountermodelReport()
    Q = naive_axioms(TheoryConfig.monoid(("a",)))
    for s in Q.sentences.values():
        names = sorted(variables(s.conclusion[0]) | variables(s.conclusion[1]))
        for vals in itertools.product(generators, repeat=len(names)):
            env = dict(zip(names, vals))
            lhs = _eval(s.conclusion[0], env, "a")
            rhs = _eval(s.conclusion[1], env, "a")
            rep.instances += 1
            if not lhs <= rhs:
                rep.failures.append((s.name, {k: str(v) for k, v in env.items()}))
    for text in FIX_BODIES:
        body = parse_expr(f"mu z. {text}")
        for x, y in itertools.product(generators, repeat=2):
            env = {"x": x, "y": y}
            m = substitute(body, {})
            value = _eval(m, env, "a")
            unfolded = _eval(m.body, {**env, m.var: value}, "a")
            rep.instances += 1
            if not unfolded <= value:
                rep.failures.append(("fix", text, str(x), str(y)))
            for f in generators:
                rep.instances += 1
                pre = _eval(m.body, {**env, m.var: f}, "a")
                if pre <= f and not value <= f:
                    rep.failures.append(("ind", text, str(x), str(y), str(f)))
    rep.lhs_value = countermodel_eval(parse_expr("a*.a"))
    rep.rhs_value = countermodel_eval(parse_expr("a*"))
    return rep
