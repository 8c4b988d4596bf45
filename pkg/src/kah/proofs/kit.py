"""Derivation builders and reusable lemmas.

A :class:`Kit` binds an axiomatisation and a hypothesis list and offers
constructors for the primitive rules, semilattice lemmas, proofs of
E-equalities (by normalising both sides with recorded rewrite steps),
congruence under substitution and a handful of star lemmas.
"""

from __future__ import annotations

from collections import deque

from ..expressions import (
    UNIT, ZERO, Expr, Mu, Plus, RecVar, Sym, Var, Zero, free_recvars, parstar, star, star_body,
    substitute, term_to_expr, variables,
)
from ..theory import PAR, SEQ
from .core import Axiomatisation, Derivation, aeq, canon


class ProofError(Exception):
    """Raised when a builder is asked for a step it cannot justify."""


class Eq:
    """A pair of derivations ``lhs <= rhs`` and ``rhs <= lhs``."""

    __slots__ = ("fwd", "bwd")

    def __init__(self, fwd: Derivation, bwd: Derivation):
        self.fwd = fwd
        self.bwd = bwd

    @property
    def lhs(self) -> Expr:
        return self.fwd.lhs

    @property
    def rhs(self) -> Expr:
        return self.fwd.rhs

    def flip(self) -> Eq:
        return Eq(self.bwd, self.fwd)

    def __repr__(self) -> str:
        return f"Eq({self.lhs} == {self.rhs})"


def _key(e: Expr) -> str:
    return repr(canon(e))


_OPS = {"monoid": {SEQ: False}, "cmonoid": {SEQ: True}, "bimonoid": {SEQ: False, PAR: True}}
_PREFIX = {SEQ: "seq", PAR: "par"}
_STAR_TAG = {SEQ: "star", PAR: "pstar"}


class Kit:
    def __init__(self, Q: Axiomatisation, hypotheses=()):
        self.Q = Q
        self.H = list(hypotheses)
        self.theory = Q.theory
        self.ops = dict(_OPS.get(self.theory.kind, {}))

    # --- primitive rules ------------------------------------------------------

    def refl(self, e: Expr) -> Derivation:
        return Derivation("refl", e, e)

    def trans(self, *ds: Derivation) -> Derivation:
        steps = [d for d in ds if d.rule != "refl"]
        if not steps:
            return ds[0]
        out = steps[0]
        for d in steps[1:]:
            if not aeq(out.rhs, d.lhs):
                raise ProofError(f"cannot chain {out} with {d}")
            out = Derivation("trans", out.lhs, d.rhs, (out, d))
        if not aeq(out.lhs, ds[0].lhs) or not aeq(out.rhs, ds[-1].rhs):
            raise ProofError("reflexivity steps do not match the chain")
        return out

    def plus(self, d1: Derivation, d2: Derivation) -> Derivation:
        if d1.rule == "refl" and d2.rule == "refl":
            return self.refl(Plus(d1.lhs, d2.lhs))
        return Derivation("plus", Plus(d1.lhs, d2.lhs), Plus(d1.rhs, d2.rhs), (d1, d2))

    def sym(self, name: str, ds) -> Derivation:
        ds = tuple(ds)
        lhs = Sym(name, tuple(d.lhs for d in ds))
        if all(d.rule == "refl" for d in ds):
            return self.refl(lhs)
        return Derivation("sym", lhs, Sym(name, tuple(d.rhs for d in ds)), ds, symbol=name)

    def axiom(self, name: str, theta: dict | None = None, premises=(), params=()) -> Derivation:
        s = self.Q.instantiate(name, tuple(params))
        theta = dict(theta or {})
        lhs = substitute(s.conclusion[0], theta)
        rhs = substitute(s.conclusion[1], theta)
        premises = tuple(premises)
        for p, (e, f) in zip(premises, s.premises):
            if not (aeq(p.lhs, substitute(e, theta)) and aeq(p.rhs, substitute(f, theta))):
                raise ProofError(f"premise {p} does not fit axiom {name}")
        return Derivation("axiom", lhs, rhs, premises, axiom=name,
                          theta=tuple(sorted(theta.items())), params=tuple(params))

    def hyp(self, e: Expr, f: Expr) -> Derivation:
        for i, (he, hf) in enumerate(self.H):
            if aeq(he, e) and aeq(hf, f):
                return Derivation("hyp", he, hf, index=i)
        raise ProofError(f"{e} <= {f} is not a hypothesis")

    def hyp_at(self, i: int) -> Derivation:
        e, f = self.H[i]
        return Derivation("hyp", e, f, index=i)

    # --- semilattice ----------------------------------------------------------

    def inl(self, x: Expr, y: Expr) -> Derivation:
        return self.axiom("inl", {"x": x, "y": y})

    def inr(self, x: Expr, y: Expr) -> Derivation:
        return self.axiom("inr", {"x": x, "y": y})

    def zero_le(self, x: Expr) -> Derivation:
        return self.axiom("zero", {"x": x})

    def idem(self, x: Expr) -> Derivation:
        return self.axiom("idem", {"x": x})

    def join(self, d1: Derivation, d2: Derivation) -> Derivation:
        """From ``p <= r`` and ``q <= r`` derive ``p + q <= r``."""
        if not aeq(d1.rhs, d2.rhs):
            raise ProofError(f"join needs a common upper bound: {d1.rhs} vs {d2.rhs}")
        return self.trans(self.plus(d1, d2), self.idem(d1.rhs))

    def summand_le(self, tree: Expr, leaf: Expr) -> Derivation:
        """``leaf <= tree`` for a summand of the sum tree ``tree``."""
        path = _find_summand(tree, leaf)
        if path is None:
            raise ProofError(f"{leaf} is not a summand of {tree}")
        return self._summand_path(tree, path)

    def _summand_path(self, tree: Expr, path) -> Derivation:
        if not path:
            return self.refl(tree)
        side, rest = path[0], path[1:]
        if side == 0:
            return self.trans(self._summand_path(tree.left, rest), self.inl(tree.left, tree.right))
        return self.trans(self._summand_path(tree.right, rest), self.inr(tree.left, tree.right))

    def leq_sum(self, tree: Expr, target: Expr, leaf_fn) -> Derivation:
        """``tree <= target`` by joining ``leaf_fn(leaf)`` over the summands of ``tree``."""
        if isinstance(tree, Plus):
            return self.join(self.leq_sum(tree.left, target, leaf_fn), self.leq_sum(tree.right, target, leaf_fn))
        if isinstance(tree, Zero):
            return self.zero_le(target)
        d = leaf_fn(tree)
        if not (aeq(d.lhs, tree) and aeq(d.rhs, target)):
            raise ProofError(f"leaf proof {d} does not fit {tree} <= {target}")
        return d

    def sum_le(self, small: Expr, big: Expr) -> Derivation:
        """Every summand of ``small`` is a summand of ``big``."""
        return self.leq_sum(small, big, lambda leaf: self.summand_le(big, leaf))

    def cong_arg(self, e: Sym, i: int, d: Derivation) -> Derivation:
        ds = [self.refl(a) for a in e.args]
        ds[i] = d
        return self.sym(e.name, ds)

    # --- equalities -----------------------------------------------------------

    def eq_refl(self, e: Expr) -> Eq:
        r = self.refl(e)
        return Eq(r, r)

    def eq_trans(self, *eqs: Eq) -> Eq:
        return Eq(self.trans(*(q.fwd for q in eqs)), self.trans(*(q.bwd for q in reversed(eqs))))

    def eq_sym(self, name: str, eqs) -> Eq:
        eqs = list(eqs)
        return Eq(self.sym(name, [q.fwd for q in eqs]), self.sym(name, [q.bwd for q in eqs]))

    def eq_plus(self, q1: Eq, q2: Eq) -> Eq:
        return Eq(self.plus(q1.fwd, q2.fwd), self.plus(q1.bwd, q2.bwd))

    def eq_arg(self, e: Sym, i: int, q: Eq) -> Eq:
        return Eq(self.cong_arg(e, i, q.fwd), self.cong_arg(e, i, q.bwd))

    def law(self, name: str, theta: dict) -> Eq:
        """An equation of E as a pair of axiom instances."""
        return Eq(self.axiom(name, theta), self.axiom(f"{name}-rev", theta))

    def antisym(self, fwd: Derivation, bwd: Derivation) -> Eq:
        if not (aeq(fwd.lhs, bwd.rhs) and aeq(fwd.rhs, bwd.lhs)):
            raise ProofError("derivations do not form an equality")
        return Eq(fwd, bwd)

    # --- E-normalisation --------------------------------------------------------

    def enorm(self, e: Expr) -> Eq:
        """``e == n`` where ``n`` is the E-normal form of ``e`` (units dropped, chains left-nested, commutative chains sorted)."""
        if isinstance(e, Sym) and e.name in self.ops and len(e.args) == 2:
            ql, qr = self.enorm(e.args[0]), self.enorm(e.args[1])
            q1 = self.eq_sym(e.name, [ql, qr])
            return self.eq_trans(q1, self._merge(e.name, ql.rhs, qr.rhs))
        if isinstance(e, Sym) and e.args:
            return self.eq_sym(e.name, [self.enorm(a) for a in e.args])
        return self.eq_refl(e)

    def _unit_r(self, op: str, x: Expr) -> Eq:
        return self.law(f"{_PREFIX[op]}-unit-r", {"x": x})

    def _assoc(self, op: str, x, y, z) -> Eq:
        """``x op (y op z) == (x op y) op z``."""
        return self.law(f"{_PREFIX[op]}-assoc", {"x": x, "y": y, "z": z})

    def _comm(self, op: str, x, y) -> Eq:
        return self.law(f"{_PREFIX[op]}-comm", {"x": x, "y": y})

    def _merge(self, op: str, nl: Expr, nr: Expr) -> Eq:
        """``op(nl, nr) == n`` for normal ``nl`` and ``nr``."""
        here = Sym(op, (nl, nr))
        if nr == UNIT:
            return self._unit_r(op, nl)
        if nl == UNIT:
            if op == SEQ:
                return self.law("seq-unit-l", {"x": nr})
            return self.eq_trans(self._comm(op, nl, nr), self._unit_r(op, nr))
        if isinstance(nr, Sym) and nr.name == op:
            r1, r2 = nr.args
            q1 = self._assoc(op, nl, r1, r2)
            m = self._merge(op, nl, r1)
            q2 = self.eq_arg(q1.rhs, 0, m)
            return self.eq_trans(q1, q2, self._merge(op, m.rhs, r2))
        if not self.ops[op]:
            return self.eq_refl(here)
        return self._insert(op, nl, nr)

    def _insert(self, op: str, chain: Expr, y: Expr) -> Eq:
        """Insert the element ``y`` into the sorted chain ``chain`` of a commutative operator."""
        here = Sym(op, (chain, y))
        if isinstance(chain, Sym) and chain.name == op:
            p, x = chain.args
            if _key(x) <= _key(y):
                return self.eq_refl(here)
            q1 = self._assoc(op, p, x, y).flip()
            q2 = self.eq_arg(q1.rhs, 1, self._comm(op, x, y))
            q3 = self._assoc(op, p, y, x)
            m = self._insert(op, p, y) if isinstance(p, Sym) and p.name == op else self._pair(op, p, y)
            q4 = self.eq_arg(q3.rhs, 0, m)
            return self.eq_trans(q1, q2, q3, q4)
        return self._pair(op, chain, y)

    def _pair(self, op: str, x: Expr, y: Expr) -> Eq:
        if _key(x) <= _key(y):
            return self.eq_refl(Sym(op, (x, y)))
        return self._comm(op, x, y)

    def eeq(self, e1: Expr, e2: Expr) -> Eq:
        """``e1 == e2`` for E-equal expressions, via normal forms or a bounded rewrite search."""
        if aeq(e1, e2):
            return self.eq_refl(e1)
        if self.theory.kind == "custom":
            return self._search_eq(e1, e2)
        q1, q2 = self.enorm(e1), self.enorm(e2)
        if not aeq(q1.rhs, q2.rhs):
            raise ProofError(f"{e1} and {e2} are not E-equal")
        return self.eq_trans(q1, q2.flip())

    def _search_eq(self, e1: Expr, e2: Expr, limit: int = 20000) -> Eq:
        """Breadth-first search over single law applications at any position."""
        laws = [(name, term_to_expr(u), term_to_expr(v)) for name, u, v in self.theory.laws]
        start, goal = canon(e1), canon(e2)
        prev = {start: None}
        queue = deque([start])
        while queue and len(prev) < limit:
            cur = queue.popleft()
            if cur == goal:
                break
            for step in self._rewrites(cur, laws):
                if step.rhs not in prev:
                    prev[step.rhs] = (cur, step)
                    queue.append(step.rhs)
        if goal not in prev:
            raise ProofError(f"no rewrite path from {e1} to {e2} within {limit} terms")
        steps = []
        node = goal
        while prev[node] is not None:
            node, step = prev[node]
            steps.append(step)
        steps.reverse()
        if not steps:
            return self.eq_refl(e1)
        return self.eq_trans(*steps)

    def _rewrites(self, e: Expr, laws):
        for name, u, v in laws:
            for lhs, rhs, label in ((u, v, name), (v, u, f"{name}-rev")):
                theta = _match(lhs, e, {})
                if theta is not None and variables(rhs) <= set(theta):
                    fwd = self.axiom(label, theta)
                    back = label[:-4] if label.endswith("-rev") else f"{label}-rev"
                    yield Eq(fwd, self.axiom(back, theta))
        if isinstance(e, Sym):
            for i, a in enumerate(e.args):
                for q in self._rewrites(a, laws):
                    yield self.eq_arg(e, i, q)

    # --- congruence -----------------------------------------------------------

    def cong(self, e: Expr, rho: dict) -> Derivation:
        """``e[lhs of rho] <= e[rhs of rho]`` for a map from names to derivations."""
        moving = {k for k, d in rho.items() if d.rule != "refl"}
        left = {k: d.lhs for k, d in rho.items()}
        if not (moving & (variables(e) | free_recvars(e))):
            return self.refl(substitute(e, left))
        if isinstance(e, (Var, RecVar)):
            return rho[e.name]
        if isinstance(e, Plus):
            return self.plus(self.cong(e.left, rho), self.cong(e.right, rho))
        if isinstance(e, Sym):
            return self.sym(e.name, [self.cong(a, rho) for a in e.args])
        if isinstance(e, Mu):
            return self._mu_mono(e, rho)
        raise ProofError(f"cannot take congruence through {e}")

    def cong_eq(self, e: Expr, rho: dict) -> Eq:
        return Eq(self.cong(e, {k: q.fwd for k, q in rho.items()}),
                  self.cong(e, {k: q.bwd for k, q in rho.items()}))

    def _mu_mono(self, m: Mu, rho: dict) -> Derivation:
        inner = {k: d for k, d in rho.items() if k != m.var}
        big = substitute(m, {k: d.lhs for k, d in inner.items()})
        big2 = substitute(m, {k: d.rhs for k, d in inner.items()})
        if "ind" in self.Q.schemas:
            step = self.cong(m.body, {**inner, m.var: self.refl(big2)})
            prem = self.trans(step, self.fix(big2))
            return self.axiom("ind", premises=(prem,), params=(big, big2))
        for op in (SEQ, PAR):
            g = star_body(m, op)
            if g is not None and f"{_STAR_TAG[op]}-ind-l" in self.Q:
                return self.star_mono(op, self.cong(g, inner))
        raise ProofError(f"no monotonicity principle for {m}")

    # --- fixpoints and stars ----------------------------------------------------

    def fix(self, m: Mu) -> Derivation:
        """``unfold(m) <= m``; star unfolding stands in when the schema is absent."""
        if "fix" in self.Q.schemas:
            return self.axiom("fix", params=(m,))
        for op in (SEQ, PAR):
            g = star_body(m, op)
            if g is not None and f"{_STAR_TAG[op]}-unfold-l" in self.Q:
                return self.unfold_l(op, g)
        raise ProofError(f"no unfolding principle for {m}")

    def ind(self, m: Mu, premise: Derivation) -> Derivation:
        return self.axiom("ind", premises=(premise,), params=(m, premise.rhs))

    def mk_star(self, op: str, x: Expr) -> Mu:
        return star(x) if op == SEQ else parstar(x)

    def unfold_l(self, op: str, x: Expr) -> Derivation:
        """``1 + x op x* <= x*``."""
        return self.axiom(f"{_STAR_TAG[op]}-unfold-l", {"x": x})

    def ind_l(self, op: str, x: Expr, z: Expr, premise: Derivation) -> Derivation:
        """From ``z + x op y <= y`` derive ``x* op z <= y``."""
        return self.axiom(f"{_STAR_TAG[op]}-ind-l", {"x": x, "y": premise.rhs, "z": z}, (premise,))

    def ind_r(self, op: str, x: Expr, z: Expr, premise: Derivation) -> Derivation:
        """From ``z + y op x <= y`` derive ``z op x* <= y``."""
        return self.axiom(f"{_STAR_TAG[op]}-ind-r", {"x": x, "y": premise.rhs, "z": z}, (premise,))

    def unit_r_rev(self, op: str, x: Expr) -> Derivation:
        """``x <= x op 1``."""
        return self.axiom(f"{_PREFIX[op]}-unit-r-rev", {"x": x})

    def one_le_star(self, op: str, x: Expr) -> Derivation:
        s = self.mk_star(op, x)
        return self.trans(self.inl(UNIT, Sym(op, (x, s))), self.unfold_l(op, x))

    def step_le_star(self, op: str, x: Expr) -> Derivation:
        """``x op x* <= x*``."""
        s = self.mk_star(op, x)
        return self.trans(self.inr(UNIT, Sym(op, (x, s))), self.unfold_l(op, x))

    def le_star(self, op: str, x: Expr) -> Derivation:
        """``x <= x*``."""
        return self.trans(self.unit_r_rev(op, x), self.cong_arg(Sym(op, (x, UNIT)), 1, self.one_le_star(op, x)),
                          self.step_le_star(op, x))

    def star_mono(self, op: str, d: Derivation) -> Derivation:
        """From ``x <= y`` derive ``x* <= y*``."""
        x, y = d.lhs, d.rhs
        sy = self.mk_star(op, y)
        prem = self.trans(self.plus(self.refl(UNIT), self.sym(op, [d, self.refl(sy)])), self.unfold_l(op, y))
        body = self.ind_l(op, x, UNIT, prem)
        return self.trans(self.unit_r_rev(op, body.lhs.args[0]), body)

    def star_star_le(self, op: str, x: Expr) -> Derivation:
        """``x* op x* <= x*``."""
        s = self.mk_star(op, x)
        prem = self.join(self.refl(s), self.step_le_star(op, x))
        return self.ind_l(op, x, s, prem)

    def star_eq_ind(self, op: str, x: Expr, y: Expr, prem: Derivation) -> Derivation:
        """From ``1 + x op y <= y`` derive ``x* <= y``."""
        body = self.ind_l(op, x, UNIT, prem)
        return self.trans(self.unit_r_rev(op, body.lhs.args[0]), body)


def _find_summand(tree: Expr, leaf: Expr):
    if aeq(tree, leaf):
        return ()
    if isinstance(tree, Plus):
        p = _find_summand(tree.left, leaf)
        if p is not None:
            return (0,) + p
        p = _find_summand(tree.right, leaf)
        if p is not None:
            return (1,) + p
    return None


def _match(pattern: Expr, e: Expr, theta: dict):
    """First-order matching of a law side against an expression."""
    if isinstance(pattern, Var):
        if pattern.name in theta:
            return theta if aeq(theta[pattern.name], e) else None
        return {**theta, pattern.name: e}
    if isinstance(pattern, Sym) and isinstance(e, Sym) and pattern.name == e.name and len(pattern.args) == len(e.args):
        for p, a in zip(pattern.args, e.args):
            theta = _match(p, a, theta)
            if theta is None:
                return None
        return theta
    return None


def sum_expr(parts) -> Expr:
    """Right-nested sum of ``parts``; the empty sum is 0."""
    parts = list(parts)
    if not parts:
        return ZERO
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Plus(p, out)
    return out


def summands(e: Expr) -> list:
    if isinstance(e, Plus):
        return summands(e.left) + summands(e.right)
    if isinstance(e, Zero):
        return []
    return [e]
