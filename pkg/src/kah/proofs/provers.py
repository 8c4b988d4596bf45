"""Derivation generators over the naive axiomatisation.

``prove_membership`` follows the least-fixpoint approximants: an atom first
appearing at stage ``k`` of ``mu x. g`` is proven below ``g`` with ``x``
read as stage ``k - 1`` and then folded with the fixpoint axiom.
``sum_of_terms`` expands a fixpoint-free expression with distribution and
annihilation.  ``prove_inclusion_fixpointfree`` saturates the set of atoms
provably below the right-hand side, remembering how each atom got there.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

from ..expressions import (
    Expr, Fragment, Mu, Plus, RecVar, Sym, Var, Zero, atom_expr, expr_to_term, free_recvars, leaf_count, subexpressions,
    substitute, term_to_expr,
)
from ..semantics import _Evaluator, finite_within, lang_bounded
from ..theory import HOLE, TheoryConfig
from .core import Axiomatisation, Derivation, canon, naive_axioms
from .kit import Kit, ProofError, sum_expr

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


class NotAMember(ValueError):
    """The atom is not in the language of the expression."""


@dataclass(frozen=True)
class NotFound:
    """Proof search gave up after exhausting atoms up to ``bound``."""

    bound: int
    reason: str = ""

    def __bool__(self) -> bool:
        return False


def _has_mu(e: Expr) -> bool:
    return any(isinstance(s, Mu) for s in subexpressions(e))


def _additive(theory: TheoryConfig):
    return {"monoid": 0, "cmonoid": 0, "bimonoid": 0, "free": 1}.get(theory.kind)


class MembershipProver:
    """Proves ``a <= e`` for atoms ``a`` of the standard interpretation of ``e``."""

    def __init__(self, theory: TheoryConfig, Q: Axiomatisation | None = None, hypotheses=()):
        self.theory = theory
        self.kit = Kit(Q or naive_axioms(theory, Fragment.FULL), hypotheses)
        self._memo: dict = {}
        self._stages: dict = {}
        self._evals: dict = {}

    def _ev(self, n: int) -> _Evaluator:
        if n not in self._evals:
            self._evals[n] = _Evaluator(self.theory, n, "size")
        return self._evals[n]

    def prove(self, a, e: Expr) -> Derivation:
        if free_recvars(e):
            raise ValueError("membership proofs need a closed expression")
        ev = self._ev(self.theory.size(a))
        if a not in ev.run(e, {}):
            raise NotAMember(f"{self.theory.show(a)} is not in the language of {e}")
        return self._prove(a, e, {}, {}, {}, ev)

    def _prove(self, a, g: Expr, sigma: dict, env: dict, binders: dict, ev: _Evaluator) -> Derivation:
        kit = self.kit
        if isinstance(g, RecVar):
            mu, sig0, env0 = binders[g.name]
            return self._prove_mu(a, mu, sig0, env0, binders, ev)
        closed = substitute(g, sigma)
        key = (a, canon(closed))
        if key in self._memo:
            return self._memo[key]
        if isinstance(g, Var):
            d = kit.eeq(atom_expr(self.theory, a), g).fwd
        elif isinstance(g, Plus):
            if a in ev.run(g.left, env):
                d = kit.trans(self._prove(a, g.left, sigma, env, binders, ev),
                              kit.inl(substitute(g.left, sigma), substitute(g.right, sigma)))
            else:
                d = kit.trans(self._prove(a, g.right, sigma, env, binders, ev),
                              kit.inr(substitute(g.left, sigma), substitute(g.right, sigma)))
        elif isinstance(g, Sym):
            kids = self._decompose(a, g, env, ev)
            ds = [self._prove(b, arg, sigma, env, binders, ev) for b, arg in zip(kids, g.args)]
            middle = Sym(g.name, tuple(d.lhs for d in ds))
            d = kit.trans(kit.eeq(atom_expr(self.theory, a), middle).fwd, kit.sym(g.name, ds))
        elif isinstance(g, Mu):
            d = self._prove_mu(a, g, sigma, env, binders, ev)
        else:
            raise NotAMember(f"{self.theory.show(a)} is not in the language of {closed}")
        self._memo[key] = d
        return d

    def _approximants(self, mu: Mu, env: dict, ev: _Evaluator) -> list:
        free = sorted(free_recvars(mu))
        key = (ev.bound, canon(mu), tuple((k, env[k]) for k in free))
        if key not in self._stages:
            stages = [frozenset()]
            while True:
                nxt = ev.run(mu.body, {**env, mu.var: stages[-1]})
                if nxt == stages[-1]:
                    break
                stages.append(nxt)
            self._stages[key] = stages
        return self._stages[key]

    def _prove_mu(self, a, mu: Mu, sigma: dict, env: dict, binders: dict, ev: _Evaluator) -> Derivation:
        stages = self._approximants(mu, env, ev)
        k = next((i for i, s in enumerate(stages) if a in s), None)
        if k is None:
            raise NotAMember(f"{self.theory.show(a)} is not in the language of {substitute(mu, sigma)}")
        closed = substitute(mu, sigma)
        inner_binders = {**binders, mu.var: (mu, sigma, env)}
        d = self._prove(a, mu.body, {**sigma, mu.var: closed}, {**env, mu.var: stages[k - 1]}, inner_binders, ev)
        return self.kit.trans(d, self.kit.fix(closed))

    def _decompose(self, a, g: Sym, env: dict, ev: _Evaluator) -> tuple:
        """Atoms ``b_i`` of the arguments with ``g.name(b_1, ..., b_n) = a``."""
        t = self.theory
        langs = [sorted(ev.run(arg, env), key=t.atom_key) for arg in g.args]
        extra = _additive(t)
        budget = None if extra is None else t.size(a) - extra
        picked: list = []

        def go(i: int, used: int):
            if i == len(langs):
                if t.apply_symbol(g.name, picked) == a:
                    return tuple(picked)
                return None
            for b in langs[i]:
                sz = t.size(b)
                if budget is not None and used + sz > budget:
                    break
                picked.append(b)
                found = go(i + 1, used + sz)
                picked.pop()
                if found is not None:
                    return found
            return None

        found = go(0, 0)
        if found is None:
            raise NotAMember(f"{t.show(a)} has no decomposition along {g}")
        return found


def prove_membership(a, e: Expr, theory: TheoryConfig, Q: Axiomatisation | None = None) -> Derivation:
    """A derivation of ``a <= e`` over the naive axioms (or ``Q``)."""
    return MembershipProver(theory, Q).prove(a, e)


# --- sums of terms ------------------------------------------------------------

def expand(kit: Kit, e: Expr) -> Derivation:
    """``e <= T`` where ``T`` is a sum tree whose leaves are sum-free terms."""
    if isinstance(e, (Var, Zero)) or (isinstance(e, Sym) and not e.args):
        return kit.refl(e)
    if isinstance(e, Plus):
        return kit.plus(expand(kit, e.left), expand(kit, e.right))
    if isinstance(e, Sym):
        ds = [expand(kit, a) for a in e.args]
        first = kit.sym(e.name, ds)
        return kit.trans(first, distribute(kit, e.name, [d.rhs for d in ds]))
    raise ProofError(f"cannot expand {e}: not fixpoint-free")


def distribute(kit: Kit, name: str, args: list) -> Derivation:
    """``name(T_1, ..., T_n) <= T`` pushing the symbol through sums and zeros."""
    here = Sym(name, tuple(args))
    for i, arg in enumerate(args):
        if not isinstance(arg, (Plus, Zero)):
            continue
        theta = {f"x{j + 1}": a for j, a in enumerate(args) if j != i}
        if isinstance(arg, Zero):
            return kit.axiom(f"annih[{name},{i + 1}]", theta)
        step = kit.axiom(f"dist[{name},{i + 1}]", {**theta, "y": arg.left, "y'": arg.right})
        left = distribute(kit, name, args[:i] + [arg.left] + args[i + 1:])
        right = distribute(kit, name, args[:i] + [arg.right] + args[i + 1:])
        return kit.trans(step, kit.plus(left, right))
    return kit.refl(here)


def _leaf_atom(theory: TheoryConfig, leaf: Expr):
    t = expr_to_term(leaf)
    if t is None:
        raise ProofError(f"{leaf} is not a term")
    return theory.normalize(t)


def sum_of_terms(e: Expr, theory: TheoryConfig, Q: Axiomatisation | None = None):
    """The finite language of a fixpoint-free ``e`` and an equality ``e == sum of its atoms``."""
    if _has_mu(e):
        raise ValueError("sum_of_terms expects a fixpoint-free expression")
    prover = MembershipProver(theory, Q)
    kit = prover.kit
    up = expand(kit, e)
    atoms = sorted({_leaf_atom(theory, leaf) for leaf in _leaves(up.rhs)}, key=theory.atom_key)
    total = sum_expr([atom_expr(theory, a) for a in atoms])

    def leaf_up(leaf):
        a = _leaf_atom(theory, leaf)
        return kit.trans(kit.eeq(leaf, atom_expr(theory, a)).fwd, kit.summand_le(total, atom_expr(theory, a)))

    fwd = kit.trans(up, kit.leq_sum(up.rhs, total, leaf_up))
    bwd = kit.leq_sum(total, e, lambda leaf: prover.prove(_leaf_atom(theory, leaf), e))
    return atoms, kit.antisym(fwd, bwd)


def _leaves(tree: Expr) -> list:
    if isinstance(tree, Plus):
        return _leaves(tree.left) + _leaves(tree.right)
    if isinstance(tree, Zero):
        return []
    return [tree]


# --- inclusion under hypotheses -------------------------------------------------

class InclusionProver:
    """Saturates ``{a | a <= f derivable}`` below a bound with provenance."""

    def __init__(self, theory: TheoryConfig, hypotheses, bound: int, Q: Axiomatisation | None = None):
        self.theory = theory
        self.H = list(hypotheses)
        for _, rhs in self.H:
            if _has_mu(rhs):
                raise ValueError("hypothesis right-hand sides must be fixpoint-free")
        self.bound = bound
        self.members = MembershipProver(theory, Q, self.H)
        self.kit = self.members.kit
        self._lhs = [lang_bounded(lhs, theory, bound).atoms for lhs, _ in self.H]
        self._rhs = [sorted(lang_bounded(rhs, theory, bound).atoms, key=theory.atom_key) for _, rhs in self.H]
        self._exact = [finite_within(rhs, theory, bound) for _, rhs in self.H]
        self._proofs: dict = {}

    def saturate(self, f: Expr, goals=()) -> dict:
        t = self.theory
        found = {a: ("member",) for a in lang_bounded(f, t, self.bound).atoms}
        todo = list(found)

        def add(v, why):
            if v not in found and t.size(v) <= self.bound:
                found[v] = why
                todo.append(v)

        for i, rhs in enumerate(self._rhs):
            if self._exact[i] and not rhs:
                for u in t.enumerate_atoms(self.bound):
                    for a in sorted(self._lhs[i], key=t.atom_key):
                        for c in t.split(u, a):
                            add(u, ("hyp", i, c, a))
        goals = set(goals)
        while todo and not goals <= set(found):
            u = todo.pop(0)
            for i, rhs in enumerate(self._rhs):
                if not self._exact[i] or not rhs:
                    continue
                for b in rhs:
                    for c in t.split(u, b):
                        if all(t.apply_context(c, b2) in found for b2 in rhs):
                            for a in sorted(self._lhs[i], key=t.atom_key):
                                add(t.apply_context(c, a), ("hyp", i, c, a))
        return found

    def proof_of(self, u, f: Expr, found: dict) -> Derivation:
        """``u <= f`` for a saturated atom ``u``."""
        if u in self._proofs:
            return self._proofs[u]
        t, kit = self.theory, self.kit
        why = found[u]
        if why[0] == "member":
            d = self.members.prove(u, f)
        else:
            _, i, c, a = why
            lhs, rhs = self.H[i]
            ctx = term_to_expr(t.context_term(c))

            def plug(x):
                return substitute(ctx, {HOLE: x})

            d0 = kit.eeq(atom_expr(t, u), plug(atom_expr(t, a))).fwd
            d1 = kit.cong(ctx, {HOLE: self.members.prove(a, lhs)})
            d2 = kit.cong(ctx, {HOLE: kit.hyp_at(i)})
            d3 = expand(kit, plug(rhs))

            def leaf_up(leaf):
                b = _leaf_atom(t, leaf)
                return kit.trans(kit.eeq(leaf, atom_expr(t, b)).fwd, self.proof_of(b, f, found))

            d = kit.trans(d0, d1, d2, d3, kit.leq_sum(d3.rhs, f, leaf_up))
        self._proofs[u] = d
        return d


def prove_inclusion_fixpointfree(e: Expr, f: Expr, hypotheses, theory: TheoryConfig, bound: int | None = None,
                                 Q: Axiomatisation | None = None):
    """A derivation of ``e <= f`` from the naive axioms and ``hypotheses``, or :class:`NotFound`.

    The default bound is the largest atom of ``e`` plus the leaf counts of all
    hypothesis right-hand sides.
    """
    if _has_mu(e):
        raise ValueError("the left-hand side must be fixpoint-free")
    hypotheses = list(hypotheses)
    if bound is None:
        top = max((theory.size(a) for a in lang_bounded(e, theory, max(1, _term_bound(e))).atoms), default=0)
        bound = top + sum(leaf_count(rhs) for _, rhs in hypotheses)
    prover = InclusionProver(theory, hypotheses, bound, Q)
    kit = prover.kit
    up = expand(kit, e)
    goals = [_leaf_atom(theory, leaf) for leaf in _leaves(up.rhs)]
    if any(theory.size(g) > bound for g in goals):
        return NotFound(bound, "left-hand side has atoms above the bound")
    found = prover.saturate(f, goals)
    missing = [g for g in goals if g not in found]
    if missing:
        return NotFound(bound, f"{theory.show(missing[0])} is not derivably below the right-hand side")

    def leaf_up(leaf):
        b = _leaf_atom(theory, leaf)
        return kit.trans(kit.eeq(leaf, atom_expr(theory, b)).fwd, prover.proof_of(b, f, found))

    return kit.trans(up, kit.leq_sum(up.rhs, f, leaf_up))


def _term_bound(e: Expr) -> int:
    """An upper bound on atom sizes of a fixpoint-free expression."""
    return sum(1 for s in subexpressions(e) if isinstance(s, (Var, Sym)))
