"""Concrete reductions for words, series-parallel terms, trees and multisets."""

from __future__ import annotations

from ..expressions import (
    UNIT, ZERO, Expr, Mu, Plus, RecVar, Sym, Var, fresh_name, par, parstar, plus, seq, star, substitute,
)
from ..proofs.core import instance_axioms, naive_axioms
from ..proofs.kit import Eq, Kit
from ..theory import PAR, SEQ, TheoryConfig
from .core import BoundConfig, Representation, ReductionWitness, homomorphic_reduction


def _vars(variables) -> tuple:
    return tuple(variables) or ("a", "b")


def _transitive(qname: str, op: str, variables, extra, cfg) -> ReductionWitness:
    Q = instance_axioms(qname, _vars(variables))
    a = Var("a")
    if "a" not in Q.theory.variables:
        raise ValueError("the transitive reductions act on the variable a")
    mul = seq if op == SEQ else par
    src = Representation(Q, [(mul(a, a), a)] + list(extra))
    tgt = Representation(Q, list(extra))
    image = mul(a, star(a) if op == SEQ else parstar(a))
    name = {("KA", SEQ): "ka_transitive", ("biKA", SEQ): "bika_seq_transitive",
            ("biKA", PAR): "bika_par_transitive"}[qname, op]
    return homomorphic_reduction({"a": image}, src, tgt, cfg, name=name)


def ka_transitive(variables=("a", "b"), extra=(), cfg: BoundConfig | None = None) -> ReductionWitness:
    """``{a.a <= a}`` to nothing over KA by ``a -> a.a*``."""
    return _transitive("KA", SEQ, variables, extra, cfg)


def bika_seq_transitive(variables=("a", "b"), extra=(), cfg: BoundConfig | None = None) -> ReductionWitness:
    return _transitive("biKA", SEQ, variables, extra, cfg)


def bika_par_transitive(variables=("a", "b"), extra=(), cfg: BoundConfig | None = None) -> ReductionWitness:
    """``{a||a <= a}`` to nothing over biKA by ``a -> a||a^||``."""
    return _transitive("biKA", PAR, variables, extra, cfg)


# --- trees ------------------------------------------------------------------------

def _require_finite(theory: TheoryConfig) -> None:
    if not theory.variables:
        raise ValueError("an expression for all atoms needs a finite, non-empty variable set")


def tree_top(theory: TheoryConfig) -> Mu:
    """An expression denoting every tree over the signature and variables."""
    _require_finite(theory)
    y = fresh_name()
    parts = [Var(x) for x in theory.variables]
    parts += [Sym(s, (RecVar(y),) * n) for s, n in sorted(theory.signature.symbols)]
    return Mu(y, plus(*parts))


def tree_above(theory: TheoryConfig, e0: Expr) -> Mu:
    """``e0^T``: every tree with a subtree from ``e0``."""
    top = tree_top(theory)
    z = fresh_name()
    steps = []
    for s, n in sorted(theory.signature.symbols):
        for i in range(n):
            args = [top] * n
            args[i] = RecVar(z)
            steps.append(Sym(s, tuple(args)))
    body = Plus(e0, plus(*steps)) if steps else e0
    return Mu(z, body)


def tree_hoare_zero(theory: TheoryConfig, e0: Expr, extra=()) -> ReductionWitness:
    """``{e0 <= 0}`` to nothing over the naive axioms by ``e -> e + e0^T``."""
    if theory.kind != "free":
        raise ValueError("tree_hoare_zero needs a free theory")
    Q = naive_axioms(theory)
    src = Representation(Q, [(e0, ZERO)] + list(extra))
    tgt = Representation(Q, list(extra))
    kit = Kit(Q, src.hypotheses)
    above = tree_above(theory, e0)
    at_zero = substitute(above.body, {above.var: ZERO})

    def annihilate(leaf: Expr):
        i = next(k for k, a in enumerate(leaf.args) if a == ZERO)
        theta = {f"x{k + 1}": a for k, a in enumerate(leaf.args) if k != i}
        return kit.axiom(f"annih[{leaf.name},{i + 1}]", theta)

    if isinstance(at_zero, Plus) and at_zero.left == e0:
        prem = kit.join(kit.hyp(e0, ZERO), kit.leq_sum(at_zero.right, ZERO, annihilate))
    else:
        prem = kit.hyp(e0, ZERO)
    above_zero = kit.ind(above, prem)

    def r(e: Expr) -> Expr:
        return Plus(e, above)

    def prove(e: Expr) -> Eq:
        down = kit.join(kit.refl(e), kit.trans(above_zero, kit.zero_le(e)))
        return Eq(down, kit.inl(e, above))

    return ReductionWitness("tree_hoare_zero", src, tgt, r, prove, measure="depth")


# --- commutative Kleene algebra ---------------------------------------------------------

def cka_top(variables) -> Mu:
    return star(plus(*(Var(x) for x in variables)))


def cka_hoare_zero(e0: Expr, variables=("a", "b"), extra=()) -> ReductionWitness:
    """``{e0 <= 0}`` to nothing over cKA by ``e -> e + e0.T``."""
    Q = instance_axioms("cKA", _vars(variables))
    src = Representation(Q, [(e0, ZERO)] + list(extra))
    tgt = Representation(Q, list(extra))
    kit = Kit(Q, src.hypotheses)
    top = cka_top(Q.theory.variables)
    shadow = seq(e0, top)
    shadow_zero = kit.trans(kit.cong_arg(shadow, 0, kit.hyp(e0, ZERO)), kit.axiom(f"annih[{SEQ},1]", {"x2": top}))

    def r(e: Expr) -> Expr:
        return Plus(e, shadow)

    def prove(e: Expr) -> Eq:
        down = kit.join(kit.refl(e), kit.trans(shadow_zero, kit.zero_le(e)))
        return Eq(down, kit.inl(e, shadow))

    return ReductionWitness("cka_hoare_zero", src, tgt, r, prove)


def cka_leq_one(e1: Expr, variables=("a", "b"), extra=()) -> ReductionWitness:
    """``{e1 <= 1}`` to nothing over cKA by ``e -> e.e1*``."""
    Q = instance_axioms("cKA", _vars(variables))
    src = Representation(Q, [(e1, UNIT)] + list(extra))
    tgt = Representation(Q, list(extra))
    kit = Kit(Q, src.hypotheses)
    s = star(e1)
    prem = kit.join(kit.refl(UNIT), kit.trans(kit.law("seq-unit-r", {"x": e1}).fwd, kit.hyp(e1, UNIT)))
    star_one = kit.star_eq_ind(SEQ, e1, UNIT, prem)

    def r(e: Expr) -> Expr:
        return seq(e, s)

    def prove(e: Expr) -> Eq:
        down = kit.trans(kit.cong_arg(seq(e, s), 1, star_one), kit.law("seq-unit-r", {"x": e}).fwd)
        up = kit.trans(kit.unit_r_rev(SEQ, e), kit.cong_arg(seq(e, UNIT), 1, kit.one_le_star(SEQ, e1)))
        return Eq(down, up)

    return ReductionWitness("cka_leq_one", src, tgt, r, prove)


def cka_expand(variables=("a", "b"), extra=(), atom: str = "a") -> ReductionWitness:
    """``{a <= a.a}`` to nothing over cKA via Pilling normal forms."""
    from .cka_proofs import expand_witness

    return expand_witness(_vars(variables), list(extra), atom)


def catalog() -> dict:
    """Builders by name."""
    return {
        "ka_transitive": ka_transitive,
        "bika_seq_transitive": bika_seq_transitive,
        "bika_par_transitive": bika_par_transitive,
        "tree_hoare_zero": tree_hoare_zero,
        "cka_hoare_zero": cka_hoare_zero,
        "cka_leq_one": cka_leq_one,
        "cka_expand": cka_expand,
    }
