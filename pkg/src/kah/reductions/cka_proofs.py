"""Derivations for commutative Kleene algebra: Pilling normal forms and the ``a <= a.a`` reduction.

Products are handled as multisets of opaque factors: a lemma is applied
inside a product by first reordering with E-equalities so that its
left-hand side becomes the right argument of the top product.
"""

from __future__ import annotations

from ..decision.commutative import _nf, _star_summand, _summand_key, pilling_normal_form, summand_expr
from ..expressions import UNIT, ZERO, Expr, Mu, Plus, Sym, Var, Zero, atom_expr, plus, seq, star, star_body
from ..proofs.core import Derivation, aeq, canon, instance_axioms
from ..proofs.kit import Eq, Kit, ProofError
from ..theory import SEQ
from .core import Representation, ReductionWitness


def _period_key(p: tuple) -> tuple:
    return (len(p), p)


def factors(e: Expr) -> list:
    """The factors of a product, units dropped."""
    if isinstance(e, Sym) and e.name == SEQ and len(e.args) == 2:
        return factors(e.args[0]) + factors(e.args[1])
    if e == UNIT:
        return []
    return [e]


def _remove(pool: list, items: list) -> list:
    rest = list(pool)
    for x in items:
        for i, y in enumerate(rest):
            if aeq(x, y):
                del rest[i]
                break
        else:
            raise ProofError(f"factor {x} is not available")
    return rest


class CKAKit(Kit):
    """Lemmas over the cKA instance axioms."""

    def mul(self, x: Expr, y: Expr) -> Sym:
        return Sym(SEQ, (x, y))

    # --- products ---------------------------------------------------------------

    def in_context(self, cur: Expr, d: Derivation) -> Derivation:
        """``cur <= rest . d.rhs`` where ``cur`` is E-equal to ``rest . d.lhs``."""
        rest = _remove(factors(cur), factors(d.lhs))
        if not rest:
            return self.trans(self.eeq(cur, d.lhs).fwd, d)
        mid = self.mul(seq(*rest), d.lhs)
        return self.trans(self.eeq(cur, mid).fwd, self.cong_arg(mid, 1, d))

    def rewrite(self, cur: Expr, steps, target: Expr | None = None) -> Derivation:
        """Apply each lemma of ``steps`` in turn inside the product, then reorder to ``target``."""
        d = self.refl(cur)
        for step in steps:
            d = self.trans(d, self.in_context(d.rhs, step))
        if target is not None:
            d = self.trans(d, self.eeq(d.rhs, target).fwd)
        return d

    def one_le(self, e: Expr) -> Derivation:
        """``1 <= e`` for units, stars, products of such and sums with such a summand."""
        if e == UNIT:
            return self.refl(e)
        if isinstance(e, Mu) and star_body(e, SEQ) is not None:
            return self.one_le_star(SEQ, star_body(e, SEQ))
        if isinstance(e, Sym) and e.name == SEQ and len(e.args) == 2:
            two = self.law("seq-unit-r", {"x": UNIT}).bwd
            return self.trans(two, self.sym(SEQ, [self.one_le(e.args[0]), self.one_le(e.args[1])]))
        if isinstance(e, Plus):
            try:
                return self.trans(self.one_le(e.left), self.inl(e.left, e.right))
            except ProofError:
                return self.trans(self.one_le(e.right), self.inr(e.left, e.right))
        raise ProofError(f"cannot show 1 <= {e}")

    def dedup_chain(self, parts: list) -> Eq:
        """``seq(parts) == seq(parts')`` with adjacent repeated stars merged."""
        if len(parts) <= 1:
            return self.eq_refl(seq(*parts))
        q0 = self.dedup_chain(parts[:-1])
        last = parts[-1]
        q = self.eq_arg(self.mul(q0.lhs, last), 0, q0)
        prev = factors_chain(q0.rhs)
        if aeq(prev[-1], last) and star_body(last, SEQ) is not None:
            pre = prev[:-1]
            idem = self.star_idem(star_body(last, SEQ))
            if not pre:
                return self.eq_trans(q, idem)
            assoc = self.law("seq-assoc", {"x": seq(*pre), "y": last, "z": last}).flip()
            return self.eq_trans(q, assoc, self.eq_arg(assoc.rhs, 1, idem))
        return q

    # --- stars --------------------------------------------------------------------

    def star_idem(self, x: Expr) -> Eq:
        """``x* . x* == x*``."""
        s = star(x)
        up = self.trans(self.unit_r_rev(SEQ, s), self.cong_arg(self.mul(s, UNIT), 1, self.one_le_star(SEQ, x)))
        return Eq(self.star_star_le(SEQ, x), up)

    def star_eq(self, q: Eq) -> Eq:
        return Eq(self.star_mono(SEQ, q.fwd), self.star_mono(SEQ, q.bwd))

    def zero_star(self) -> Eq:
        """``0* == 1``."""
        zero_one = self.trans(self.axiom(f"annih[{SEQ},1]", {"x2": UNIT}), self.zero_le(UNIT))
        prem = self.join(self.refl(UNIT), zero_one)
        return Eq(self.star_eq_ind(SEQ, ZERO, UNIT, prem), self.one_le_star(SEQ, ZERO))

    def sum_star(self, x: Expr, y: Expr) -> Eq:
        """``(x + y)* == x* . y*``."""
        sx, sy = star(x), star(y)
        target = self.mul(sx, sy)
        left = self.in_context(self.mul(x, target), self.step_le_star(SEQ, x))
        left = self.trans(left, self.eeq(left.rhs, target).fwd)
        right = self.in_context(self.mul(y, target), self.step_le_star(SEQ, y))
        right = self.trans(right, self.eeq(right.rhs, target).fwd)
        spread = self.axiom(f"dist[{SEQ},1]", {"y": x, "y'": y, "x2": target})
        prem = self.join(self.one_le(target), self.trans(spread, self.join(left, right)))
        fwd = self.star_eq_ind(SEQ, Plus(x, y), target, prem)
        both = self.sym(SEQ, [self.star_mono(SEQ, self.inl(x, y)), self.star_mono(SEQ, self.inr(x, y))])
        bwd = self.trans(both, self.star_star_le(SEQ, Plus(x, y)))
        return Eq(fwd, bwd)

    def sum_star_chain(self, parts: list) -> Eq:
        """``(p1 + ... + pn)* == p1* . ... . pn*`` for a left-nested sum."""
        if len(parts) == 1:
            return self.eq_refl(star(parts[0]))
        init = plus(*parts[:-1])
        q = self.sum_star(init, parts[-1])
        return self.eq_trans(q, self.eq_arg(q.rhs, 0, self.sum_star_chain(parts[:-1])))

    def idempotent_le(self, v: Expr) -> Derivation:
        """``v . v <= v`` for a product of stars."""
        stars = factors(v)
        dup = seq(*sorted(stars + stars, key=_canon_key))
        reorder = self.eeq(self.mul(v, v), dup).fwd
        merged = self.dedup_chain(factors_chain(dup))
        return self.trans(reorder, merged.fwd, self.eeq(merged.rhs, v).fwd)


def factors_chain(e: Expr) -> list:
    """Elements of a left-nested chain (no flattening of the right argument)."""
    out = []
    while isinstance(e, Sym) and e.name == SEQ and len(e.args) == 2:
        out.append(e.args[1])
        e = e.args[0]
    out.append(e)
    return out[::-1]


def _canon_key(e: Expr) -> str:
    return repr(canon(e))


# --- Pilling normal forms as derivations --------------------------------------------------

class NormalFormProver:
    """Derives ``e == NF(e)`` in cKA, where ``NF`` renders the Pilling normal form."""

    def __init__(self, kit: CKAKit):
        self.kit = kit
        self.theory = kit.theory

    def summand(self, s) -> Expr:
        w, periods = s
        return summand_expr(self.theory, w, sorted(periods, key=_period_key))

    def render(self, S) -> Expr:
        return plus(*(self.summand(s) for s in sorted(S, key=_summand_key)))

    def prove(self, e: Expr):
        """``(S, e == render(S))``."""
        k = self.kit
        if isinstance(e, Var):
            S = frozenset([((e.name,), frozenset())])
            return S, k.eeq(e, self.render(S))
        if isinstance(e, Zero):
            return frozenset(), k.eq_refl(e)
        if e == UNIT:
            return frozenset([((), frozenset())]), k.eq_refl(e)
        if isinstance(e, Plus):
            s1, q1 = self.prove(e.left)
            s2, q2 = self.prove(e.right)
            S = s1 | s2
            return S, k.eq_trans(k.eq_plus(q1, q2), self.sum_eq(Plus(q1.rhs, q2.rhs), self.render(S)))
        if isinstance(e, Sym) and e.name == SEQ and len(e.args) == 2:
            s1, q1 = self.prove(e.args[0])
            s2, q2 = self.prove(e.args[1])
            S, q = self.product(s1, s2)
            return S, k.eq_trans(k.eq_sym(SEQ, [q1, q2]), q)
        body = star_body(e, SEQ)
        if body is not None:
            sg, qg = self.prove(body)
            S, q = self.star(sg)
            return S, k.eq_trans(k.star_eq(qg), q)
        raise ProofError(f"{e} is outside the commutative Kleene fragment")

    def sum_eq(self, small: Expr, big: Expr) -> Eq:
        """Two sums with the same set of summands."""
        return Eq(self.kit.sum_le(small, big), self.kit.sum_le(big, small))

    def product(self, s1, s2):
        """``render(s1) . render(s2) == render(s1 * s2)``."""
        k = self.kit
        x, y = self.render(s1), self.render(s2)
        here = k.mul(x, y)
        if not s1:
            return frozenset(), Eq(k.axiom(f"annih[{SEQ},1]", {"x2": y}), k.zero_le(here))
        if not s2:
            return frozenset(), Eq(k.axiom(f"annih[{SEQ},2]", {"x1": x}), k.zero_le(here))
        spread = self.distribute(x, y)
        descs = {_canon_key(self.summand(s)): s for s in s1 | s2}
        S = frozenset((tuple(sorted(w + w2)), p | p2) for w, p in s1 for w2, p2 in s2)
        merged = self.map_leaves(spread.rhs, lambda leaf: self.merge(leaf, descs))
        return S, k.eq_trans(spread, merged, self.sum_eq(merged.rhs, self.render(S)))

    def distribute(self, x: Expr, y: Expr, right: bool = True) -> Eq:
        """``x . y == T`` where the leaves of the sum tree ``T`` are products of summands."""
        k = self.kit
        here = k.mul(x, y)
        if isinstance(x, Plus):
            fwd = k.axiom(f"dist[{SEQ},1]", {"y": x.left, "y'": x.right, "x2": y})
            bwd = k.join(k.cong_arg(k.mul(x.left, y), 0, k.inl(x.left, x.right)),
                         k.cong_arg(k.mul(x.right, y), 0, k.inr(x.left, x.right)))
            return k.eq_trans(Eq(fwd, bwd), k.eq_plus(self.distribute(x.left, y, right),
                                                      self.distribute(x.right, y, right)))
        if right and isinstance(y, Plus):
            fwd = k.axiom(f"dist[{SEQ},2]", {"x1": x, "y": y.left, "y'": y.right})
            bwd = k.join(k.cong_arg(k.mul(x, y.left), 1, k.inl(y.left, y.right)),
                         k.cong_arg(k.mul(x, y.right), 1, k.inr(y.left, y.right)))
            return k.eq_trans(Eq(fwd, bwd), k.eq_plus(self.distribute(x, y.left), self.distribute(x, y.right)))
        return k.eq_refl(here)

    def map_leaves(self, tree: Expr, fn) -> Eq:
        if isinstance(tree, Plus):
            return self.kit.eq_plus(self.map_leaves(tree.left, fn), self.map_leaves(tree.right, fn))
        return fn(tree)

    def merge(self, leaf: Sym, descs: dict) -> Eq:
        """A product of two summands equals the summand of the merged word and periods."""
        k = self.kit
        (w1, p1), (w2, p2) = (descs[_canon_key(a)] for a in leaf.args)
        w = tuple(sorted(w1 + w2))
        dup = summand_expr(self.theory, w, sorted(list(p1) + list(p2), key=_period_key))
        reorder = k.eeq(leaf, dup)
        merged = k.dedup_chain(factors_chain(dup))
        return k.eq_trans(reorder, merged)

    def star(self, sg):
        """``render(sg)* == render(NF)`` for the star of a normal form."""
        k = self.kit
        if not sg:
            return frozenset([((), frozenset())]), k.zero_star()
        ordered = sorted(sg, key=_summand_key)
        parts = [self.summand(s) for s in ordered]
        chain = k.sum_star_chain(parts)
        acc_S, acc = self.star_summand(ordered[0])
        for s in ordered[1:]:
            s_S, q = self.star_summand(s)
            step = k.eq_sym(SEQ, [acc, q])
            new_S, prod = self.product(acc_S, s_S)
            acc_S, acc = new_S, k.eq_trans(step, prod)
        expected = _nf(star(plus(*parts)))
        if acc_S != expected:
            raise ProofError("normal form bookkeeping diverged")
        return acc_S, k.eq_trans(chain, acc)

    def star_summand(self, s):
        """``summand(s)* == render(star of s)``."""
        k = self.kit
        w, periods = s
        S = _star_summand(w, periods)
        p = self.summand(s)
        if not w and not periods:
            prem = k.join(k.refl(UNIT), k.law("seq-unit-r", {"x": UNIT}).fwd)
            return S, Eq(k.star_eq_ind(SEQ, UNIT, UNIT, prem), k.one_le_star(SEQ, UNIT))
        if not periods:
            return S, k.eq_refl(star(p))
        if not w:
            prem = k.join(k.one_le(p), k.idempotent_le(p))
            return S, Eq(k.star_eq_ind(SEQ, p, p, prem), k.le_star(SEQ, p))
        u = atom_expr(self.theory, w)
        v = seq(*(star(atom_expr(self.theory, q)) for q in sorted(periods, key=_period_key)))
        rest = self.summand((w, periods | {w}))
        target = self.render(S)
        su = star(u)
        # p* <= 1 + rest
        absorbed = w in periods
        p_rest = k.refl(p) if absorbed else k.rewrite(p, [k.one_le_star(SEQ, u)], rest)
        absorb = [k.step_le_star(SEQ, u)] + [k.star_star_le(SEQ, star_body(f, SEQ)) for f in factors(v)]
        pr_rest = k.rewrite(k.mul(p, rest), absorb, rest)
        unit_p = k.trans(k.law("seq-unit-r", {"x": p}).fwd, p_rest)
        spread = k.axiom(f"dist[{SEQ},2]", {"x1": p, "y": UNIT, "y'": rest})
        body = k.trans(spread, k.join(unit_p, pr_rest), k.inr(UNIT, rest))
        prem = k.join(k.inl(UNIT, rest), body)
        fwd = k.star_eq_ind(SEQ, p, target, prem)
        # 1 + rest <= p*
        sp = star(p)
        u_le_p = k.rewrite(u, [k.one_le(v)], p)
        step = k.trans(k.cong_arg(k.mul(u, sp), 0, u_le_p), k.step_le_star(SEQ, p))
        ind = k.ind_l(SEQ, u, p, k.join(k.le_star(SEQ, p), step))
        rest_le = k.le_star(SEQ, p) if absorbed else k.trans(k.eeq(rest, k.mul(su, p)).fwd, ind)
        bwd = k.join(k.one_le_star(SEQ, p), rest_le)
        return S, Eq(fwd, bwd)


# --- the expansion reduction ----------------------------------------------------------

class Expander:
    """Renders and proves the image of a normal-form summand under ``a <= a.a``."""

    def __init__(self, kit: CKAKit, atom: str):
        self.kit = kit
        self.theory = kit.theory
        self.a = Var(atom)
        self.atom = atom

    def power(self, n: int) -> Expr:
        return seq(*([self.a] * n)) if n else UNIT

    def below(self, k: int) -> Expr:
        """``a^{<=k} = 1 + a + ... + a^k``."""
        return plus(*(self.power(j) for j in range(k + 1)))

    def a_below(self, k: int) -> Expr:
        """``a . a^{<=k}``, written ``a`` when ``k`` is 0."""
        return self.a if k == 0 else Sym(SEQ, (self.a, self.below(k)))

    def split(self, w: tuple) -> tuple:
        rest = tuple(x for x in w if x != self.atom)
        return len(w) - len(rest), rest

    def word(self, u: tuple) -> list:
        return [atom_expr(self.theory, u)] if u else []

    def x_period(self, k: int, u: tuple) -> Expr:
        """``u . a^{<=k}`` with a unit ``u`` dropped."""
        return seq(*self.word(u), self.below(k))

    def render(self, w0: tuple, periods: list) -> Expr:
        k0, u0 = self.split(w0)
        a_periods = [(self.split(p), p) for p in periods if self.atom in p]
        v_periods = [p for p in periods if self.atom not in p]
        v_stars = [star(atom_expr(self.theory, p)) for p in v_periods]
        x_stars = [star(self.x_period(k, u)) for (k, u), _ in a_periods]
        if k0:
            return seq(*self.word(u0), self.a_below(k0 - 1), *x_stars, *v_stars)
        if not a_periods:
            return summand_expr(self.theory, w0, periods)
        heads = plus(*(seq(*self.word(u), self.a_below(k - 1)) for (k, u), _ in a_periods))
        inner = Plus(UNIT, Sym(SEQ, (heads, seq(*x_stars))))
        return seq(*self.word(w0), inner, *v_stars)

    # --- lemmas under the hypothesis a <= a.a ------------------------------------------

    def pump(self, j: int, n: int) -> Derivation:
        """``a^j <= a^n`` for ``1 <= j <= n``."""
        k = self.kit
        d = k.refl(self.power(j))
        aa = Sym(SEQ, (self.a, self.a))
        for m in range(j, n):
            if m == 1:
                step = k.hyp(self.a, aa)
            else:
                pre = self.power(m - 1)
                step = k.trans(k.cong_arg(Sym(SEQ, (pre, self.a)), 1, k.hyp(self.a, aa)),
                               k.law("seq-assoc", {"x": pre, "y": self.a, "z": self.a}).fwd)
            d = k.trans(d, step)
        return d

    def below_le(self, k: int) -> Derivation:
        """``a . a^{<=k} <= a^{k+1}`` using the hypothesis."""
        kit = self.kit
        if k == 0:
            return kit.refl(self.a)
        spread = NormalFormProver(kit).distribute(self.a, self.below(k)).fwd
        top = self.power(k + 1)

        def leaf(t: Expr) -> Derivation:
            j = len(factors(t))
            return kit.trans(kit.eeq(t, self.power(j)).fwd, self.pump(j, k + 1))

        return kit.trans(spread, kit.leq_sum(spread.rhs, top, leaf))

    def power_le_below(self, k: int) -> Derivation:
        """``a^{k+1} <= a . a^{<=k}``."""
        kit = self.kit
        if k == 0:
            return kit.refl(self.a)
        here = self.a_below(k)
        return kit.trans(kit.eeq(self.power(k + 1), Sym(SEQ, (self.a, self.power(k)))).fwd,
                         kit.cong_arg(here, 1, kit.summand_le(self.below(k), self.power(k))))

    def period_le(self, k: int, u: tuple) -> Derivation:
        """``a^k u <= u . a^{<=k}`` without hypotheses."""
        kit = self.kit
        p = atom_expr(self.theory, tuple(sorted((self.atom,) * k + u)))
        pk = self.power(k)
        mid = Sym(SEQ, (seq(*self.word(u)), pk)) if u else pk
        d = kit.eeq(p, mid).fwd
        if u:
            return kit.trans(d, kit.cong_arg(mid, 1, kit.summand_le(self.below(k), pk)))
        return kit.trans(d, kit.summand_le(self.below(k), pk))

    def star_absorb(self, k: int, u: tuple) -> Derivation:
        """``a . (u a^{<=k})* <= a . (a^k u)*`` using the hypothesis."""
        kit = self.kit
        x = self.x_period(k, u)
        pw = tuple(sorted((self.atom,) * k + u))
        p = atom_expr(self.theory, pw)
        sp = star(p)
        y = Sym(SEQ, (self.a, sp))
        base = kit.trans(kit.unit_r_rev(SEQ, self.a), kit.cong_arg(Sym(SEQ, (self.a, UNIT)), 1, kit.one_le_star(SEQ, p)))
        # (a . p*) . (u . a^{<=k}) <= a . p*
        r = seq(self.a, sp, *self.word(u))
        shaped = Sym(SEQ, (r, self.below(k)))
        d = kit.eeq(Sym(SEQ, (y, x)), shaped).fwd
        spread = NormalFormProver(kit).distribute(r, self.below(k)).fwd

        def leaf(t: Expr) -> Derivation:
            j = len([f for f in factors(t) if aeq(f, self.a)])
            lifted = kit.rewrite(t, [self.pump(j, k + 1)])
            return kit.trans(lifted, kit.rewrite(lifted.rhs, [kit.step_le_star(SEQ, p)], y))

        loop = kit.trans(d, spread, kit.leq_sum(spread.rhs, y, leaf))
        return kit.ind_r(SEQ, x, self.a, kit.join(base, loop))

    # --- summand equalities ---------------------------------------------------------

    def summand_eq(self, w0: tuple, periods: list) -> Eq:
        """``summand(w0, periods) == render(w0, periods)`` modulo the hypothesis."""
        kit = self.kit
        nf = summand_expr(self.theory, w0, periods)
        out = self.render(w0, periods)
        k0, u0 = self.split(w0)
        a_periods = [(self.split(p), p) for p in periods if self.atom in p]
        if not k0 and not a_periods:
            return kit.eq_refl(nf)
        if k0:
            up = [self.power_le_below(k0 - 1)] + [kit.star_mono(SEQ, self.period_le(k, u)) for (k, u), _ in a_periods]
            fwd = kit.rewrite(nf, up, out)
            down = [self.below_le(k0 - 1)] + [self.star_absorb(k, u) for (k, u), _ in a_periods]
            bwd = kit.rewrite(out, down, nf)
            return Eq(fwd, bwd)
        return self._no_a_head(w0, periods, nf, out, a_periods)

    def _no_a_head(self, w0, periods, nf, out, a_periods) -> Eq:
        kit = self.kit
        stars_p = [star(atom_expr(self.theory, p)) for _, p in a_periods]
        prod_p = seq(*stars_p)
        x_list = [self.x_period(k, u) for (k, u), _ in a_periods]
        heads = [seq(*self.word(u), self.a_below(k - 1)) for (k, u), _ in a_periods]
        prod_x = seq(*(star(x) for x in x_list))
        hsum = plus(*heads)
        y = Plus(UNIT, Sym(SEQ, (hsum, prod_x)))
        # prod_p <= y, by induction over the sum of the periods
        ps = [atom_expr(self.theory, p) for _, p in a_periods]
        chain = kit.sum_star_chain(ps)
        y_tail = Sym(SEQ, (hsum, prod_x))
        pieces = []
        for i, ((k, u), pw) in enumerate(a_periods):
            p = ps[i]
            head_le = kit.trans(kit.eeq(p, seq(*self.word(u), self.power(k))).fwd,
                                kit.rewrite(seq(*self.word(u), self.power(k)), [self.power_le_below(k - 1)], heads[i]),
                                kit.summand_le(hsum, heads[i]))
            # p . 1 <= hsum . prod_x
            p_one = kit.sym(SEQ, [head_le, kit.one_le(prod_x)])
            # p . (hsum . prod_x) <= hsum . prod_x
            lifted = kit.rewrite(Sym(SEQ, (p, y_tail)), [self.period_le(k, u)])
            absorbed = kit.rewrite(lifted.rhs, [kit.step_le_star(SEQ, x_list[i])], y_tail)
            p_tail = kit.trans(lifted, absorbed)
            spread = kit.axiom(f"dist[{SEQ},2]", {"x1": p, "y": UNIT, "y'": y_tail})
            pieces.append(kit.trans(spread, kit.plus(p_one, p_tail), kit.idem(y_tail), kit.inr(UNIT, y_tail)))
        psum = plus(*ps)
        spread = NormalFormProver(kit).distribute(psum, y, right=False).fwd
        by_leaf = {_canon_key(Sym(SEQ, (p, y))): d for p, d in zip(ps, pieces)}
        body = kit.trans(spread, kit.leq_sum(spread.rhs, y, lambda t: by_leaf[_canon_key(t)]))
        prem = kit.join(kit.inl(UNIT, y_tail), body)
        p_le_y = kit.trans(chain.bwd, kit.star_eq_ind(SEQ, psum, y, prem))
        # y <= prod_p, using the hypothesis
        tails = []
        for i, ((k, u), pw) in enumerate(a_periods):
            cur = Sym(SEQ, (heads[i], prod_x))
            steps = [self.below_le(k - 1)] + [self.star_absorb(k2, u2) for (k2, u2), _ in a_periods]
            d = kit.rewrite(cur, steps)
            d = kit.trans(d, kit.rewrite(d.rhs, [kit.step_le_star(SEQ, ps[i])], prod_p))
            tails.append(d)
        spread = NormalFormProver(kit).distribute(hsum, prod_x).fwd
        by_head = {_canon_key(Sym(SEQ, (h, prod_x))): d for h, d in zip(heads, tails)}
        tail_le = kit.trans(spread, kit.leq_sum(spread.rhs, prod_p, lambda t: by_head[_canon_key(t)]))
        y_le_p = kit.join(kit.one_le(prod_p), tail_le)
        # place both directions inside the summand
        ctx_parts = self.word(w0)
        v_stars = [star(atom_expr(self.theory, p)) for p in periods if self.atom not in p]
        hole = Var("_hole")
        template = seq(*ctx_parts, hole, *v_stars)
        up = kit.trans(kit.eeq(nf, _subst(template, prod_p)).fwd, kit.cong(template, {"_hole": p_le_y}))
        down = kit.trans(kit.cong(template, {"_hole": y_le_p}), kit.eeq(_subst(template, prod_p), nf).fwd)
        if not aeq(up.rhs, out):
            raise ProofError("expansion rendering mismatch")
        return Eq(up, down)


def _subst(template: Expr, e: Expr) -> Expr:
    from ..expressions import substitute
    return substitute(template, {"_hole": e})


def expand_expr(e: Expr, theory, atom: str = "a") -> Expr:
    """The image of ``e`` under the ``a <= a.a`` reduction."""
    ex = Expander(CKAKit(instance_axioms("cKA", theory.variables)), atom)
    return plus(*(ex.render(w, p) for w, p in pilling_normal_form(e)))


def expand_witness(variables, extra, atom: str = "a") -> ReductionWitness:
    Q = instance_axioms("cKA", variables)
    if atom not in Q.theory.variables:
        raise ValueError(f"{atom} is not a variable of the theory")
    a = Var(atom)
    src = Representation(Q, [(a, Sym(SEQ, (a, a)))] + list(extra))
    tgt = Representation(Q, list(extra))
    kit = CKAKit(Q, src.hypotheses)
    nfp = NormalFormProver(kit)
    ex = Expander(kit, atom)

    def r(e: Expr) -> Expr:
        return plus(*(ex.render(w, p) for w, p in pilling_normal_form(e)))

    def prove(e: Expr) -> Eq:
        S, q1 = nfp.prove(e)
        parts = [ex.summand_eq(w, p) for w, p in pilling_normal_form(e)]
        if not parts:
            return q1.flip()
        q2 = parts[0]
        for q in parts[1:]:
            q2 = kit.eq_plus(q2, q)
        return kit.eq_trans(q2.flip(), q1.flip())

    return ReductionWitness("cka_expand", src, tgt, r, prove)
