"""Representations, reduction witnesses and their bounded certification."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable

from ..expressions import Expr, Var, show, substitute, variables
from ..proofs.core import Axiomatisation, Derivation, aeq, check_derivation
from ..proofs.kit import Eq, Kit, ProofError
from ..proofs.provers import MembershipProver, prove_inclusion_fixpointfree
from ..semantics import ClosureEngine, closed_lang_bounded, lang_bounded
from ..theory import TheoryConfig


@dataclass
class Representation:
    """An axiomatisation with hypotheses; languages are hypothesis closures."""

    Q: Axiomatisation
    hypotheses: list = field(default_factory=list)

    @property
    def theory(self) -> TheoryConfig:
        return self.Q.theory

    @property
    def fragment(self):
        return self.Q.fragment

    def same_as(self, other: Representation) -> bool:
        if self.Q.name != other.Q.name or self.theory != other.theory:
            return False
        return _same_hyps(self.hypotheses, other.hypotheses)

    def describe(self) -> str:
        hs = ", ".join(f"{show(e)} <= {show(f)}" for e, f in self.hypotheses)
        return f"({self.Q.name}, {{{hs}}})"


def _same_hyps(h1, h2) -> bool:
    def sub(a, b):
        return all(any(aeq(e, e2) and aeq(f, f2) for e2, f2 in b) for e, f in a)
    return sub(h1, h2) and sub(h2, h1)


def identity(e: Expr) -> Expr:
    return e


@dataclass
class ReductionWitness:
    """``r`` maps source expressions to target ones, ``i`` maps back.

    ``prove`` builds an equality ``i(r(e)) == e`` over the source representation
    and ``transfer`` turns target derivations into source derivations.
    """

    name: str
    src: Representation
    tgt: Representation
    r: Callable
    prove: Callable
    i: Callable = identity
    transfer: Callable | None = None
    measure: str = "size"

    def transport(self, d: Derivation) -> Derivation:
        if self.transfer is not None:
            return self.transfer(d)
        return reindex(d, self.tgt.hypotheses, self.src.hypotheses)


def reindex(d: Derivation, h_from, h_to) -> Derivation:
    """Rebuild ``d`` with hypothesis indices pointing into ``h_to``."""
    mapping = {}
    for i, (e, f) in enumerate(h_from):
        for j, (e2, f2) in enumerate(h_to):
            if aeq(e, e2) and aeq(f, f2):
                mapping[i] = j
                break
    memo: dict = {}

    def go(n: Derivation) -> Derivation:
        if id(n) in memo:
            return memo[id(n)]
        if n.rule == "hyp":
            if n.index not in mapping:
                raise ProofError(f"hypothesis {n} is not available in the source")
            out = Derivation("hyp", n.lhs, n.rhs, index=mapping[n.index])
        elif not n.premises:
            out = n
        else:
            out = Derivation(n.rule, n.lhs, n.rhs, tuple(go(p) for p in n.premises), n.axiom, n.theta,
                             n.params, n.index, n.symbol)
        memo[id(n)] = out
        return out

    return go(d)


@dataclass
class BoundConfig:
    report: int = 6
    work: int = 8
    samples: int = 2
    work_cap: int | None = None
    seed: int | None = None

    def cap(self, theory: TheoryConfig) -> int:
        """Work bound for the retry; multiset universes are small enough to go further."""
        if self.work_cap is not None:
            return max(self.work, self.work_cap)
        return max(self.work, (4 if theory.kind == "cmonoid" else 2) * self.report)


@dataclass
class ItemReport:
    expr: Expr
    image: Expr | None = None
    condition1: bool = True
    condition2: bool = True
    condition3: bool = True
    failure: str = ""
    witness: object = None
    approximate: bool = False
    work_used: int = 0

    @property
    def ok(self) -> bool:
        return self.condition1 and self.condition2 and self.condition3


@dataclass
class ReductionReport:
    name: str
    items: list = field(default_factory=list)
    bounds: tuple = ()

    @property
    def passed(self) -> bool:
        return all(it.ok for it in self.items)

    def failures(self) -> list:
        return [it for it in self.items if not it.ok]

    def summary(self) -> str:
        bad = self.failures()
        if not bad:
            return f"{self.name}: {len(self.items)} expressions, conditions 1 (sampled), 2 and 3 hold at {self.bounds}"
        it = bad[0]
        return f"{self.name}: {len(bad)}/{len(self.items)} failed; first {show(it.expr)}: {it.failure}"


def check_reduction(w: ReductionWitness, corpus, cfg: BoundConfig | None = None) -> ReductionReport:
    """Certify the three reduction conditions on each corpus expression at the configured bounds."""
    cfg = cfg or BoundConfig()
    rep = ReductionReport(w.name, bounds=(cfg.report, cfg.work))
    src_t, tgt_t = w.src.theory, w.tgt.theory
    target_members = MembershipProver(tgt_t, w.tgt.Q, w.tgt.hypotheses)
    for e in corpus:
        item = ItemReport(e)
        rep.items.append(item)
        try:
            image = w.r(e)
        except Exception as exc:  # a broken transformer is a failure of the witness
            item.condition2 = item.condition3 = False
            item.failure = f"r failed: {exc}"
            continue
        item.image = image
        # condition 3: the closures agree at the bounds; bounded closures only under-approximate,
        # so a mismatch is retried with a larger work bound before it counts
        work = cfg.work
        while True:
            left = closed_lang_bounded(e, w.src.hypotheses, src_t, cfg.report, work, w.measure)
            right = closed_lang_bounded(image, w.tgt.hypotheses, tgt_t, cfg.report, work, w.measure)
            diff = sorted(left.atoms ^ right.atoms, key=src_t.atom_key)
            if not diff or work >= cfg.cap(src_t) or not (w.src.hypotheses or w.tgt.hypotheses):
                break
            work = cfg.cap(src_t)
        item.work_used = work
        item.approximate = not (left.exact_below_bound and right.exact_below_bound)
        if diff:
            item.condition3 = False
            item.witness = diff[0]
            item.failure = f"condition 3: {src_t.show(diff[0])} separates the closures"
        # condition 2: a checked derivation of i(r(e)) == e in the source
        try:
            q = w.prove(e)
            back = w.i(image)
            if not (aeq(q.lhs, back) and aeq(q.rhs, e)):
                raise ProofError(f"derivation concludes {show(q.lhs)} == {show(q.rhs)}")
            for d in (q.fwd, q.bwd):
                res = check_derivation(w.src.Q, w.src.hypotheses, d)
                if not res:
                    raise ProofError(f"checker rejected at {res.path}: {res.reason}")
        except (ProofError, ValueError, KeyError) as exc:
            item.condition2 = False
            item.failure = item.failure or f"condition 2: {exc}"
        # condition 1 (sampled): target theorems about r(e) replay in the source
        try:
            members = sorted(lang_bounded(image, tgt_t, cfg.report).atoms, key=tgt_t.atom_key)
            if cfg.seed is None:
                sample = members[:cfg.samples]
            else:
                sample = random.Random(cfg.seed).sample(members, min(cfg.samples, len(members)))
            for a in sample:
                d = target_members.prove(a, image)
                if not check_derivation(w.tgt.Q, w.tgt.hypotheses, d):
                    raise ProofError("target derivation rejected")
                moved = w.transport(d)
                moved_lhs, moved_rhs = w.i(moved.lhs), w.i(moved.rhs)
                if not (aeq(moved_lhs, moved.lhs) and aeq(moved_rhs, moved.rhs)):
                    raise ProofError("transfer does not preserve the inequation")
                res = check_derivation(w.src.Q, w.src.hypotheses, moved)
                if not res:
                    raise ProofError(f"source checker rejected: {res.reason}")
        except (ProofError, ValueError) as exc:
            item.condition1 = False
            item.failure = item.failure or f"condition 1: {exc}"
    return rep


def identity_reduction(rep: Representation) -> ReductionWitness:
    kit = Kit(rep.Q, rep.hypotheses)
    return ReductionWitness("identity", rep, rep, identity, kit.eq_refl)


# --- homomorphic reductions ---------------------------------------------------------

class Rejected(ValueError):
    def __init__(self, condition: int, message: str, witness=None):
        super().__init__(f"condition {condition}: {message}")
        self.condition = condition
        self.witness = witness


def homomorphic_reduction(theta: dict, src: Representation, tgt: Representation, cfg: BoundConfig | None = None,
                          var_proofs: dict | None = None, name: str = "homomorphic") -> ReductionWitness:
    """Validate the substitution conditions and return the witness ``r(e) = e theta``, ``i = id``.

    Conditions are checked in the order 3, 4, 2: the variable lies in the
    language of its image, each source hypothesis maps into the target
    closure, and each variable is provably equal to its image.
    """
    cfg = cfg or BoundConfig()
    t = src.theory
    for x, img in sorted(theta.items()):
        if t.var_atom(x) not in lang_bounded(img, t, max(1, t.size(t.var_atom(x)))).atoms:
            raise Rejected(3, f"{x} is not in the language of {show(img)}", x)
    for e, f in src.hypotheses:
        lhs = lang_bounded(substitute(e, theta), t, cfg.report).atoms
        rhs = closed_lang_bounded(substitute(f, theta), tgt.hypotheses, t, cfg.report, cfg.work).atoms
        missing = sorted(lhs - rhs, key=t.atom_key)
        if missing:
            raise Rejected(4, f"{t.show(missing[0])} escapes the image of {show(e)} <= {show(f)}", missing[0])
    kit = Kit(src.Q, src.hypotheses)
    proofs = {}
    for x, img in sorted(theta.items()):
        try:
            q = (var_proofs or {}).get(x) or _var_eq(kit, x, img)
            for d in (q.fwd, q.bwd):
                res = check_derivation(src.Q, src.hypotheses, d)
                if not res:
                    raise ProofError(res.reason)
        except (ProofError, ValueError) as exc:
            raise Rejected(2, f"no derivation of {x} == {show(img)}: {exc}") from None
        proofs[x] = q

    def r(e: Expr) -> Expr:
        return substitute(e, theta)

    def prove(e: Expr) -> Eq:
        return kit.cong_eq(e, {x: q for x, q in proofs.items() if x in variables(e)}).flip()

    return ReductionWitness(name, src, tgt, r, prove)


def _var_eq(kit: Kit, x: str, img: Expr) -> Eq:
    """``x == img`` from the known absorption shapes or by fixpoint-free search."""
    from ..expressions import star_body
    from ..theory import PAR, SEQ

    v = Var(x)
    if aeq(img, v):
        return kit.eq_refl(v)
    for op in (SEQ, PAR):
        if getattr(img, "name", None) == op and len(img.args) == 2 and aeq(img.args[0], v):
            body = star_body(img.args[1], op)
            tag = "star" if op == SEQ else "pstar"
            if body is not None and aeq(body, v) and f"{tag}-unfold-l" in kit.Q:
                return absorb_eq(kit, op, v)
    up = MembershipProver(kit.theory, kit.Q, kit.H).prove(kit.theory.var_atom(x), img)
    down = prove_inclusion_fixpointfree(img, v, kit.H, kit.theory, Q=kit.Q)
    if not down:
        raise ProofError(f"could not derive {show(img)} <= {x}")
    return Eq(up, down)


def absorb_eq(kit: Kit, op: str, v: Expr) -> Eq:
    """``v == v op v*`` from the hypothesis ``v op v <= v``."""
    from ..expressions import UNIT, Sym
    from ..theory import SEQ

    s = kit.mk_star(op, v)
    vv = Sym(op, (v, v))
    up = kit.trans(kit.unit_r_rev(op, v), kit.cong_arg(Sym(op, (v, UNIT)), 1, kit.one_le_star(op, v)))
    prem = kit.join(kit.refl(v), kit.hyp(vv, v))
    if op == SEQ and "star-ind-r" in kit.Q:
        down = kit.ind_r(op, v, v, prem)
    else:
        swap = kit.law(f"{'seq' if op == SEQ else 'par'}-comm", {"x": v, "y": s}).fwd
        down = kit.trans(swap, kit.ind_l(op, v, v, prem))
    return Eq(up, down)


# --- composition ----------------------------------------------------------------------

class CompositionError(ValueError):
    pass


def compose(w1: ReductionWitness, w2: ReductionWitness) -> ReductionWitness:
    """``w1`` from A to B followed by ``w2`` from B to C."""
    if not w1.tgt.same_as(w2.src):
        raise CompositionError(f"{w1.name} ends at {w1.tgt.describe()} but {w2.name} starts at {w2.src.describe()}")
    kit = Kit(w1.src.Q, w1.src.hypotheses)

    def r(e: Expr) -> Expr:
        return w2.r(w1.r(e))

    def i(e: Expr) -> Expr:
        return w1.i(w2.i(e))

    def prove(e: Expr) -> Eq:
        mid = w1.r(e)
        q2 = w2.prove(mid)
        q2 = Eq(w1.transport(q2.fwd), w1.transport(q2.bwd))
        q2 = Eq(_map_sides(q2.fwd, w1.i), _map_sides(q2.bwd, w1.i)) if w1.i is not identity else q2
        return kit.eq_trans(q2, w1.prove(e))

    def transfer(d: Derivation) -> Derivation:
        return w1.transport(w2.transport(d))

    return ReductionWitness(f"{w1.name};{w2.name}", w1.src, w2.tgt, r, prove, i, transfer, w1.measure)


def _map_sides(d: Derivation, f) -> Derivation:
    if all(aeq(f(x), x) for x in (d.lhs, d.rhs)):
        return d
    raise CompositionError("non-identity back-translations need a derivation transformer")


# --- closure commutation -----------------------------------------------------------

@dataclass
class CommutationReport:
    first: list
    second: list
    bound: int
    holds: bool
    seeds: int = 0
    seed: object = None
    witness: object = None
    approximate: bool = False


def check_closure_commutation(h1, h2, theory: TheoryConfig, bound: int = 6, work: int | None = None,
                              pairs: bool = False, measure: str = "size") -> CommutationReport:
    """Check ``H1*(H2*(L)) <= H2*(H1*(L))`` for singleton (and optionally two-element) seeds ``L``."""
    work = bound + 2 if work is None else work
    e1 = ClosureEngine(theory, list(h1), work, measure)
    e2 = ClosureEngine(theory, list(h2), work, measure)
    universe = theory.enumerate_atoms(bound, measure)
    seeds = [frozenset([a]) for a in universe]
    if pairs:
        seeds += [frozenset(p) for p in itertools.combinations(universe, 2)]
    cache1: dict = {}
    cache2: dict = {}

    def c1(lang):
        if lang not in cache1:
            cache1[lang] = e1.closure(lang)
        return cache1[lang]

    def c2(lang):
        if lang not in cache2:
            cache2[lang] = e2.closure(lang)
        return cache2[lang]

    for seed in seeds:
        left = c1(c2(seed))
        right = c2(c1(seed))
        extra = sorted((a for a in left - right if theory.measure(a, measure) <= bound), key=theory.atom_key)
        if extra:
            return CommutationReport(list(h1), list(h2), bound, False, len(seeds), seed, extra[0],
                                     e1.approximate or e2.approximate)
    return CommutationReport(list(h1), list(h2), bound, True, len(seeds), approximate=e1.approximate or e2.approximate)
