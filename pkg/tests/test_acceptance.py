"""End-to-end acceptance checks; each one records a single pass/fail line."""

import time

import conftest
import oracle
import soundness
from kah.cli import parse_kah, run
from kah.decision import cross_validate, normal_form_expr, pilling_normal_form
from kah.expressions import Fragment, alpha_equal, parse_expr, show
from kah.proofs import (
    MembershipProver, check_derivation, countermodel_check, derivation_from_json, naive_axioms,
    prove_inclusion_fixpointfree,
)
from kah.reductions import (
    BoundConfig, bika_par_transitive, bika_seq_transitive, check_closure_commutation, check_reduction, cka_expand,
    cka_hoare_zero, cka_leq_one, ka_transitive, tree_hoare_zero,
)
from kah.sampling import corpus
from kah.semantics import ClosureEngine, closed_lang_bounded, lang_bounded
from kah.theory import TheoryConfig

WORDS = TheoryConfig.monoid(("a", "b"))
MULTISETS = TheoryConfig.cmonoid(("a", "b"))
POMSETS = TheoryConfig.bimonoid(("a", "b"))
TREES = TheoryConfig.free([("f", 2), ("g", 1), ("c", 0)], ["x"])
SMALL_TREES = TheoryConfig.free([("f", 2), ("c", 0)], ["x"])

INSTANCES = [
    (WORDS, Fragment.KLEENE_STAR),
    (MULTISETS, Fragment.KLEENE_STAR),
    (POMSETS, Fragment.BIKLEENE),
    (TREES, Fragment.FULL),
]


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    conftest.CRITERIA.append(line)
    assert ok, line


def atoms_of(theory, *texts):
    out = set()
    for t in texts:
        out |= lang_bounded(parse_expr(t, theory), theory, 8).atoms
    return frozenset(out)


def hyps(theory, *pairs):
    return [(parse_expr(l, theory), parse_expr(r, theory)) for l, r in pairs]


# --- 1: closure examples ----------------------------------------------------------------------

def closure_cases():
    w3 = TheoryConfig.monoid(("a", "b", "x", "y", "z"))
    w2 = TheoryConfig.monoid(("x", "y"))
    m = TheoryConfig.cmonoid(("a", "b", "c", "d", "x", "y"))
    p = TheoryConfig.bimonoid(("a", "b", "c", "x"))
    L1 = atoms_of(w3, "y", "a.y.b", "a.z.b")
    L2 = atoms_of(w2, "x.x", "x.y.x")
    L3 = atoms_of(m, "a.x", "b.y", "d.x.y")
    L4 = atoms_of(p, "x.(a || b || c)")
    star2 = {tuple("x" * i) for i in range(2, 9)}
    star2 |= {tuple("x" * j + "y" + "x" * k) for j in range(1, 8) for k in range(1, 8) if j + k + 1 <= 8}
    return [
        ("monoid x<=y+z", w3, hyps(w3, ("x", "y + z")), L1, atoms_of(w3, "a.x.b"), L1 | atoms_of(w3, "a.x.b")),
        ("monoid xx<=x", w2, hyps(w2, ("x.x", "x")), L2, atoms_of(w2, "x.x.x", "x.x.y.x", "x.y.x.x"),
         frozenset(star2)),
        ("cmonoid", m, hyps(m, ("c", "x.y"), ("a", "c.d")), L3, atoms_of(m, "c.d"), L3 | atoms_of(m, "a", "c.d")),
        ("bimonoid", p, hyps(p, ("b", "a || c")), L4, atoms_of(p, "x.(b || b)"), L4 | atoms_of(p, "x.(b || b)")),
    ]


def test_criterion_1_closure_examples():
    details, ok = [], True
    for name, theory, H, L, step, star_ in closure_cases():
        start = time.time()
        engine = ClosureEngine(theory, H, 8)
        got_step = engine.closure_step(L)
        got_star = engine.closure(L)
        took = time.time() - start
        good = got_step == step and got_star == star_ and not engine.approximate and took < 1
        ok &= good
        details.append(f"{name} {'ok' if good else 'MISMATCH'} ({took:.2f}s)")
    record(1, ok, "; ".join(details))


# --- 2: counter-model -------------------------------------------------------------------------

def test_criterion_2_countermodel():
    start = time.time()
    rep = countermodel_check()
    took = time.time() - start
    ok = rep.axioms_hold and rep.refuted and str(rep.lhs_value) == "T" and str(rep.rhs_value) == "a*" and took < 1
    record(2, ok, f"axioms hold={rep.axioms_hold}, a*.a={rep.lhs_value}, refuted={rep.refuted} ({took:.2f}s)")


# --- 3: membership ----------------------------------------------------------------------------

def test_criterion_3_membership():
    start = time.time()
    total = accepted = 0
    for theory, fragment in INSTANCES:
        Q = naive_axioms(theory, Fragment.FULL)
        for e in corpus(theory, 50, seed=11, size=(1, 12), fragment=fragment):
            mp = MembershipProver(theory, Q)
            for atom in lang_bounded(e, theory, 5).atoms:
                total += 1
                accepted += bool(check_derivation(Q, [], mp.prove(atom, e)))
    took = time.time() - start
    record(3, accepted == total and took < 60, f"{accepted}/{total} derivations accepted ({took:.1f}s)")


# --- 4: soundness -----------------------------------------------------------------------------

def gather_derivations():
    """(theory, Q, H, derivation) from every derivation-producing component."""
    out = []
    for theory, fragment in INSTANCES:
        Q = naive_axioms(theory, Fragment.FULL)
        for e in corpus(theory, 6, seed=21, size=(2, 8), fragment=fragment):
            atoms = sorted(lang_bounded(e, theory, 4).atoms, key=theory.atom_key)[:2]
            out += [(theory, Q, [], MembershipProver(theory, Q).prove(a, e)) for a in atoms]
    for theory, lhs, rhs, pairs in [
        (WORDS, "a.a.a", "a", [("a.a", "a")]),
        (WORDS, "b", "a.b", [("b", "a.b")]),
        (MULTISETS, "a.a.b", "b", [("a", "1")]),
        (POMSETS, "a || a || a", "a", [("a || a", "a")]),
        (TREES, "f(x, c)", "g(x)", [("f(x, c)", "g(x)")]),
    ]:
        H = hyps(theory, *pairs)
        Q = naive_axioms(theory)
        out.append((theory, Q, H, prove_inclusion_fixpointfree(parse_expr(lhs, theory), parse_expr(rhs, theory), H,
                                                               theory, Q=Q)))
    b = parse_expr("b", MULTISETS)
    witnesses = [
        (ka_transitive(), WORDS, ["a.b", "(a + b)*"]),
        (bika_seq_transitive(), POMSETS, ["a || b"]),
        (bika_par_transitive(), POMSETS, ["a.b"]),
        (cka_leq_one(b), MULTISETS, ["a", "a*.b"]),
        (cka_hoare_zero(parse_expr("b.b", MULTISETS)), MULTISETS, ["a + b"]),
        (cka_expand(), MULTISETS, ["a.a.(a.a)*", "(a + b)*"]),
        (tree_hoare_zero(SMALL_TREES, parse_expr("f(c, c)", SMALL_TREES)), SMALL_TREES, ["f(x, c)"]),
    ]
    for w, theory, texts in witnesses:
        for t in texts:
            q = w.prove(parse_expr(t, theory))
            out += [(theory, w.src.Q, w.src.hypotheses, q.fwd), (theory, w.src.Q, w.src.hypotheses, q.bwd)]
    session, queries = parse_kah("theory monoid; vars a b; hyp a.a <= a; prove a.a.a <= a + b;")
    verdict = run(session, queries)[0]
    out.append((session.theory, session.Q, session.hypotheses,
                derivation_from_json(verdict.witness, session.theory)))
    return out


def test_criterion_4_soundness():
    start = time.time()
    checked = bad = 0
    first = ""
    for theory, Q, H, d in gather_derivations():
        assert check_derivation(Q, H, d)
        report = 5 if theory.kind == "bimonoid" else 8
        found = soundness.violations(Q, H, d, theory, report, 8, limit=25)
        checked += 1
        if found and not first:
            first = f" first: {found[0]}"
        bad += len(found)
    took = time.time() - start
    record(4, bad == 0, f"{checked} accepted derivations, {bad} semantic violations ({took:.1f}s){first}")


# --- 5: KA transitivity -----------------------------------------------------------------------

def test_criterion_5_ka_transitive():
    w = ka_transitive()
    H = w.src.hypotheses
    good = 0
    es = corpus(WORDS, 100, seed=5, size=(1, 8))
    for e in es:
        same = closed_lang_bounded(e, H, WORDS, 6, 8).atoms == lang_bounded(w.r(e), WORDS, 6).atoms
        q = w.prove(e)
        proofs = check_derivation(w.src.Q, H, q.fwd) and check_derivation(w.src.Q, H, q.bwd)
        good += same and bool(proofs) and alpha_equal(q.lhs, w.r(e)) and alpha_equal(q.rhs, e)
    record(5, good == len(es), f"{good}/{len(es)} expressions with equal closure and checked proofs")


# --- 6: cKA expansion -------------------------------------------------------------------------

def test_criterion_6_cka_expand():
    w = cka_expand()
    e = parse_expr("a.a.(a.a)*", MULTISETS)
    closed = closed_lang_bounded(e, w.src.hypotheses, MULTISETS, 6, 8).atoms
    worked = (closed == frozenset(("a",) * k for k in range(1, 7))
              and alpha_equal(w.r(e), parse_expr("(a.(1 + a)).(1 + a + a.a)*", MULTISETS))
              and lang_bounded(w.r(e), MULTISETS, 6).atoms == closed)
    es = corpus(MULTISETS, 50, seed=6, size=(1, 8), zeros=True)
    rep = check_reduction(w, es, BoundConfig(6, 8))
    passed = len(es) - len(rep.failures())
    record(6, worked and rep.passed, f"worked instance {'exact' if worked else 'MISMATCH'} ({show(w.r(e))}); "
                                     f"{passed}/{len(es)} random expressions pass")


# --- 7: tree Hoare reduction ------------------------------------------------------------------

def test_criterion_7_tree_hoare_zero():
    e0 = parse_expr("f(c, c)", SMALL_TREES)
    w = tree_hoare_zero(SMALL_TREES, e0)
    es = corpus(SMALL_TREES, 20, seed=7, size=(2, 7), fragment=Fragment.FULL)
    good = 0
    for e in es:
        closed = closed_lang_bounded(e, w.src.hypotheses, SMALL_TREES, 4, 4, "depth")
        image = lang_bounded(w.r(e), SMALL_TREES, 4, "depth")
        good += closed.exact_below_bound and closed.atoms == image.atoms
    record(7, good == len(es), f"{good}/{len(es)} tree expressions equal at depth 4")


# --- 8: decision procedures against the bounded semantics -------------------------------------

def test_criterion_8_cross_validation():
    start = time.time()
    parts, ok = [], True
    for theory, fragment, bound in [(WORDS, Fragment.KLEENE_STAR, 8), (MULTISETS, Fragment.KLEENE_STAR, 8),
                                    (TREES, Fragment.FULL, 4)]:
        es = corpus(theory, 100, seed=8, size=(1, 10), fragment=fragment)
        agree = sum(cross_validate(e, theory, bound).agree for e in es)
        ok &= agree == len(es)
        parts.append(f"{theory.kind} {agree}/{len(es)}")
    took = time.time() - start
    record(8, ok and took < 120, f"{', '.join(parts)} ({took:.1f}s)")


# --- 9: Pilling normal form -------------------------------------------------------------------

def test_criterion_9_pilling():
    es = corpus(MULTISETS, 100, seed=9, size=(1, 10), zeros=True)
    good = 0
    for e in es:
        nf = normal_form_expr(e, MULTISETS)
        good += (lang_bounded(nf, MULTISETS, 8).atoms == lang_bounded(e, MULTISETS, 8).atoms
                 and oracle.multisets_upto(nf, "ab", 5) == oracle.multisets_upto(e, "ab", 5))
    fact = parse_expr("(a+b)*", MULTISETS)
    exact = (show(normal_form_expr(fact, MULTISETS)) == "a*.b*"
             and pilling_normal_form(fact) == [((), [("a",), ("b",)])])
    record(9, good == len(es) and exact, f"{good}/{len(es)} normal forms equal at size 8; (a+b)* -> "
                                         f"{show(normal_form_expr(fact, MULTISETS))}")


# --- 10: closure commutation ------------------------------------------------------------------

CKA3 = TheoryConfig.cmonoid(("a", "b", "c"))


def test_criterion_10_commutation():
    start = time.time()
    reports = [("biKA", check_closure_commutation(hyps(POMSETS, ("a.a", "a")), hyps(POMSETS, ("b || b", "b")),
                                                  POMSETS, bound=6))]
    zero = hyps(CKA3, ("b.b", "0"))
    for other in [("a", "a.a"), ("c", "1"), ("a.b", "b"), ("c.c", "a")]:
        reports.append((f"cKA vs {other[0]}<={other[1]}",
                        check_closure_commutation(zero, hyps(CKA3, other), CKA3, bound=6)))
    failures = [name for name, r in reports if not r.holds or r.approximate]
    seeds = sum(r.seeds for _, r in reports)
    took = time.time() - start
    record(10, not failures, f"{len(reports)} checks over {seeds} singleton seeds, failures: {failures or 'none'} "
                             f"({took:.1f}s)")
