import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

import soundness
from kah.expressions import UNIT, ZERO, Fragment, Plus, Var, parse_expr, seq, star
from kah.proofs import (
    Derivation, Eq, Kit, MembershipProver, NotAMember, NotFound, ProofError, axiomatisation, check_derivation,
    countermodel_check, countermodel_eval, derivation_from_json, derivation_to_json, instance_axioms,
    naive_axioms, prove_inclusion_fixpointfree, prove_membership, sum_of_terms,
)
from kah.proofs.core import aeq
from kah.proofs.countermodel import GENERATORS, STAR_EL, TOP, mul, power
from kah.sampling import corpus
from kah.semantics import lang_bounded
from kah.theory import SEQ, TheoryConfig
from strategies import kleene_exprs

MONOID = TheoryConfig.monoid(("a", "b"))
CMONOID = TheoryConfig.cmonoid(("a", "b"))
BIMONOID = TheoryConfig.bimonoid(("a", "b"))
TREES = TheoryConfig.free([("f", 2), ("g", 1), ("c", 0)], ["x"])
a, b = Var("a"), Var("b")


def P(text, theory=MONOID):
    return parse_expr(text, theory)


# --- axiomatisations ---------------------------------------------------------------------

def test_naive_axiom_names():
    Q = naive_axioms(MONOID)
    names = set(Q.sentences)
    assert {"zero", "idem", "inl", "inr", "annih[.,1]", "annih[.,2]", "dist[.,1]", "dist[.,2]"} <= names
    assert {"seq-assoc", "seq-assoc-rev", "seq-unit-l", "seq-unit-r"} <= names
    assert "fix" in Q and "ind" in Q and "star-unfold-l" not in Q


@pytest.mark.parametrize("name,present,absent", [
    ("KA", ["star-unfold-l", "star-unfold-r", "star-ind-l", "star-ind-r"], ["fix", "seq-comm"]),
    ("leftKA", ["star-unfold-l", "star-ind-l"], ["star-unfold-r", "star-ind-r"]),
    ("cKA", ["seq-comm", "star-ind-r"], ["par-comm"]),
    ("biKA", ["pstar-unfold-l", "pstar-ind-l", "par-comm"], ["pstar-ind-r"]),
])
def test_instance_axioms(name, present, absent):
    Q = instance_axioms(name, ("a", "b"))
    assert all(n in Q for n in present)
    assert not any(n in Q for n in absent)


def test_axiomatisation_theory_mismatch():
    with pytest.raises(ValueError):
        axiomatisation("cKA", MONOID)
    with pytest.raises(KeyError):
        instance_axioms("RKA")


def test_ind_schema_premise():
    Q = naive_axioms(MONOID)
    m = star(a)
    s = Q.instantiate("ind", (m, b))
    assert s.conclusion == (m, b)
    assert s.premises[0] == (Plus(UNIT, seq(a, b)), b)
    with pytest.raises(ValueError):
        Q.instantiate("ind", (a, b))


# --- the checker -------------------------------------------------------------------------

def test_checker_accepts_small_proofs():
    Q = naive_axioms(MONOID)
    kit = Kit(Q, [(seq(a, a), a)])
    d = kit.trans(kit.hyp(seq(a, a), a), kit.inl(a, b))
    assert check_derivation(Q, [(seq(a, a), a)], d)
    assert d.lhs == seq(a, a) and d.rhs == Plus(a, b)


@pytest.mark.parametrize("make,reason", [
    (lambda: Derivation("refl", Var("a"), Var("b")), "reflexivity"),
    (lambda: Derivation("axiom", Var("a"), Plus(Var("b"), Var("a")), axiom="inl", theta=(("x", Var("a")), ("y", Var("b")))),
     "instance"),
    (lambda: Derivation("hyp", Var("a"), Var("b"), index=0), "out of range"),
    (lambda: Derivation("axiom", Var("a"), Var("a"), axiom="nope"), "unknown axiom"),
    (lambda: Derivation("bogus", Var("a"), Var("a")), "unknown rule"),
    (lambda: Derivation("trans", Var("a"), Var("b"), (Derivation("refl", Var("a"), Var("a")),
                                                       Derivation("refl", Var("b"), Var("b")))), "middle"),
])
def test_checker_rejects(make, reason):
    res = check_derivation(naive_axioms(MONOID), [], make())
    assert not res and reason in res.reason


def test_checker_rejects_expressions_outside_fragment():
    Q = instance_axioms("KA", ("a",))
    m = parse_expr("mu z. a + z.z", MONOID)
    res = check_derivation(Q, [], Derivation("refl", m, m))
    assert not res and "fragment" in res.reason


def test_checker_rejects_hypothesis_misuse():
    H = [(seq(a, a), a)]
    res = check_derivation(naive_axioms(MONOID), H, Derivation("hyp", a, seq(a, a), index=0))
    assert not res and "verbatim" in res.reason


def test_rejection_path_points_at_bad_node():
    Q = naive_axioms(MONOID)
    good = Derivation("refl", a, a)
    bad = Derivation("refl", a, b)
    res = check_derivation(Q, [], Derivation("trans", a, b, (good, bad)))
    assert not res and res.path == (1,)


# --- serialisation ------------------------------------------------------------------------

@given(kleene_exprs(zeros=False, max_leaves=5))
def test_json_roundtrip(e):
    Q = naive_axioms(MONOID)
    atoms = sorted(lang_bounded(e, MONOID, 3).atoms)
    if not atoms:
        return
    d = prove_membership(atoms[0], e, MONOID, Q)
    data = json.loads(json.dumps(derivation_to_json(d)))
    back = derivation_from_json(data, MONOID)
    assert check_derivation(Q, [], back)
    assert aeq(back.lhs, d.lhs) and aeq(back.rhs, d.rhs) and back.size() == d.size()


# --- membership -------------------------------------------------------------------------

@pytest.mark.parametrize("theory,fragment", [
    (MONOID, Fragment.KLEENE_STAR),
    (CMONOID, Fragment.KLEENE_STAR),
    (BIMONOID, Fragment.BIKLEENE),
    (TREES, Fragment.FULL),
])
def test_membership_prover_accepted(theory, fragment):
    Q = naive_axioms(theory)
    for e in corpus(theory, 12, seed=2, size=(1, 9), fragment=fragment):
        mp = MembershipProver(theory, Q)
        for atom in sorted(lang_bounded(e, theory, 4).atoms, key=theory.atom_key)[:6]:
            d = mp.prove(atom, e)
            assert check_derivation(Q, [], d)
            assert aeq(d.rhs, e)


@pytest.mark.parametrize("name,theory", [("KA", MONOID), ("cKA", CMONOID), ("biKA", BIMONOID)])
def test_membership_over_instance_axioms(name, theory):
    Q = axiomatisation(name, theory)
    fragment = Fragment.BIKLEENE if name == "biKA" else Fragment.KLEENE_STAR
    for e in corpus(theory, 8, seed=4, size=(2, 8), fragment=fragment):
        for atom in sorted(lang_bounded(e, theory, 3).atoms, key=theory.atom_key)[:4]:
            assert check_derivation(Q, [], prove_membership(atom, e, theory, Q))


def test_membership_rejects_non_members():
    with pytest.raises(NotAMember):
        prove_membership(("b",), P("a*"), MONOID)


def test_sum_of_terms():
    atoms, q = sum_of_terms(P("(a + b).(a + 1)"), MONOID)
    assert atoms == [("a",), ("b",), ("a", "a"), ("b", "a")]
    Q = naive_axioms(MONOID)
    assert check_derivation(Q, [], q.fwd) and check_derivation(Q, [], q.bwd)
    assert aeq(q.lhs, P("(a + b).(a + 1)"))


# --- fixpoint-free inclusions ---------------------------------------------------------------

@pytest.mark.parametrize("theory,lhs,rhs,hyps", [
    (MONOID, "a.a.a", "a", [("a.a", "a")]),
    (MONOID, "a.b", "(a + b)*", []),
    (MONOID, "b", "a.b", [("b", "a.b")]),
    (CMONOID, "b.a", "a.b + 0", []),
    (CMONOID, "a.a.b", "b", [("a", "1")]),
    (BIMONOID, "a || a || a", "a", [("a || a", "a")]),
    (TREES, "f(x, c)", "g(x)", [("f(x, c)", "g(x)")]),
])
def test_inclusion_prover_finds_and_checks(theory, lhs, rhs, hyps):
    H = [(P(l, theory), P(r, theory)) for l, r in hyps]
    Q = naive_axioms(theory)
    d = prove_inclusion_fixpointfree(P(lhs, theory), P(rhs, theory), H, theory, Q=Q)
    assert d, d
    assert check_derivation(Q, H, d)
    assert not soundness.violations(Q, H, d, theory, 4, 6)


def test_inclusion_prover_not_found():
    res = prove_inclusion_fixpointfree(P("a.b"), P("b.a"), [], MONOID)
    assert isinstance(res, NotFound) and not res
    with pytest.raises(ValueError):
        prove_inclusion_fixpointfree(P("a*"), P("a*"), [], MONOID)


# --- proof kit ---------------------------------------------------------------------------

def test_kit_star_lemmas_check():
    Q = instance_axioms("KA", ("a", "b"))
    kit = Kit(Q, [])
    for d in (kit.le_star(SEQ, a), kit.one_le_star(SEQ, a), kit.star_star_le(SEQ, a), kit.unfold_l(SEQ, a)):
        assert check_derivation(Q, [], d)
    q = kit.eeq(seq(a, seq(b, a)), seq(seq(a, b), a))
    assert isinstance(q, Eq) and check_derivation(Q, [], q.fwd) and check_derivation(Q, [], q.bwd)


def test_kit_cong_and_errors():
    Q = instance_axioms("KA", ("a", "b"))
    H = [(seq(a, a), a)]
    kit = Kit(Q, H)
    e = P("(a.b)*")
    d = kit.cong(e, {"a": kit.hyp(seq(a, a), a)})
    assert check_derivation(Q, H, d)
    with pytest.raises(ProofError):
        kit.hyp(a, b)


# --- the counter-model ---------------------------------------------------------------------

def test_countermodel_tables():
    assert mul(power(2), power(3)) == power(5)
    assert mul(power(1), STAR_EL) == STAR_EL
    assert mul(STAR_EL, power(1)) == TOP
    assert mul(STAR_EL, power(0)) == STAR_EL
    assert sorted(GENERATORS) == list(GENERATORS)


def test_countermodel_refutes_star_law():
    rep = countermodel_check()
    assert rep.axioms_hold, rep.failures[:3]
    assert str(rep.lhs_value) == "T" and str(rep.rhs_value) == "a*"
    assert rep.refuted and rep.ok


@pytest.mark.parametrize("text,value", [
    ("0*", "1"), ("1*", "1"), ("(a.a)*", "a*"), ("(a*)*", "T"), ("a.a*", "a*"), ("a.a + a", "a^2"),
])
def test_countermodel_stars(text, value):
    assert str(countermodel_eval(P(text))) == value


def test_countermodel_single_variable():
    with pytest.raises(ValueError):
        countermodel_eval(P("a.b"))


# --- soundness of generated derivations ---------------------------------------------------

@given(kleene_exprs(zeros=False, max_leaves=5), st.sampled_from([("a.a", "a"), ("b", "a"), ("a", "b.b")]))
def test_generated_derivations_are_sound(e, pair):
    H = [(P(pair[0]), P(pair[1]))]
    Q = naive_axioms(MONOID)
    mp = MembershipProver(MONOID, Q, H)
    for atom in sorted(lang_bounded(e, MONOID, 3).atoms)[:2]:
        d = mp.prove(atom, e)
        assert not soundness.violations(Q, H, d, MONOID, 5, 6, limit=15)
    lhs = parse_expr(pair[0], MONOID)
    d = prove_inclusion_fixpointfree(lhs, P(pair[1]), H, MONOID, Q=Q)
    assert d and not soundness.violations(Q, H, d, MONOID, 5, 6, limit=15)


def test_zero_lemma():
    Q = naive_axioms(MONOID)
    kit = Kit(Q, [])
    d = kit.zero_le(a)
    assert check_derivation(Q, [], d) and d.lhs == ZERO
