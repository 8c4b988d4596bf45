import itertools

import pytest
from hypothesis import given

import oracle
from kah.decision import (
    FragmentViolation, LinearSet, ResourceError, SemilinearSet, cross_validate, expr_to_tree_automaton, normal_form_expr, parikh,
    pilling_normal_form, regex_to_nfa, semilinear_inclusion_bounded, semilinear_member, tree_inclusion,
    word_inclusion,
)
from kah.expressions import Fragment, parse_expr, show
from kah.sampling import corpus
from kah.theory import TheoryConfig
from strategies import kleene_exprs, tree_exprs

MONOID = TheoryConfig.monoid(("a", "b"))
CMONOID = TheoryConfig.cmonoid(("a", "b"))
TREES = TheoryConfig.free([("f", 2), ("g", 1), ("c", 0)], ["x"])


def P(text, theory=MONOID):
    return parse_expr(text, theory)


# --- words -------------------------------------------------------------------------------

@given(kleene_exprs())
def test_nfa_matches_oracle(e):
    aut = regex_to_nfa(e, MONOID)
    for n in range(6):
        for w in itertools.product("ab", repeat=n):
            assert aut.accepts(w) == ("".join(w) in oracle.words_upto(e, "ab", n))


@given(kleene_exprs(max_leaves=5), kleene_exprs(max_leaves=5))
def test_word_inclusion_matches_oracle(e, f):
    res = word_inclusion(e, f, MONOID)
    le, lf = oracle.words_upto(e, "ab", 6), oracle.words_upto(f, "ab", 6)
    if res.holds:
        assert le <= lf
    else:
        w = oracle.word_of(res.counterexample)
        assert w in oracle.words_upto(e, "ab", len(w)) and w not in oracle.words_upto(f, "ab", len(w))
        shorter = {u for u in le - lf if len(u) < len(w)}
        assert not shorter


@pytest.mark.parametrize("lhs,rhs,holds,witness", [
    ("(a+b)*", "(a*.b*)*", True, None),
    ("(a+b)*", "a*.b*", False, "ba"),
    ("a*", "a.a*", False, ""),
    ("a.(b.a)*", "(a.b)*.a", True, None),
    ("(a.b)*.a", "a.(b.a)*", True, None),
    ("(a.a)*", "a*", True, None),
    ("a*", "(a.a)*", False, "a"),
])
def test_word_inclusion_frozen(lhs, rhs, holds, witness):
    res = word_inclusion(P(lhs), P(rhs), MONOID)
    assert res.holds == holds
    if witness is not None:
        assert oracle.word_of(res.counterexample) == witness


def test_word_fragment_violation():
    with pytest.raises(FragmentViolation):
        regex_to_nfa(P("mu z. a + z.z"), MONOID)


# --- trees -------------------------------------------------------------------------------

@given(tree_exprs())
def test_tree_automaton_matches_oracle(e):
    aut = expr_to_tree_automaton(e, TREES)
    lang = oracle.trees_upto(e, 3)
    for t in TREES.enumerate_atoms(3, "depth"):
        assert aut.accepts(t) == (oracle.tree_of(t) in lang)


@given(tree_exprs(max_leaves=4), tree_exprs(max_leaves=4))
def test_tree_inclusion_matches_oracle(e, f):
    res = tree_inclusion(e, f, TREES)
    le, lf = oracle.trees_upto(e, 3), oracle.trees_upto(f, 3)
    if res.holds:
        assert le <= lf
    else:
        t = oracle.tree_of(res.counterexample)
        assert t in le and t not in lf or oracle.depth(t) > 3
        assert all(oracle.depth(u) >= oracle.depth(t) for u in le - lf)


@pytest.mark.parametrize("lhs,rhs,holds", [
    ("mu z. x + f(z, c)", "mu z. x + f(z, c) + f(c, z)", True),
    ("mu z. x + f(z, z)", "mu z. x + f(z, x)", False),
    ("f(x, c) + g(x)", "g(x) + f(x, c)", True),
])
def test_tree_inclusion_frozen(lhs, rhs, holds):
    assert tree_inclusion(P(lhs, TREES), P(rhs, TREES), TREES).holds == holds


def test_tree_counterexample_minimal():
    res = tree_inclusion(P("mu z. x + f(z, z)", TREES), P("mu z. x + f(z, x)", TREES), TREES)
    assert repr(res.counterexample) == "f(x, f(x, x))"


def test_tree_resource_cap():
    e = P("mu z. x + f(z, z) + g(z)", TREES)
    f = P("mu z. x + c + f(z, z) + g(z)", TREES)
    assert tree_inclusion(e, f, TREES).holds
    with pytest.raises(ResourceError):
        tree_inclusion(e, f, TREES, cap=1)


# --- multisets ------------------------------------------------------------------------------

@given(kleene_exprs(max_leaves=6))
def test_parikh_matches_oracle(e):
    s = parikh(e, CMONOID)
    lang = oracle.multisets_upto(e, "ab", 5)
    for i in range(6):
        for j in range(6 - i):
            assert semilinear_member((i, j), s) == ("a" * i + "b" * j in lang)


@given(kleene_exprs(max_leaves=6))
def test_normal_form_is_equivalent(e):
    nf = normal_form_expr(e, CMONOID)
    assert oracle.multisets_upto(nf, "ab", 5) == oracle.multisets_upto(e, "ab", 5)


@pytest.mark.parametrize("text,shown", [
    ("(a+b)*", "a*.b*"),
    ("a*.b*", "a*.b*"),
    ("(a.b)*", "(a.b)*"),
    ("0", "0"),
    ("a + a", "a"),
])
def test_normal_form_frozen(text, shown):
    assert show(normal_form_expr(P(text, CMONOID), CMONOID)) == shown


def test_pilling_summands():
    assert pilling_normal_form(P("(a+b)*", CMONOID)) == [((), [("a",), ("b",)])]
    assert pilling_normal_form(P("a.(a.b)*", CMONOID)) == [(("a",), [("a", "b")])]


def test_linear_set_membership():
    ls = LinearSet((1, 0), ((2, 0), (0, 3)))
    s = SemilinearSet(("a", "b"), (ls,))
    members = [v for v in itertools.product(range(4), range(4)) if semilinear_member(v, s)]
    assert members == [(1, 0), (1, 3), (3, 0), (3, 3)]


def test_semilinear_inclusion_bounded():
    s1, s2 = parikh(P("a*.b*", CMONOID), CMONOID), parikh(P("(a.b)*", CMONOID), CMONOID)
    res = semilinear_inclusion_bounded(s1, s2, 4)
    assert not res.holds and res.counterexample == (0, 1)
    assert semilinear_inclusion_bounded(s2, s1, 6).holds


# --- cross validation -------------------------------------------------------------------------

@pytest.mark.parametrize("theory,fragment,bound", [
    (MONOID, Fragment.KLEENE_STAR, 6),
    (CMONOID, Fragment.KLEENE_STAR, 6),
    (TREES, Fragment.FULL, 3),
])
def test_cross_validate(theory, fragment, bound):
    for e in corpus(theory, 15, seed=3, size=(1, 9), fragment=fragment):
        rep = cross_validate(e, theory, bound)
        assert rep.agree, (show(e), rep.disagreement)


def test_cross_validate_needs_procedure():
    with pytest.raises(ValueError):
        cross_validate(P("a"), TheoryConfig.bimonoid(("a",)), 2)
