import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracle
from kah.expressions import Var, parse_expr, plus, seq
from kah.semantics import (
    ClosureEngine, closed_lang_bounded, default_work_bound, finite_within, inclusion_check, lang_bounded,
    max_measure,
)
from kah.theory import TheoryConfig
from strategies import kleene_exprs, tree_exprs

MONOID = TheoryConfig.monoid(("a", "b"))
CMONOID = TheoryConfig.cmonoid(("a", "b"))
BIMONOID = TheoryConfig.bimonoid(("a", "b"))
TREES = TheoryConfig.free([("f", 2), ("g", 1), ("c", 0)], ["x"])


def words(theory, e, n):
    return {oracle.word_of(a) for a in lang_bounded(e, theory, n).atoms}


def hyps(theory, *pairs):
    return [(parse_expr(l, theory), parse_expr(r, theory)) for l, r in pairs]


# frozen from the oracle in tests/oracle.py
@pytest.mark.parametrize("text,expected", [
    ("(a.b)* + b", {"", "b", "ab", "abab"}),
    ("(a+b.b)*", {"", "a", "aa", "bb", "aaa", "abb", "bba", "aaaa", "aabb", "abba", "bbaa", "bbbb"}),
    ("a*.b.a*", {"b", "ab", "ba", "aab", "aba", "baa", "aaab", "aaba", "abaa", "baaa"}),
    ("0.a + 1", {""}),
])
def test_word_languages_frozen(text, expected):
    assert words(MONOID, parse_expr(text, MONOID), 4) == expected


@pytest.mark.parametrize("text,expected", [
    ("(a.b)*", {"", "ab", "aabb"}),
    ("(a + b.b)*.a", {"a", "aa", "aaa", "abb", "aaaa", "aabb"}),
])
def test_multiset_languages_frozen(text, expected):
    assert words(CMONOID, parse_expr(text, CMONOID), 4) == expected


def test_tree_language_frozen():
    e = parse_expr("mu z. x + f(z, c)", TREES)
    got = {oracle.tree_of(a) for a in lang_bounded(e, TREES, 3, "depth").atoms}
    assert got == {"x", ("f", "x", ("c",)), ("f", ("f", "x", ("c",)), ("c",))}


def test_bimonoid_language():
    e = parse_expr("(a || b).a^||", BIMONOID)
    shown = sorted(BIMONOID.show(x) for x in lang_bounded(e, BIMONOID, 4).atoms)
    assert shown == ["(a||b).(a||a)", "(a||b).a", "a||b"]


@given(kleene_exprs())
def test_words_agree_with_oracle(e):
    assert words(MONOID, e, 5) == oracle.words_upto(e, "ab", 5)


@given(kleene_exprs(max_leaves=6))
def test_multisets_agree_with_oracle(e):
    assert words(CMONOID, e, 5) == oracle.multisets_upto(e, "ab", 5)


@given(tree_exprs())
def test_trees_agree_with_oracle(e):
    got = {oracle.tree_of(a) for a in lang_bounded(e, TREES, 3, "depth").atoms}
    assert got == oracle.trees_upto(e, 3)


@given(kleene_exprs(), st.integers(0, 6))
def test_bound_monotone(e, n):
    small, big = lang_bounded(e, MONOID, n).atoms, lang_bounded(e, MONOID, n + 1).atoms
    assert small == {w for w in big if len(w) <= n}


def test_max_measure_and_finiteness():
    assert max_measure(parse_expr("a.b + a", MONOID), MONOID, 10) == 2
    assert max_measure(parse_expr("a*", MONOID), MONOID, 10) == 10
    assert max_measure(parse_expr("0.a", MONOID), MONOID, 10) is None
    assert finite_within(parse_expr("(a + 1).b", MONOID), MONOID, 2)
    assert not finite_within(parse_expr("b.a*", MONOID), MONOID, 5)
    assert max_measure(parse_expr("f(x, g(c))", TREES), TREES, 10, "depth") == 3


# --- closures -------------------------------------------------------------------------

def test_closure_words_against_oracle_frozen():
    got = closed_lang_bounded(parse_expr("a.b", MONOID), hyps(MONOID, ("b", "a")), MONOID, 4, 4)
    assert {oracle.word_of(w) for w in got.atoms} == {"ab", "bb"}
    got = closed_lang_bounded(parse_expr("a.a.b + b", MONOID), hyps(MONOID, ("a.a", "a")), MONOID, 5, 5)
    assert {oracle.word_of(w) for w in got.atoms} == {"b", "aab", "aaab", "aaaab"}
    got = closed_lang_bounded(parse_expr("a.b", CMONOID), hyps(CMONOID, ("a.a", "b")), CMONOID, 5, 5)
    assert {oracle.word_of(w) for w in got.atoms} == {"aaa", "ab"}


FINITE_HYPS = [("b", "a"), ("a.a", "a"), ("a", "b.b"), ("b.a", "a.b"), ("0", "a.b"), ("a", "1")]


@given(kleene_exprs(zeros=False, max_leaves=5), st.lists(st.sampled_from(FINITE_HYPS), min_size=1, max_size=2))
def test_word_closure_agrees_with_oracle(e, pairs):
    hs = hyps(MONOID, *pairs)
    got = closed_lang_bounded(e, hs, MONOID, 4, 4)
    finite = [(oracle.words_upto(l, "ab", 4), oracle.words_upto(r, "ab", 4)) for l, r in hs]
    expected = oracle.closure_words(oracle.words_upto(e, "ab", 4), finite, "ab", 4)
    assert {oracle.word_of(w) for w in got.atoms} == expected


@given(kleene_exprs(zeros=False, max_leaves=5), st.lists(st.sampled_from(FINITE_HYPS), min_size=1, max_size=2))
def test_multiset_closure_agrees_with_oracle(e, pairs):
    hs = hyps(CMONOID, *pairs)
    got = closed_lang_bounded(e, hs, CMONOID, 5, 5)
    finite = [(oracle.multisets_upto(l, "ab", 5), oracle.multisets_upto(r, "ab", 5)) for l, r in hs]
    expected = oracle.closure_multisets(oracle.multisets_upto(e, "ab", 5), finite, "ab", 5)
    assert {oracle.word_of(w) for w in got.atoms} == expected


CLOSURE_HYPS = [("a.a", "a"), ("b", "a.b"), ("a", "b + 1"), ("a.b", "b.a")]


@given(kleene_exprs(max_leaves=5), kleene_exprs(max_leaves=4), st.sampled_from(CLOSURE_HYPS))
def test_closure_operator_laws(e, f, pair):
    hs = hyps(MONOID, pair)
    n, w = 4, 6
    base = lang_bounded(e, MONOID, n).atoms
    closed = closed_lang_bounded(e, hs, MONOID, n, w).atoms
    assert base <= closed
    bigger = closed_lang_bounded(plus(e, f), hs, MONOID, n, w).atoms
    assert closed <= bigger
    engine = ClosureEngine(MONOID, hs, n)
    again = engine.closure(closed)
    assert again == closed or engine.approximate


@given(kleene_exprs(max_leaves=4), st.sampled_from(CLOSURE_HYPS), st.sampled_from(["a", "b", "a.b"]))
def test_closure_is_contextual(e, pair, ctx):
    # u.H*(L) is contained in H*(u.L)
    hs = hyps(MONOID, pair)
    u = parse_expr(ctx, MONOID)
    inner = closed_lang_bounded(e, hs, MONOID, 5, 7).atoms
    outer = closed_lang_bounded(seq(u, e), hs, MONOID, 7, 7).atoms
    prefix = tuple(lang_bounded(u, MONOID, 3).atoms)[0]
    assert {prefix + w for w in inner if len(prefix + w) <= 5} <= outer


@pytest.mark.parametrize("theory,pairs", [
    (MONOID, [("a.a", "a"), ("b", "a + 1")]),
    (CMONOID, [("a", "a.b"), ("b.b", "0")]),
    (BIMONOID, [("a || a", "a"), ("b", "a.a")]),
])
def test_closed_languages_validate_hypotheses(theory, pairs):
    hs = hyps(theory, *pairs)
    for lhs, rhs in hs:
        res = inclusion_check(lhs, rhs, hs, theory, 4, 6)
        assert res.holds


def test_inclusion_refutation_witness():
    a = Var("a")
    res = inclusion_check(parse_expr("a*", MONOID), seq(a, parse_expr("a*", MONOID)), [], MONOID, 6, 8)
    assert not res.holds and res.counterexample == ()
    res = inclusion_check(parse_expr("a.a", MONOID), a, hyps(MONOID, ("a.a", "a")), MONOID, 6, 8)
    assert res.holds and not res.approximate


def test_approximation_flag_for_infinite_rhs():
    res = closed_lang_bounded(parse_expr("a", MONOID), hyps(MONOID, ("b", "a*")), MONOID, 3, 4)
    assert not res.exact_below_bound


def test_work_bound_validation():
    assert default_work_bound(6, hyps(MONOID, ("a.a", "a"))) == 8
    with pytest.raises(ValueError):
        closed_lang_bounded(parse_expr("a", MONOID), [], MONOID, 6, 4)
    with pytest.raises(ValueError):
        lang_bounded(parse_expr("mu z. a + z", MONOID).body, MONOID, 3)


def test_hoare_zero_hypothesis_removes_nothing_but_adds_contexts():
    got = closed_lang_bounded(parse_expr("a", MONOID), hyps(MONOID, ("b", "0")), MONOID, 2, 2)
    assert {oracle.word_of(w) for w in got.atoms} == {"a", "b", "ab", "ba", "bb"}
