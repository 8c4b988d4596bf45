"""Exact decision procedures: word automata, tree automata and semilinear sets."""

from __future__ import annotations

from dataclasses import dataclass

from ..expressions import Expr
from ..semantics import lang_bounded
from ..theory import TheoryConfig
from .commutative import (
    BoundedInclusion, LinearSet, SemilinearSet, normal_form_expr, parikh, pilling_normal_form,
    semilinear_inclusion_bounded, semilinear_member,
)
from .trees import ResourceError, TreeAutomaton, TreeResult, expr_to_tree_automaton, tree_inclusion
from .words import FragmentViolation, WordAutomaton, WordResult, regex_to_nfa, word_inclusion


@dataclass(frozen=True)
class CrossReport:
    method: str
    checked: int
    agree: bool
    disagreement: object = None


def cross_validate(e: Expr, theory: TheoryConfig, bound: int) -> CrossReport:
    """Compare the theory's decision procedure with the bounded semantics on every atom up to ``bound``.

    Words and multisets are measured by size, trees by depth.
    """
    if theory.kind == "monoid":
        aut = regex_to_nfa(e, theory)
        method, measure = "word-automaton", "size"

        def member(a):
            return aut.accepts(a)
    elif theory.kind == "cmonoid":
        s = parikh(e, theory)
        method, measure = "semilinear", "size"

        def member(a):
            return semilinear_member(tuple(a.count(x) for x in theory.variables), s)
    elif theory.kind == "free":
        aut = expr_to_tree_automaton(e, theory)
        method, measure = "tree-automaton", "depth"

        def member(a):
            return aut.accepts(a)
    else:
        raise ValueError(f"no decision procedure for the {theory.kind} theory")
    lang = lang_bounded(e, theory, bound, measure).atoms
    universe = theory.enumerate_atoms(bound, measure)
    for a in universe:
        if member(a) != (a in lang):
            return CrossReport(method, len(universe), False, a)
    return CrossReport(method, len(universe), True)


__all__ = [
    "BoundedInclusion", "CrossReport", "FragmentViolation", "LinearSet", "ResourceError", "SemilinearSet",
    "TreeAutomaton", "TreeResult", "WordAutomaton", "WordResult", "cross_validate", "expr_to_tree_automaton",
    "normal_form_expr", "parikh", "pilling_normal_form", "regex_to_nfa", "semilinear_inclusion_bounded",
    "semilinear_member", "tree_inclusion", "word_inclusion",
]
