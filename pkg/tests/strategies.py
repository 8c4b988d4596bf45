"""Hypothesis strategies for expressions."""

from hypothesis import strategies as st

from kah.expressions import UNIT, ZERO, Plus, Sym, Var, par, parstar, star
from kah.theory import SEQ


def kleene_exprs(letters=("a", "b"), zeros=True, parallel=False, max_leaves=7):
    """Kleene-star expressions over the monoid (or bimonoid) signature."""
    leaves = [Var(x) for x in letters] + [UNIT] + ([ZERO] if zeros else [])

    def extend(ch):
        options = [st.builds(Plus, ch, ch), st.builds(lambda x, y: Sym(SEQ, (x, y)), ch, ch), st.builds(star, ch)]
        if parallel:
            options += [st.builds(lambda x, y: par(x, y), ch, ch), st.builds(parstar, ch)]
        return st.one_of(*options)

    return st.recursive(st.sampled_from(leaves), extend, max_leaves=max_leaves)


def tree_exprs(max_leaves=6):
    """Fixpoint-free expressions over f/2, g/1, c and x."""
    leaves = st.sampled_from([Var("x"), Sym("c", ()), ZERO])

    def extend(ch):
        return st.one_of(st.builds(Plus, ch, ch), st.builds(lambda x, y: Sym("f", (x, y)), ch, ch),
                         st.builds(lambda x: Sym("g", (x,)), ch))

    return st.recursive(leaves, extend, max_leaves=max_leaves)

