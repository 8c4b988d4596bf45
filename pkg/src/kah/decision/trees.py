"""Bottom-up tree automata for expressions over a free theory."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..expressions import Expr, Mu, Plus, RecVar, Sym, Var, Zero
from ..theory import Term, TheoryConfig, app, var


class ResourceError(RuntimeError):
    """The determinised product exceeded the state budget."""


@dataclass(frozen=True)
class TreeAutomaton:
    """``rules`` maps ``(symbol, child states)`` to a set of states; variables are nullary symbols."""

    states: tuple
    symbols: tuple
    rules: dict
    accepting: frozenset

    def run(self, t: Term) -> frozenset:
        kids = [self.run(a) for a in t.args]
        out = set()
        for combo in itertools.product(*kids):
            out |= self.rules.get((t.head, tuple(combo)), frozenset())
        return frozenset(out)

    def accepts(self, t: Term) -> bool:
        return bool(self.run(t) & self.accepting)

    def to_text(self) -> str:
        lines = [f"states {len(self.states)}", f"accepting {' '.join(map(str, sorted(self.accepting)))}"]
        for (s, kids), targets in sorted(self.rules.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            for q in sorted(targets):
                lines.append(f"{s}({', '.join(map(str, kids))}) -> {q}")
        return "\n".join(lines)


def expr_to_tree_automaton(e: Expr, theory: TheoryConfig) -> TreeAutomaton:
    """One state per subexpression occurrence; sums and fixpoints become silent moves."""
    if theory.kind != "free":
        raise ValueError("tree automata need a free theory")
    rules: dict = {}
    eps: dict = {}
    counter = itertools.count()

    def build(g: Expr, binders: dict) -> int:
        q = next(counter)
        if isinstance(g, Var):
            rules.setdefault((g.name, ()), set()).add(q)
        elif isinstance(g, Sym):
            kids = tuple(build(a, binders) for a in g.args)
            rules.setdefault((g.name, kids), set()).add(q)
        elif isinstance(g, Plus):
            for child in (build(g.left, binders), build(g.right, binders)):
                eps.setdefault(child, set()).add(q)
        elif isinstance(g, Mu):
            body = build(g.body, {**binders, g.var: q})
            eps.setdefault(body, set()).add(q)
        elif isinstance(g, RecVar):
            eps.setdefault(binders[g.name], set()).add(q)
        elif not isinstance(g, Zero):
            raise TypeError(f"not an expression: {g!r}")
        return q

    root = build(e, {})
    n = next(counter)
    closure = {}
    for q in range(n):
        seen = {q}
        todo = [q]
        while todo:
            p = todo.pop()
            for r in eps.get(p, ()):
                if r not in seen:
                    seen.add(r)
                    todo.append(r)
        closure[q] = seen
    closed_rules = {}
    for key, targets in rules.items():
        out = set()
        for q in targets:
            out |= closure[q]
        closed_rules[key] = frozenset(out)
    symbols = tuple(sorted(theory.signature.symbols) + [(x, 0) for x in theory.variables])
    return TreeAutomaton(tuple(range(n)), symbols, closed_rules, frozenset([root]))


@dataclass(frozen=True)
class TreeResult:
    holds: bool
    counterexample: Term | None = None

    def __bool__(self) -> bool:
        return self.holds


def automaton_tree_inclusion(a: TreeAutomaton, b: TreeAutomaton, cap: int = 10_000) -> TreeResult:
    """Explore pairs (state of ``a``, subset of ``b``) by depth; the first accepting-rejecting pair is minimal."""
    by_symbol: dict = {}
    for (s, kids), targets in a.rules.items():
        by_symbol.setdefault(s, []).append((kids, targets))
    found: dict = {}
    frontier = True
    while frontier:
        new: dict = {}
        by_state: dict = {}
        for (p, s), t in found.items():
            by_state.setdefault(p, []).append((s, t))
        for sym in sorted(by_symbol):
            for kids, targets in by_symbol[sym]:
                options = [by_state.get(k, []) for k in kids]
                if any(not o for o in options):
                    continue
                for combo in itertools.product(*options):
                    subset = set()
                    for qs in itertools.product(*(c[0] for c in combo)):
                        subset |= b.rules.get((sym, qs), frozenset())
                    subset = frozenset(subset)
                    tree = app(sym, *(c[1] for c in combo)) if combo else _leaf(sym)
                    for p in targets:
                        key = (p, subset)
                        if key in found or key in new:
                            continue
                        new[key] = tree
                        if p in a.accepting and not (subset & b.accepting):
                            return TreeResult(False, tree)
        found.update(new)
        if len(found) > cap:
            raise ResourceError(f"determinised product exceeded {cap} states")
        frontier = bool(new)
    return TreeResult(True)


def _leaf(name: str) -> Term:
    return app(name)


def tree_inclusion(e: Expr, f: Expr, theory: TheoryConfig, cap: int = 10_000) -> TreeResult:
    """Exact inclusion of tree languages with a counterexample of minimal depth."""
    a = expr_to_tree_automaton(e, theory)
    b = expr_to_tree_automaton(f, theory)
    res = automaton_tree_inclusion(a, b, cap)
    if res.counterexample is not None:
        return TreeResult(False, _as_atom(res.counterexample, theory))
    return res


def _as_atom(t: Term, theory: TheoryConfig) -> Term:
    if not t.args and t.head in theory.variables:
        return var(t.head)
    return Term(t.head, tuple(_as_atom(a, theory) for a in t.args))
