"""Word automata from regular expressions and antichain inclusion."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from ..expressions import Expr, Mu, Plus, Sym, Var, Zero, show, star_body
from ..theory import ONE, SEQ, TheoryConfig


class FragmentViolation(ValueError):
    """The expression is not a regular expression."""


# Regular expressions as tuples: ("0",), ("1",), ("c", x), ("+", r, s), (".", r, s), ("*", r).
R0 = ("0",)
R1 = ("1",)


def to_regex(e: Expr) -> tuple:
    if isinstance(e, Var):
        return ("c", e.name)
    if isinstance(e, Zero):
        return R0
    if isinstance(e, Plus):
        return ("+", to_regex(e.left), to_regex(e.right))
    if isinstance(e, Sym):
        if e.name == ONE and not e.args:
            return R1
        if e.name == SEQ and len(e.args) == 2:
            return _cat(to_regex(e.args[0]), to_regex(e.args[1]))
    if isinstance(e, Mu):
        body = star_body(e, SEQ)
        if body is not None:
            return ("*", to_regex(body))
    raise FragmentViolation(f"{show(e)} is outside the regular-expression fragment")


def _cat(r: tuple, s: tuple) -> tuple:
    if r == R0 or s == R0:
        return R0
    if r == R1:
        return s
    if s == R1:
        return r
    return (".", r, s)


def nullable(r: tuple) -> bool:
    k = r[0]
    if k in ("1", "*"):
        return True
    if k in ("0", "c"):
        return False
    if k == "+":
        return nullable(r[1]) or nullable(r[2])
    return nullable(r[1]) and nullable(r[2])


def partial_derivatives(r: tuple, x: str) -> frozenset:
    """Antimirov partial derivatives of ``r`` with respect to the letter ``x``."""
    k = r[0]
    if k in ("0", "1"):
        return frozenset()
    if k == "c":
        return frozenset([R1]) if r[1] == x else frozenset()
    if k == "+":
        return partial_derivatives(r[1], x) | partial_derivatives(r[2], x)
    if k == ".":
        out = {_cat(d, r[2]) for d in partial_derivatives(r[1], x)}
        if nullable(r[1]):
            out |= partial_derivatives(r[2], x)
        return frozenset(out)
    return frozenset(_cat(d, r) for d in partial_derivatives(r[1], x))


@dataclass(frozen=True)
class WordAutomaton:
    states: tuple
    alphabet: tuple
    transitions: dict
    initial: frozenset
    accepting: frozenset

    def step(self, states, x: str) -> frozenset:
        out = set()
        for q in states:
            out |= self.transitions.get((q, x), frozenset())
        return frozenset(out)

    def accepts(self, word) -> bool:
        cur = self.initial
        for x in word:
            cur = self.step(cur, x)
            if not cur:
                return False
        return bool(cur & self.accepting)

    def to_text(self) -> str:
        lines = [f"states {len(self.states)}", f"initial {' '.join(map(str, sorted(self.initial)))}",
                 f"accepting {' '.join(map(str, sorted(self.accepting)))}"]
        for (q, x), targets in sorted(self.transitions.items()):
            for p in sorted(targets):
                lines.append(f"{q} {x} {p}")
        return "\n".join(lines)


def regex_to_nfa(e: Expr, theory: TheoryConfig) -> WordAutomaton:
    """Partial-derivative automaton; states are numbered in discovery order."""
    if theory.kind != "monoid":
        raise FragmentViolation("word automata need the monoid theory")
    start = to_regex(e)
    alphabet = tuple(theory.variables)
    ids = {start: 0}
    order = [start]
    trans: dict = {}
    todo = deque([start])
    while todo:
        r = todo.popleft()
        for x in alphabet:
            targets = set()
            for d in partial_derivatives(r, x):
                if d == R0:
                    continue
                if d not in ids:
                    ids[d] = len(order)
                    order.append(d)
                    todo.append(d)
                targets.add(ids[d])
            if targets:
                trans[(ids[r], x)] = frozenset(targets)
    accepting = frozenset(ids[r] for r in order if nullable(r))
    initial = frozenset() if start == R0 else frozenset([0])
    return WordAutomaton(tuple(range(len(order))), alphabet, trans, initial, accepting)


@dataclass(frozen=True)
class WordResult:
    holds: bool
    counterexample: tuple | None = None

    def __bool__(self) -> bool:
        return self.holds


def automaton_inclusion(a: WordAutomaton, b: WordAutomaton) -> WordResult:
    """Breadth-first search of ``(p, S)`` pairs with antichain pruning; the first failure is shortest."""
    alphabet = tuple(sorted(set(a.alphabet) | set(b.alphabet)))
    seen: dict = {}

    def subsumed(p, s) -> bool:
        return any(old <= s for old in seen.get(p, ()))

    queue = deque()
    for p in sorted(a.initial):
        if not subsumed(p, b.initial):
            seen.setdefault(p, []).append(b.initial)
            queue.append((p, b.initial, ()))
    while queue:
        p, s, word = queue.popleft()
        if p in a.accepting and not (s & b.accepting):
            return WordResult(False, word)
        for x in alphabet:
            s2 = b.step(s, x)
            for p2 in sorted(a.transitions.get((p, x), ())):
                if subsumed(p2, s2):
                    continue
                seen.setdefault(p2, []).append(s2)
                queue.append((p2, s2, word + (x,)))
    return WordResult(True)


def word_inclusion(e: Expr, f: Expr, theory: TheoryConfig) -> WordResult:
    """Exact inclusion of regular languages with a shortest counterexample."""
    return automaton_inclusion(regex_to_nfa(e, theory), regex_to_nfa(f, theory))
