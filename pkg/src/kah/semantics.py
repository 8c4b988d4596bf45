"""Bounded language semantics, hypothesis closure and inclusion checking.

All languages are truncated to atoms whose size (or depth, for trees) is at
most a bound.  Because symbol application never shrinks an atom, the
truncated language of an expression only depends on the truncated languages
of its parts, so Kleene iteration over the finite bounded universe is exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .expressions import Expr, Mu, Plus, RecVar, Sym, Var, Zero, free_recvars, leaf_count
from .theory import ONE, TheoryConfig


@dataclass(frozen=True)
class BoundedLanguage:
    """The atoms of a language whose measure is at most ``size_bound``."""

    atoms: frozenset
    size_bound: int
    exact_below_bound: bool = True
    measure: str = "size"

    def __contains__(self, a) -> bool:
        return a in self.atoms

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self):
        return iter(sorted(self.atoms, key=_sort_key))


def _sort_key(a):
    return (repr(type(a)), a)


def _additive(theory: TheoryConfig) -> int | None:
    """Extra size contributed by a symbol node, or None when size is not additive."""
    if theory.kind in ("monoid", "cmonoid", "bimonoid"):
        return 0
    if theory.kind == "free":
        return 1
    return None


def apply_symbol_lang(theory: TheoryConfig, name: str, langs, bound: int, measure: str = "size") -> frozenset:
    """``name(L1, ..., Ln)`` truncated to the bound."""
    langs = [list(l) for l in langs]
    if any(not l for l in langs):
        return frozenset()
    if not langs:
        a = theory.apply_symbol(name, [])
        return frozenset([a]) if theory.measure(a, measure) <= bound else frozenset()
    if measure == "depth" and theory.kind == "free":
        langs = [[a for a in l if a.height() < bound] for l in langs]
        return frozenset(theory.apply_symbol(name, kids) for kids in itertools.product(*langs))
    extra = _additive(theory) if measure == "size" else None
    out = set()
    if extra is None:
        for kids in itertools.product(*langs):
            a = theory.apply_symbol(name, kids)
            if theory.measure(a, measure) <= bound:
                out.add(a)
        return frozenset(out)
    sized = [sorted(((theory.size(a), a) for a in l), key=lambda p: p[0]) for l in langs]
    budget = bound - extra

    def go(i: int, used: int, picked: list):
        if i == len(sized):
            out.add(theory.apply_symbol(name, picked))
            return
        rest_min = sum(s[0][0] for s in sized[i + 1:])
        for sz, a in sized[i]:
            if used + sz + rest_min > budget:
                break
            picked.append(a)
            go(i + 1, used + sz, picked)
            picked.pop()

    go(0, 0, [])
    return frozenset(out)


class _Evaluator:
    def __init__(self, theory: TheoryConfig, bound: int, measure: str):
        self.theory = theory
        self.bound = bound
        self.measure = measure
        self.cache: dict = {}

    def run(self, e: Expr, env: dict) -> frozenset:
        closed = not free_recvars(e)
        if closed and e in self.cache:
            return self.cache[e]
        out = self._eval(e, env)
        if closed:
            self.cache[e] = out
        return out

    def _eval(self, e: Expr, env: dict) -> frozenset:
        t = self.theory
        if isinstance(e, Var):
            a = t.var_atom(e.name)
            return frozenset([a]) if t.measure(a, self.measure) <= self.bound else frozenset()
        if isinstance(e, RecVar):
            if e.name not in env:
                raise ValueError(f"unbound recursion variable {e.name!r}")
            return env[e.name]
        if isinstance(e, Zero):
            return frozenset()
        if isinstance(e, Plus):
            return self.run(e.left, env) | self.run(e.right, env)
        if isinstance(e, Sym):
            kids = [self.run(a, env) for a in e.args]
            return apply_symbol_lang(t, e.name, kids, self.bound, self.measure)
        if isinstance(e, Mu):
            current: frozenset = frozenset()
            while True:
                nxt = self.run(e.body, {**env, e.var: current})
                if nxt == current:
                    return current
                current = nxt
        raise TypeError(f"not an expression: {e!r}")


def lang_bounded(e: Expr, theory: TheoryConfig, bound: int, measure: str = "size") -> BoundedLanguage:
    """Exactly the atoms of the standard interpretation of ``e`` with measure at most ``bound``."""
    if free_recvars(e):
        raise ValueError("lang_bounded expects a closed expression")
    atoms = _Evaluator(theory, bound, measure).run(e, {}) if bound >= 0 else frozenset()
    return BoundedLanguage(atoms, bound, True, measure)


def max_measure(e: Expr, theory: TheoryConfig, cap: int, measure: str = "size", env=None):
    """``min(cap, largest measure of an atom of e)``, or None for the empty language.

    Capping commutes with sums, maxima and the least-fixpoint iteration, so the
    result is exact; ``max_measure(e, t, b + 1) <= b`` decides finiteness below ``b``.
    """
    env = env or {}
    extra = 1 if theory.kind in ("free", "custom") else 0
    if isinstance(e, Var):
        return min(cap, 1)
    if isinstance(e, RecVar):
        return env.get(e.name)
    if isinstance(e, Zero):
        return None
    if isinstance(e, Plus):
        vals = [v for v in (max_measure(e.left, theory, cap, measure, env), max_measure(e.right, theory, cap, measure, env)) if v is not None]
        return max(vals) if vals else None
    if isinstance(e, Sym):
        if not e.args:
            return min(cap, 0 if e.name == ONE and extra == 0 else 1)
        vals = [max_measure(a, theory, cap, measure, env) for a in e.args]
        if any(v is None for v in vals):
            return None
        if measure == "depth":
            return min(cap, 1 + max(vals))
        return min(cap, sum(vals) + extra)
    if isinstance(e, Mu):
        current = None
        while True:
            nxt = max_measure(e.body, theory, cap, measure, {**env, e.var: current})
            if nxt == current:
                return current
            current = nxt
    raise TypeError(f"not an expression: {e!r}")


def finite_within(e: Expr, theory: TheoryConfig, bound: int, measure: str = "size") -> bool:
    """Whether every atom of ``e`` has measure at most ``bound``."""
    m = max_measure(e, theory, bound + 1, measure)
    return m is None or m <= bound


@dataclass
class ClosureEngine:
    """Computes the bounded H function and the least H-closed superset of a language.

    Atoms above ``work_bound`` are never materialised.  When a side condition
    ``C[f] included in L`` cannot be decided inside the bounded universe the
    candidate is skipped and ``approximate`` is set.
    """

    theory: TheoryConfig
    hypotheses: list
    work_bound: int
    measure: str = "size"
    approximate: bool = False
    _lhs: list = field(default_factory=list, repr=False)
    _rhs: list = field(default_factory=list, repr=False)
    _rhs_exact: list = field(default_factory=list, repr=False)
    _universe: list | None = field(default=None, repr=False)

    def __post_init__(self):
        self.hypotheses = list(self.hypotheses)
        for lhs, rhs in self.hypotheses:
            self._lhs.append(lang_bounded(lhs, self.theory, self.work_bound, self.measure).atoms)
            self._rhs.append(sorted(lang_bounded(rhs, self.theory, self.work_bound, self.measure).atoms, key=self.theory.atom_key))
            self._rhs_exact.append(finite_within(rhs, self.theory, self.work_bound, self.measure))

    def _fits(self, a) -> bool:
        return self.theory.measure(a, self.measure) <= self.work_bound

    def universe(self) -> list:
        if self._universe is None:
            self._universe = self.theory.enumerate_atoms(self.work_bound, self.measure)
        return self._universe

    def _unconditional(self, i: int) -> set:
        """Atoms C[e] for every context C, used when the hypothesis rhs denotes nothing."""
        t = self.theory
        lhs = sorted(self._lhs[i], key=t.atom_key)
        if not lhs:
            return set()
        return {u for u in self.universe() if any(t.split(u, a) for a in lhs)}

    def _fire(self, i: int, u, members, out: set) -> None:
        """Add C[e_i] for contexts with ``C[b] = u`` for some b in the rhs and ``C[rhs]`` inside ``members``."""
        t = self.theory
        rhs = self._rhs[i]
        for b in rhs:
            for c in t.split(u, b):
                plugged = [t.apply_context(c, b2) for b2 in rhs]
                if not all(p in members for p in plugged):
                    if any(not self._fits(p) for p in plugged):
                        self.approximate = True
                    continue
                for a in self._lhs[i]:
                    v = t.apply_context(c, a)
                    if self._fits(v):
                        out.add(v)

    def closure_step(self, lang) -> frozenset:
        """The H function: union of C[e] over hypotheses e <= f and contexts with C[f] included in ``lang``."""
        members = {a for a in lang if self._fits(a)}
        out: set = set()
        for i in range(len(self.hypotheses)):
            if not self._rhs_exact[i]:
                self.approximate = True
                continue
            if not self._rhs[i]:
                out |= self._unconditional(i)
                continue
            for u in members:
                self._fire(i, u, members, out)
        return frozenset(out)

    def closure(self, lang) -> frozenset:
        """Least fixpoint of X -> lang + H(X) inside the bounded universe."""
        members = {a for a in lang if self._fits(a)}
        todo = list(members)
        for i in range(len(self.hypotheses)):
            if not self._rhs_exact[i]:
                self.approximate = True
            elif not self._rhs[i]:
                for v in self._unconditional(i) - members:
                    members.add(v)
                    todo.append(v)
        active = [i for i in range(len(self.hypotheses)) if self._rhs_exact[i] and self._rhs[i]]
        while todo:
            u = todo.pop()
            found: set = set()
            for i in active:
                self._fire(i, u, members, found)
            for v in found:
                if v not in members:
                    members.add(v)
                    todo.append(v)
        return frozenset(members)


def default_work_bound(report_bound: int, hypotheses) -> int:
    """Report bound plus the largest hypothesis left-hand side."""
    return report_bound + max((leaf_count(lhs) for lhs, _ in hypotheses), default=0)


def closed_lang_bounded(e: Expr, hypotheses, theory: TheoryConfig, report_bound: int,
                        work_bound: int | None = None, measure: str = "size") -> BoundedLanguage:
    """The H-closure of the language of ``e``, computed at ``work_bound`` and cut to ``report_bound``."""
    if work_bound is None:
        work_bound = default_work_bound(report_bound, hypotheses)
    if work_bound < report_bound:
        raise ValueError("work bound must be at least the report bound")
    engine = ClosureEngine(theory, hypotheses, work_bound, measure)
    base = lang_bounded(e, theory, work_bound, measure).atoms
    closed = engine.closure(base)
    atoms = frozenset(a for a in closed if theory.measure(a, measure) <= report_bound)
    return BoundedLanguage(atoms, report_bound, not engine.approximate, measure)


@dataclass(frozen=True)
class InclusionResult:
    """Outcome of a bounded inclusion check; ``counterexample`` is None when it holds."""

    holds: bool
    counterexample: object = None
    report_bound: int = 0
    work_bound: int = 0
    approximate: bool = False


def inclusion_check(e: Expr, f: Expr, hypotheses, theory: TheoryConfig, report_bound: int,
                    work_bound: int | None = None, measure: str = "size") -> InclusionResult:
    """Compare the H-closed languages of ``e`` and ``f`` below ``report_bound``."""
    if work_bound is None:
        work_bound = default_work_bound(report_bound, hypotheses)
    left = closed_lang_bounded(e, hypotheses, theory, report_bound, work_bound, measure)
    right = closed_lang_bounded(f, hypotheses, theory, report_bound, work_bound, measure)
    missing = sorted(left.atoms - right.atoms, key=theory.atom_key)
    approx = not (left.exact_below_bound and right.exact_below_bound)
    if missing:
        return InclusionResult(False, missing[0], report_bound, work_bound, approx)
    return InclusionResult(True, None, report_bound, work_bound, approx)
