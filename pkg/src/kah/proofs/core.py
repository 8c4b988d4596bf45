"""Horn sentences, axiomatisations, derivations and the derivation checker."""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable

from ..expressions import (
    Expr, Fragment, Mu, Plus, Sym, Var, ZERO, canonical, fragment_member, free_recvars, star,
    parstar, subexpressions, substitute, term_to_expr, unfold,
)
from ..theory import PAR, SEQ, TheoryConfig

Ineq = tuple  # (lhs, rhs)


@dataclass(frozen=True)
class HornSentence:
    """``premises -> lhs <= rhs``, all over the axiom variables."""

    name: str
    conclusion: Ineq
    premises: tuple = ()

    def __str__(self) -> str:
        concl = f"{self.conclusion[0]} <= {self.conclusion[1]}"
        if not self.premises:
            return concl
        prem = ", ".join(f"{e} <= {f}" for e, f in self.premises)
        return f"{prem} -> {concl}"


def _fix_schema(params) -> HornSentence:
    (m,) = params
    if not isinstance(m, Mu):
        raise ValueError("fix schema expects a fixpoint expression")
    return HornSentence("fix", (unfold(m), m))


def _ind_schema(params) -> HornSentence:
    m, f = params
    if not isinstance(m, Mu):
        raise ValueError("ind schema expects a fixpoint expression")
    return HornSentence("ind", (m, f), ((substitute(m.body, {m.var: f}), f),))


SCHEMAS: dict[str, Callable] = {"fix": _fix_schema, "ind": _ind_schema}


@dataclass
class Axiomatisation:
    """A named set of Horn sentences over a fragment, plus fixpoint schemas."""

    name: str
    fragment: Fragment
    theory: TheoryConfig
    sentences: dict = field(default_factory=dict)
    schemas: tuple = ()

    def add(self, s: HornSentence) -> None:
        self.sentences[s.name] = s

    def instantiate(self, name: str, params=()) -> HornSentence:
        if name in self.sentences:
            if params:
                raise ValueError(f"axiom {name!r} takes no schema parameters")
            return self.sentences[name]
        if name in self.schemas:
            s = SCHEMAS[name](params)
            for p in params:
                if not self.in_fragment(p):
                    raise ValueError(f"schema parameter {p} is outside the fragment")
            return s
        raise KeyError(f"unknown axiom {name!r}")

    def in_fragment(self, e: Expr) -> bool:
        return not free_recvars(e) and fragment_member(e, self.fragment)

    def __contains__(self, name: str) -> bool:
        return name in self.sentences or name in self.schemas


@dataclass(frozen=True, eq=False)
class Derivation:
    """A node of a derivation tree concluding ``lhs <= rhs``.

    ``rule`` is one of ``axiom``, ``hyp``, ``refl``, ``trans``, ``plus`` and
    ``sym``.  Axiom nodes carry the axiom name, schema parameters and the
    substitution ``theta``; hypothesis nodes carry the index into H;
    monotonicity nodes for symbols carry the symbol name.
    """

    rule: str
    lhs: Expr
    rhs: Expr
    premises: tuple = ()
    axiom: str | None = None
    theta: tuple = ()
    params: tuple = ()
    index: int | None = None
    symbol: str | None = None

    def __str__(self) -> str:
        return f"{self.lhs} <= {self.rhs}"

    def size(self) -> int:
        seen, stack = set(), [self]
        while stack:
            d = stack.pop()
            if id(d) in seen:
                continue
            seen.add(id(d))
            stack.extend(d.premises)
        return len(seen)


@functools.lru_cache(maxsize=200_000)
def canon(e: Expr) -> Expr:
    return canonical(e)


def aeq(e: Expr, f: Expr) -> bool:
    """Equality up to renaming of bound recursion variables."""
    return e is f or e == f or canon(e) == canon(f)


@dataclass(frozen=True)
class CheckResult:
    accepted: bool
    path: tuple = ()
    reason: str = ""

    def __bool__(self) -> bool:
        return self.accepted


class _Reject(Exception):
    def __init__(self, path, reason):
        super().__init__(reason)
        self.path = path
        self.reason = reason


def check_derivation(Q: Axiomatisation, H, d: Derivation) -> CheckResult:
    """Check every node of ``d`` against the deduction rules over ``Q`` and ``H``."""
    H = list(H)
    done: set = set()
    exprs_ok: set = set()

    def expr_ok(e: Expr, path) -> None:
        key = id(e)
        if key in exprs_ok:
            return
        if free_recvars(e):
            raise _Reject(path, f"expression {e} is not closed")
        if not fragment_member(e, Q.fragment):
            raise _Reject(path, f"expression {e} is outside the fragment")
        for s in subexpressions(e):
            if isinstance(s, Sym):
                if s.name not in Q.theory.signature or Q.theory.signature.arity(s.name) != len(s.args):
                    raise _Reject(path, f"symbol {s.name!r} misused in {e}")
        exprs_ok.add(key)

    def visit(root: Derivation) -> None:
        stack = [(root, (), False)]
        while stack:
            node, path, expanded = stack.pop()
            if id(node) in done:
                continue
            if not expanded:
                stack.append((node, path, True))
                for i, child in enumerate(node.premises):
                    stack.append((child, path + (i,), False))
                continue
            expr_ok(node.lhs, path)
            expr_ok(node.rhs, path)
            check_node(node, path)
            done.add(id(node))

    def need(cond: bool, path, reason: str) -> None:
        if not cond:
            raise _Reject(path, reason)

    def check_node(n: Derivation, path) -> None:
        r, ps = n.rule, n.premises
        if r == "refl":
            need(not ps and aeq(n.lhs, n.rhs), path, "reflexivity needs identical sides")
        elif r == "trans":
            need(len(ps) == 2, path, "transitivity needs two premises")
            need(aeq(ps[0].rhs, ps[1].lhs), path, f"transitivity middle terms differ: {ps[0].rhs} vs {ps[1].lhs}")
            need(aeq(n.lhs, ps[0].lhs) and aeq(n.rhs, ps[1].rhs), path, "transitivity conclusion mismatch")
        elif r == "plus":
            need(len(ps) == 2, path, "monotonicity of + needs two premises")
            need(isinstance(n.lhs, Plus) and isinstance(n.rhs, Plus), path, "monotonicity of + needs sums")
            need(aeq(n.lhs.left, ps[0].lhs) and aeq(n.lhs.right, ps[1].lhs), path, "left side mismatch")
            need(aeq(n.rhs.left, ps[0].rhs) and aeq(n.rhs.right, ps[1].rhs), path, "right side mismatch")
        elif r == "sym":
            lhs, rhs = n.lhs, n.rhs
            need(isinstance(lhs, Sym) and isinstance(rhs, Sym), path, "monotonicity needs symbol applications")
            need(lhs.name == rhs.name == n.symbol, path, "symbol mismatch")
            need(len(ps) == len(lhs.args) == len(rhs.args), path, "argument count mismatch")
            for p, a, b in zip(ps, lhs.args, rhs.args):
                need(aeq(p.lhs, a) and aeq(p.rhs, b), path, "argument premise mismatch")
        elif r == "hyp":
            need(not ps, path, "hypotheses take no premises")
            need(n.index is not None and 0 <= n.index < len(H), path, "hypothesis index out of range")
            e, f = H[n.index]
            need(aeq(n.lhs, e) and aeq(n.rhs, f), path, "hypotheses must be used verbatim")
        elif r == "axiom":
            try:
                sentence = Q.instantiate(n.axiom, n.params)
            except (KeyError, ValueError) as exc:
                raise _Reject(path, str(exc)) from None
            theta = dict(n.theta)
            for x, v in theta.items():
                need(Q.in_fragment(v), path, f"substitution image {v} for {x} not in fragment")
            lhs, rhs = sentence.conclusion
            need(aeq(substitute(lhs, theta), n.lhs) and aeq(substitute(rhs, theta), n.rhs), path,
                 f"conclusion is not an instance of {n.axiom}")
            need(len(ps) == len(sentence.premises), path, "wrong number of axiom premises")
            for p, (e, f) in zip(ps, sentence.premises):
                need(aeq(substitute(e, theta), p.lhs) and aeq(substitute(f, theta), p.rhs), path,
                     "axiom premise mismatch")
        else:
            raise _Reject(path, f"unknown rule {r!r}")

    try:
        visit(d)
    except _Reject as rej:
        return CheckResult(False, rej.path, rej.reason)
    return CheckResult(True)


# --- axiomatisations ----------------------------------------------------------------

def _semilattice(Q: Axiomatisation) -> None:
    x, y = Var("x"), Var("y")
    Q.add(HornSentence("zero", (ZERO, x)))
    Q.add(HornSentence("idem", (Plus(x, x), x)))
    Q.add(HornSentence("inl", (x, Plus(x, y))))
    Q.add(HornSentence("inr", (y, Plus(x, y))))


def _distribution(Q: Axiomatisation) -> None:
    for name, arity in Q.theory.signature.symbols:
        for i in range(arity):
            args = [Var(f"x{j + 1}") for j in range(arity)]

            def at(v: Expr) -> Expr:
                return Sym(name, tuple(args[:i] + [v] + args[i + 1:]))

            y, y2 = Var("y"), Var("y'")
            Q.add(HornSentence(f"annih[{name},{i + 1}]", (at(ZERO), ZERO)))
            Q.add(HornSentence(f"dist[{name},{i + 1}]", (at(Plus(y, y2)), Plus(at(y), at(y2)))))


def _equations(Q: Axiomatisation) -> None:
    for law, u, v in Q.theory.laws:
        eu, ev = term_to_expr(u), term_to_expr(v)
        Q.add(HornSentence(law, (eu, ev)))
        Q.add(HornSentence(f"{law}-rev", (ev, eu)))


def naive_axioms(theory: TheoryConfig, fragment: Fragment = Fragment.FULL) -> Axiomatisation:
    """Semilattice, distribution and E axioms plus least-fixpoint schemas."""
    Q = Axiomatisation(f"N({theory.kind},{fragment.value})", fragment, theory, schemas=("fix", "ind"))
    _semilattice(Q)
    _distribution(Q)
    _equations(Q)
    return Q


def _star_axioms(Q: Axiomatisation, op: str, tag: str, both_sides: bool) -> None:
    x, y, z = Var("x"), Var("y"), Var("z")
    s = star(x) if op == SEQ else parstar(x)
    one = Sym("1", ())

    def mul(a, b):
        return Sym(op, (a, b))

    Q.add(HornSentence(f"{tag}-unfold-l", (Plus(one, mul(x, s)), s)))
    Q.add(HornSentence(f"{tag}-ind-l", (mul(s, z), y), ((Plus(z, mul(x, y)), y),)))
    if both_sides:
        Q.add(HornSentence(f"{tag}-unfold-r", (Plus(one, mul(s, x)), s)))
        Q.add(HornSentence(f"{tag}-ind-r", (mul(z, s), y), ((Plus(z, mul(y, x)), y),)))


INSTANCES = {"KA": "monoid", "leftKA": "monoid", "cKA": "cmonoid", "biKA": "bimonoid"}


def instance_axioms(name: str, variables=()) -> Axiomatisation:
    """Kleene algebra style axiomatisations: ``KA``, ``leftKA``, ``cKA`` or ``biKA``."""
    if name not in INSTANCES:
        raise KeyError(f"unknown axiomatisation {name!r}")
    kind = INSTANCES[name]
    theory = TheoryConfig(kind, getattr(TheoryConfig, kind)(()).signature, tuple(variables))
    frag = Fragment.BIKLEENE if name == "biKA" else Fragment.KLEENE_STAR
    Q = Axiomatisation(name, frag, theory)
    _semilattice(Q)
    _distribution(Q)
    _equations(Q)
    _star_axioms(Q, SEQ, "star", name != "leftKA")
    if name == "biKA":
        _star_axioms(Q, PAR, "pstar", False)
    return Q


def axiomatisation(name: str, theory: TheoryConfig, fragment: Fragment | None = None) -> Axiomatisation:
    """``naive`` gives N(E, F); other names select an instance axiomatisation."""
    if name == "naive":
        return naive_axioms(theory, fragment or Fragment.FULL)
    Q = instance_axioms(name, theory.variables)
    if Q.theory.kind != theory.kind:
        raise ValueError(f"{name} expects a {Q.theory.kind} theory, got {theory.kind}")
    return Q


# --- serialisation --------------------------------------------------------------

def derivation_to_json(d: Derivation) -> dict:
    """A DAG encoding: a node list (children first) and the root index."""
    from ..expressions import show

    index: dict = {}
    nodes: list = []
    stack = [(d, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in index:
            continue
        if not expanded:
            stack.append((node, True))
            stack.extend((p, False) for p in reversed(node.premises))
            continue
        entry = {"rule": node.rule, "lhs": show(node.lhs), "rhs": show(node.rhs),
                 "premises": [index[id(p)] for p in node.premises]}
        if node.axiom is not None:
            entry["axiom"] = node.axiom
            entry["theta"] = {k: show(v) for k, v in node.theta}
            entry["params"] = [show(p) for p in node.params]
        if node.index is not None:
            entry["index"] = node.index
        if node.symbol is not None:
            entry["symbol"] = node.symbol
        index[id(node)] = len(nodes)
        nodes.append(entry)
    return {"nodes": nodes, "root": index[id(d)]}


def derivation_from_json(data: dict, theory: TheoryConfig) -> Derivation:
    from ..expressions import parse_expr

    def ex(text: str) -> Expr:
        return parse_expr(text, theory)

    built: list = []
    for entry in data["nodes"]:
        built.append(Derivation(
            entry["rule"], ex(entry["lhs"]), ex(entry["rhs"]),
            tuple(built[i] for i in entry.get("premises", [])),
            axiom=entry.get("axiom"),
            theta=tuple(sorted((k, ex(v)) for k, v in entry.get("theta", {}).items())),
            params=tuple(ex(p) for p in entry.get("params", [])),
            index=entry.get("index"),
            symbol=entry.get("symbol"),
        ))
    return built[data["root"]]
