"""Batch front-end for ``.kah`` files.

A file declares a theory and hypotheses, then lists queries::

    theory monoid; vars a b; hyp a.a <= a;
    incl a.a <= a @6/8;
    decide (a+b)* <= (a*.b*)*;

``#`` starts a comment.  Statements end with ``;``.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from .expressions import (
    ExprParser, Fragment, ParseError, Sym, Token, Zero, fragment_member, show, tokenize,
)
from .proofs import (
    Derivation, NotFound, axiomatisation, check_derivation, derivation_from_json, derivation_to_json,
    prove_inclusion_fixpointfree,
)
from .semantics import closed_lang_bounded, inclusion_check, lang_bounded
from .theory import ONE, TheoryConfig, TheoryError

RESULTS = ("holds-bounded", "holds-decided", "refuted", "proof-found", "not-found")
BOUNDS_ENV = "KAH_BOUNDS"
DEFAULT_AXIOMS = {"monoid": "KA", "cmonoid": "cKA", "bimonoid": "biKA", "free": "naive"}
DEFAULT_FRAGMENT = {"KA": Fragment.KLEENE_STAR, "leftKA": Fragment.KLEENE_STAR, "cKA": Fragment.KLEENE_STAR,
                    "biKA": Fragment.BIKLEENE, "naive": Fragment.FULL}


class UsageError(ValueError):
    """A malformed file or a request the session cannot serve."""


@dataclass
class Session:
    theory: TheoryConfig
    fragment: Fragment
    hypotheses: list = field(default_factory=list)
    axioms: str = "naive"
    report: int = 6
    work: int = 8
    seed: int = 0
    base_dir: str = "."

    @property
    def Q(self):
        if self.axioms == "naive":
            return axiomatisation("naive", self.theory, self.fragment)
        return axiomatisation(self.axioms, self.theory)

    def measure(self) -> str:
        return "depth" if self.theory.kind == "free" else "size"

    def to_text(self) -> str:
        lines = [f"theory {self.theory.kind};"]
        if self.theory.kind == "free":
            sig = " ".join(f"{s}/{n}" for s, n in self.theory.signature.symbols)
            lines.append(f"sig {sig};")
        lines.append(f"vars {' '.join(self.theory.variables)};")
        lines.append(f"frag {self.fragment.value};")
        lines.append(f"axioms {self.axioms};")
        lines += [f"hyp {show(e)} <= {show(f)};" for e, f in self.hypotheses]
        return "\n".join(lines)


@dataclass
class Query:
    id: int
    kind: str
    args: tuple
    report: int | None = None
    work: int | None = None
    line: int = 0

    def to_text(self) -> str:
        if self.kind in ("incl", "prove", "decide"):
            body = f"{show(self.args[0])} <= {show(self.args[1])}"
        elif self.kind == "reduce":
            body = f"{self.args[0]} {show(self.args[1])}"
        elif self.kind == "check-proof":
            body = self.args[0]
        else:
            body = show(self.args[0])
        if self.report is not None:
            body += f" @{self.report}" + (f"/{self.work}" if self.work is not None else "")
        return f"{self.kind} {body};"


@dataclass
class Verdict:
    id: int
    query: str
    result: str
    witness: object = None
    value: list | None = None
    bounds: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)
    trace: str = ""

    def to_json(self) -> dict:
        out = asdict(self)
        out.pop("trace")
        return out

    def to_text(self) -> str:
        head = f"[{self.id}] {self.query}  =>  {self.result}"
        parts = [head]
        if self.witness is not None:
            parts.append(f"    witness: {self.witness if not isinstance(self.witness, dict) else 'derivation'}")
        if self.value is not None:
            parts.append(f"    value: {{{', '.join(self.value)}}}")
        if self.bounds:
            parts.append("    bounds: " + ", ".join(f"{k}={v}" for k, v in self.bounds.items()))
        if self.flags:
            parts.append("    flags: " + "; ".join(self.flags))
        if self.trace:
            parts.append("\n".join("    | " + line for line in self.trace.splitlines()))
        return "\n".join(parts)


# --- parsing ---------------------------------------------------------------------

_STATEMENTS = ("theory", "sig", "vars", "frag", "axioms", "hyp")
_QUERIES = ("lang", "closure", "incl", "prove", "decide", "reduce", "check-proof")
_CHECK_PROOF = re.compile(r"\s*(check-proof)(?:\s+(\S+))?\s*$")


def _statements(text: str):
    """Yield ``(body, line, column)`` for each ``;``-terminated statement, comments removed."""
    clean = re.sub(r"#[^\n]*", lambda m: " " * len(m.group(0)), text)
    line, col, start = 1, 1, 0
    pos_line, pos_col = 1, 1
    for i, ch in enumerate(clean):
        if ch == ";":
            yield clean[start:i], pos_line, pos_col
            start = i + 1
            pos_line, pos_col = line, col + 1
        if ch == "\n":
            line, col = line + 1, 1
            if start == i + 1:
                pos_line, pos_col = line, 1
        else:
            col += 1
    rest = clean[start:]
    if rest.strip():
        lead = len(rest) - len(rest.lstrip())
        skipped = rest[:lead]
        ln = pos_line + skipped.count("\n")
        cl = (lead - skipped.rfind("\n")) if "\n" in skipped else pos_col + lead
        raise ParseError("missing ';' after statement", ln, cl)


def _bounds(p: ExprParser):
    if not p.accept("@"):
        return None, None
    if p.tok.kind != "num":
        p.error("expected a bound after '@'")
    report = int(p.tok.text)
    p.i += 1
    work = None
    if p.accept("/"):
        if p.tok.kind != "num":
            p.error("expected a work bound after '/'")
        work = int(p.tok.text)
        p.i += 1
    return report, work


def _end(p: ExprParser) -> None:
    if p.tok.kind != "end":
        p.error(f"unexpected {p.tok.text!r}")


def parse_kah(text: str, report: int = 6, work: int = 8, seed: int = 0, base_dir: str = "."):
    """Parse a file into a :class:`Session` and its queries."""
    kind = sig = variables = frag = axioms = None
    raw_hyps: list = []
    queries: list = []
    session = None
    for body, line, col in _statements(text):
        m = _CHECK_PROOF.match(body)
        if m:
            lead = body[:m.start(1)]
            at_col = col + len(lead) if "\n" not in lead else len(lead) - lead.rfind("\n")
            head = Token("id", "check-proof", line + lead.count("\n"), at_col)
            if session is None:
                session = _make_session(kind, sig, variables, frag, axioms, raw_hyps, head, report, work, seed,
                                        base_dir)
            path = m.group(2)
            if not path:
                raise ParseError("check-proof expects a file name", head.line, head.column)
            queries.append(Query(len(queries) + 1, "check-proof", (path,), line=head.line))
            continue
        toks = tokenize(body, line, col)
        head = toks[0]
        if head.kind == "end":
            continue
        word = head.text
        rest = toks[1:]
        if head.kind != "id":
            raise ParseError(f"expected a keyword, found {head.text!r}", head.line, head.column)
        if word in _STATEMENTS:
            if session is not None:
                raise ParseError(f"'{word}' must come before the queries", head.line, head.column)
            if word == "theory":
                kind = _single_id(rest, head)
            elif word == "sig":
                sig = _signature(rest, head)
            elif word == "vars":
                variables = _ids(rest, head)
            elif word == "frag":
                try:
                    frag = Fragment.parse(_single_id(rest, head))
                except ValueError as exc:
                    raise ParseError(str(exc), head.line, head.column) from None
            elif word == "axioms":
                axioms = _single_id(rest, head)
            else:
                raw_hyps.append((rest, head))
            continue
        if word not in _QUERIES:
            raise ParseError(f"unknown statement {word!r}", head.line, head.column)
        if session is None:
            session = _make_session(kind, sig, variables, frag, axioms, raw_hyps, head, report, work, seed, base_dir)
        queries.append(_parse_query(session, word, rest, body, head, len(queries) + 1))
    if session is None:
        session = _make_session(kind, sig, variables, frag, axioms, raw_hyps, None, report, work, seed, base_dir)
    return session, queries


def _single_id(rest: list, head: Token) -> str:
    if len(rest) != 2 or rest[0].kind != "id":
        t = rest[0] if rest else head
        raise ParseError(f"'{head.text}' expects one name", t.line, t.column)
    return rest[0].text


def _ids(rest: list, head: Token) -> list:
    out = []
    for t in rest[:-1]:
        if t.kind != "id":
            raise ParseError(f"expected a name, found {t.text!r}", t.line, t.column)
        out.append(t.text)
    return out


def _signature(rest: list, head: Token) -> list:
    out = []
    i = 0
    while rest[i].kind != "end":
        name, slash, arity = rest[i], rest[i + 1], rest[i + 2] if i + 2 < len(rest) else rest[-1]
        if name.kind != "id" or slash.text != "/" or arity.kind != "num":
            raise ParseError("expected symbol/arity", name.line, name.column)
        out.append((name.text, int(arity.text)))
        i += 3
    return out


def _make_session(kind, sig, variables, frag, axioms, raw_hyps, at, report, work, seed, base_dir) -> Session:
    where = (at.line, at.column) if at is not None else (1, 1)
    if kind is None:
        raise ParseError("missing 'theory' declaration", *where)
    try:
        if kind == "free":
            theory = TheoryConfig.free(sig or [], variables or [])
        elif kind in ("monoid", "cmonoid", "bimonoid"):
            if sig:
                raise ParseError(f"the {kind} theory has a fixed signature", *where)
            theory = getattr(TheoryConfig, kind)(variables or [])
        else:
            raise ParseError(f"unknown theory {kind!r}", *where)
    except TheoryError as exc:
        raise ParseError(str(exc), *where) from None
    axioms = axioms or DEFAULT_AXIOMS[kind]
    if axioms not in DEFAULT_FRAGMENT:
        raise ParseError(f"unknown axiomatisation {axioms!r}", *where)
    if axioms != "naive" and kind != {"KA": "monoid", "leftKA": "monoid", "cKA": "cmonoid", "biKA": "bimonoid"}[axioms]:
        raise ParseError(f"{axioms} does not fit the {kind} theory", *where)
    frag = frag or DEFAULT_FRAGMENT[axioms]
    session = Session(theory, frag, [], axioms, report, work, seed, base_dir)
    for toks, head in raw_hyps:
        p = ExprParser(toks, theory.signature, theory.variables)
        e = _expr(p, session)
        p.expect("<=")
        f = _expr(p, session)
        _end(p)
        session.hypotheses.append((e, f))
    return session


def _expr(p: ExprParser, session: Session):
    start = p.tok
    e = p.parse_expr()
    if not fragment_member(e, session.fragment):
        raise ParseError(f"{show(e)} is outside the {session.fragment.value} fragment", start.line, start.column)
    return e


def _parse_query(session: Session, word: str, rest: list, body: str, head: Token, qid: int) -> Query:
    t = session.theory
    p = ExprParser(rest, t.signature, t.variables)
    if word == "reduce":
        if p.tok.kind != "id":
            p.error("reduce expects a reduction name")
        name = p.tok.text
        p.i += 1
        e = _expr(p, session)
        report, work = _bounds(p)
        _end(p)
        return Query(qid, word, (name, e), report, work, line=head.line)
    e = _expr(p, session)
    if word in ("incl", "prove", "decide"):
        p.expect("<=")
        f = _expr(p, session)
        args = (e, f)
    else:
        args = (e,)
    report, work = _bounds(p) if word in ("lang", "closure", "incl") else (None, None)
    if word == "lang" and work is not None:
        p.error("lang takes a single bound")
    _end(p)
    return Query(qid, word, args, report, work, head.line)


# --- running ------------------------------------------------------------------------

def _atoms(theory: TheoryConfig, atoms) -> list:
    return [theory.show(a) for a in sorted(atoms, key=theory.atom_key)]


def run_query(session: Session, q: Query, trace: bool = False) -> Verdict:
    report = q.report if q.report is not None else session.report
    work = q.work if q.work is not None else max(session.work, report)
    v = Verdict(q.id, q.to_text(), "not-found")
    try:
        handler = _HANDLERS[q.kind]
        handler(session, q, v, report, work, trace)
    except (UsageError, ValueError, KeyError, TheoryError) as exc:
        v.result = "not-found"
        v.flags.append(f"error: {exc}")
    return v


def _lang(session, q, v, report, work, trace):
    t = session.theory
    lang = lang_bounded(q.args[0], t, report, session.measure())
    v.result, v.value = "holds-bounded", _atoms(t, lang.atoms)
    v.bounds = {"report": report, "measure": session.measure()}


def _closure(session, q, v, report, work, trace):
    t = session.theory
    lang = closed_lang_bounded(q.args[0], session.hypotheses, t, report, work, session.measure())
    v.result, v.value = "holds-bounded", _atoms(t, lang.atoms)
    v.bounds = {"report": report, "work": work, "measure": session.measure()}
    if not lang.exact_below_bound:
        v.flags.append("approximate")


def _incl(session, q, v, report, work, trace):
    t = session.theory
    e, f = q.args
    res = inclusion_check(e, f, session.hypotheses, t, report, work, session.measure())
    v.bounds = {"report": report, "work": work, "measure": session.measure()}
    if res.approximate:
        v.flags.append("approximate")
    if res.holds:
        v.result = "holds-bounded"
        return
    a = res.counterexample
    # replay the witness independently before reporting it
    inside = a in closed_lang_bounded(e, session.hypotheses, t, report, work, session.measure()).atoms
    outside = a not in closed_lang_bounded(f, session.hypotheses, t, report, work, session.measure()).atoms
    if not (inside and outside):
        raise UsageError("counterexample failed to replay")
    v.result, v.witness = "refuted", t.show(a)


def _prove(session, q, v, report, work, trace):
    t = session.theory
    e, f = q.args
    Q = session.Q
    if not fragment_member(e, Fragment.FIXPOINT_FREE):
        v.flags.append("left-hand side has fixpoints; only fixpoint-free inclusions are searched")
        return
    d = prove_inclusion_fixpointfree(e, f, session.hypotheses, t, Q=Q)
    if isinstance(d, NotFound):
        v.flags.append(f"search exhausted at bound {d.bound}" + (f": {d.reason}" if d.reason else ""))
        return
    res = check_derivation(Q, session.hypotheses, d)
    if not res:
        raise UsageError(f"generated derivation rejected at {res.path}: {res.reason}")
    v.result = "proof-found"
    v.witness = derivation_to_json(d)
    v.flags.append(f"derivation size {d.size()}, checked over {Q.name}")
    if trace:
        v.trace = render_derivation(d)


def _decide(session, q, v, report, work, trace):
    from .decision import parikh, semilinear_inclusion_bounded, tree_inclusion, word_inclusion

    t = session.theory
    e, f = q.args
    if session.hypotheses:
        v.flags.append("decision procedures cover hypothesis-free inclusions only")
        return
    if t.kind in ("monoid", "free"):
        res = word_inclusion(e, f, t) if t.kind == "monoid" else tree_inclusion(e, f, t)
        v.bounds = {"method": "word-automaton" if t.kind == "monoid" else "tree-automaton"}
        v.result = "holds-decided" if res.holds else "refuted"
        atom = res.counterexample
    elif t.kind == "cmonoid":
        vbound = max(report, work)
        res = semilinear_inclusion_bounded(parikh(e, t), parikh(f, t), vbound)
        v.bounds = {"method": "semilinear", "vector-bound": vbound}
        v.result = "holds-bounded" if res.holds else "refuted"
        atom = None if res.holds else tuple(sorted(x for x, n in zip(t.variables, res.counterexample)
                                                    for _ in range(n)))
    else:
        v.flags.append(f"no decision procedure for the {t.kind} theory")
        return
    if v.result == "refuted":
        _replay(session, e, f, atom)
        v.witness = t.show(atom)


def _replay(session, e, f, atom) -> None:
    """Re-check a counterexample against the bounded semantics at its own size."""
    t, how = session.theory, session.measure()
    n = t.measure(atom, how)
    if atom not in lang_bounded(e, t, n, how).atoms or atom in lang_bounded(f, t, n, how).atoms:
        raise UsageError("counterexample failed to replay")


def _reduce(session, q, v, report, work, trace):
    from .reductions import BoundConfig, catalog, check_reduction

    name, e = q.args
    builders = catalog()
    if name not in builders:
        raise UsageError(f"unknown reduction {name!r}; known: {', '.join(sorted(builders))}")
    w = _build_reduction(session, name, builders[name])
    if w.measure == "depth" and q.report is None:
        report, work = min(report, 4), min(work, 4)
    cfg = BoundConfig(report, work, seed=session.seed or None)
    rep = check_reduction(w, [e], cfg)
    item = rep.items[0]
    v.bounds = {"report": cfg.report, "work": item.work_used, "measure": w.measure}
    v.value = [show(item.image)] if item.image is not None else None
    v.flags.append(f"from {w.src.describe()} to {w.tgt.describe()}")
    v.flags.append("condition 1 sampled")
    if item.approximate:
        v.flags.append("approximate")
    if item.ok:
        q2 = w.prove(e)
        v.result = "proof-found"
        v.witness = {"fwd": derivation_to_json(q2.fwd), "bwd": derivation_to_json(q2.bwd)}
        v.flags.append(f"derivations of size {q2.fwd.size()} and {q2.bwd.size()} checked")
        if trace:
            v.trace = render_derivation(q2.fwd)
    else:
        v.result = "refuted" if not item.condition3 else "not-found"
        v.witness = session.theory.show(item.witness) if item.witness is not None else None
        v.flags.append(item.failure)


def _build_reduction(session: Session, name: str, builder):
    t = session.theory
    hyps = list(session.hypotheses)
    if name in ("tree_hoare_zero", "cka_hoare_zero", "cka_leq_one"):
        want_zero = name != "cka_leq_one"
        for i, (e0, f0) in enumerate(hyps):
            if (isinstance(f0, Zero) and want_zero) or (not want_zero and isinstance(f0, Sym) and f0.name == ONE):
                extra = hyps[:i] + hyps[i + 1:]
                if name == "tree_hoare_zero":
                    return builder(t, e0, extra)
                return builder(e0, t.variables, extra)
        raise UsageError(f"{name} needs a hypothesis with right-hand side {'0' if want_zero else '1'}")
    if name == "tree_hoare_zero":
        raise UsageError("tree_hoare_zero needs a hypothesis e <= 0")
    w = builder(t.variables)
    own = w.src.hypotheses
    extra = [h for h in hyps if not any(_same(h, o) for o in own)]
    if extra:
        w = builder(t.variables, extra=extra)
    if w.src.theory.kind != t.kind:
        raise UsageError(f"{name} works over the {w.src.theory.kind} theory")
    return w


def _same(h, o) -> bool:
    from .proofs.core import aeq
    return aeq(h[0], o[0]) and aeq(h[1], o[1])


def _check_proof(session, q, v, report, work, trace):
    path = q.args[0]
    full = path if os.path.isabs(path) else os.path.join(session.base_dir, path)
    try:
        with open(full, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    d = derivation_from_json(data, session.theory)
    res = check_derivation(session.Q, session.hypotheses, d)
    v.witness = f"{show(d.lhs)} <= {show(d.rhs)}"
    if res:
        v.result = "proof-found"
        v.flags.append(f"accepted over {session.Q.name}")
    else:
        v.result = "not-found"
        v.flags.append(f"rejected at {'/'.join(map(str, res.path)) or 'root'}: {res.reason}")


_HANDLERS = {"lang": _lang, "closure": _closure, "incl": _incl, "prove": _prove, "decide": _decide,
             "reduce": _reduce, "check-proof": _check_proof}


def render_derivation(d: Derivation, limit: int = 400) -> str:
    """An indented outline of a derivation, truncated after ``limit`` lines."""
    lines: list = []
    stack = [(d, 0)]
    while stack and len(lines) < limit:
        n, depth = stack.pop()
        label = n.rule if n.rule != "axiom" else f"axiom {n.axiom}"
        if n.rule == "hyp":
            label = f"hyp {n.index}"
        lines.append(f"{'  ' * depth}{show(n.lhs)} <= {show(n.rhs)}   [{label}]")
        stack.extend((p, depth + 1) for p in reversed(n.premises))
    if stack:
        lines.append("...")
    return "\n".join(lines)


def _run_one(args):
    session, q, trace = args
    return run_query(session, q, trace)


def run(session: Session, queries, jobs: int = 1, trace: bool = False) -> list:
    """Verdicts in query order."""
    if jobs > 1 and len(queries) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_one, [(session, q, trace) for q in queries]))
    return [run_query(session, q, trace) for q in queries]


def exit_code(verdicts) -> int:
    if any(v.result == "refuted" for v in verdicts):
        return 1
    if any(v.result == "not-found" for v in verdicts):
        return 2
    return 0


def default_bounds() -> tuple:
    """``KAH_BOUNDS`` as ``report/work`` (or just ``report``), else 6/8."""
    raw = os.environ.get(BOUNDS_ENV, "")
    if not raw:
        return 6, 8
    try:
        parts = [int(x) for x in raw.split("/")]
    except ValueError:
        raise UsageError(f"{BOUNDS_ENV} must look like 6/8") from None
    report = parts[0]
    work = parts[1] if len(parts) > 1 else max(8, report)
    return report, work


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="kah", description="Query Kleene algebras with hypotheses.")
    ap.add_argument("file", help="a .kah file, or - for standard input")
    ap.add_argument("--bound", type=int, help="report bound for queries without @")
    ap.add_argument("--work-bound", type=int, help="work bound for queries without /m")
    ap.add_argument("--json", action="store_true", help="emit structured JSON")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--trace", action="store_true", help="print derivation outlines")
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 3
    try:
        report, work = default_bounds()
        if args.bound is not None:
            report = args.bound
        if args.work_bound is not None:
            work = args.work_bound
        if report < 0 or work < report:
            raise UsageError("bounds must satisfy 0 <= report <= work")
        if args.file == "-":
            text, base = sys.stdin.read(), "."
        else:
            with open(args.file, encoding="utf-8") as fh:
                text = fh.read()
            base = os.path.dirname(os.path.abspath(args.file))
        session, queries = parse_kah(text, report, work, args.seed, base)
    except (ParseError, UsageError, OSError) as exc:
        print(f"kah: {exc}", file=sys.stderr)
        return 3
    verdicts = run(session, queries, max(1, args.jobs), args.trace)
    if args.json:
        print(json.dumps({"session": session.to_text(), "verdicts": [v.to_json() for v in verdicts]},
                         indent=2, sort_keys=True))
    else:
        for v in verdicts:
            print(v.to_text())
    return exit_code(verdicts)


if __name__ == "__main__":
    sys.exit(main())
