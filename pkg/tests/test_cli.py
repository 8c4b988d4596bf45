import json
import subprocess
import sys

import pytest

from kah.cli import RESULTS, Session, default_bounds, exit_code, main, parse_kah, run
from kah.expressions import ParseError, parse_expr
from kah.semantics import closed_lang_bounded, lang_bounded

MONOID_HEAD = "theory monoid; vars a b;\n"


def write(tmp_path, text, name="q.kah"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def verdicts(text, **kw):
    session, queries = parse_kah(text, **kw)
    return session, run(session, queries)


# --- examples ------------------------------------------------------------------------------

def test_bounded_inclusion_holds(tmp_path, capsys):
    path = write(tmp_path, MONOID_HEAD + "hyp a.a <= a;\nincl a.a <= a @6/8;\n")
    assert main([path]) == 0
    assert "holds-bounded" in capsys.readouterr().out


def test_closure_value():
    _, vs = verdicts("theory cmonoid; vars a; hyp a <= a.a; closure a.a.(a.a)* @6/8;")
    assert vs[0].result == "holds-bounded"
    assert vs[0].value == [".".join("a" * k) for k in range(1, 7)]


def test_parse_error_position(tmp_path, capsys):
    path = write(tmp_path, MONOID_HEAD + "hyp a <=;\n")
    assert main([path]) == 3
    err = capsys.readouterr().err
    assert "line 2, column 9" in err
    with pytest.raises(ParseError) as info:
        parse_kah(MONOID_HEAD + "hyp a <=;\n")
    assert (info.value.line, info.value.column) == (2, 9)


def test_refutation_replays(tmp_path, capsys):
    path = write(tmp_path, MONOID_HEAD + "incl a* <= a.a* @6/8;\n")
    assert main([path, "--json"]) == 1
    out = json.loads(capsys.readouterr().out)
    v = out["verdicts"][0]
    assert v["result"] == "refuted" and v["witness"] == "1"
    session, _ = parse_kah(out["session"])
    w = parse_expr(v["witness"], session.theory)
    atom = next(iter(lang_bounded(w, session.theory, 0).atoms))
    assert atom in closed_lang_bounded(parse_expr("a*", session.theory), [], session.theory, 6, 8).atoms
    assert atom not in closed_lang_bounded(parse_expr("a.a*", session.theory), [], session.theory, 6, 8).atoms


def test_decide_words():
    _, vs = verdicts(MONOID_HEAD + "decide (a+b)* <= (a*.b*)*; decide (a+b)* <= a*.b*;")
    assert [v.result for v in vs] == ["holds-decided", "refuted"]
    assert vs[1].witness == "b.a"


def test_decide_trees_and_multisets():
    _, vs = verdicts("theory free; sig f/2 c/0; vars x; decide f(x,x) <= f(c,x) + f(x,x);")
    assert vs[0].result == "holds-decided"
    _, vs = verdicts("theory cmonoid; vars a b; decide a.b <= b.a; decide a*.b* <= (a.b)*;")
    assert [v.result for v in vs] == ["holds-bounded", "refuted"] and vs[1].witness == "b"


def test_decide_without_procedure():
    _, vs = verdicts("theory bimonoid; vars a; decide a <= a;")
    assert vs[0].result == "not-found"
    _, vs = verdicts(MONOID_HEAD + "hyp a <= b; decide a <= b;")
    assert vs[0].result == "not-found"


def test_reduce_emits_image():
    _, vs = verdicts(MONOID_HEAD + "hyp a.a <= a; reduce ka_transitive a;")
    assert vs[0].result == "proof-found" and vs[0].value == ["a.a*"]
    assert set(vs[0].witness) == {"fwd", "bwd"}


@pytest.mark.parametrize("text,image", [
    ("theory cmonoid; vars a b; hyp b <= 1; reduce cka_leq_one a;", "a.b*"),
    ("theory cmonoid; vars a b; hyp b.b <= 0; reduce cka_hoare_zero a;", "a + b.b.(a + b)*"),
    ("theory cmonoid; vars a b; hyp a <= a.a; reduce cka_expand a.a.(a.a)*;", "a.(1 + a).(1 + a + a.a)*"),
    ("theory bimonoid; vars a b; hyp a||a <= a; reduce bika_par_transitive a;", "a || a^||"),
    ("theory free; sig f/2 c/0; vars x; hyp f(c,c) <= 0; reduce tree_hoare_zero x @3/3;", None),
])
def test_reduce_catalog(text, image):
    _, vs = verdicts(text)
    assert vs[0].result == "proof-found", vs[0].flags
    if image is not None:
        assert vs[0].value == [image]


def test_reduce_errors():
    _, vs = verdicts(MONOID_HEAD + "reduce nope a;")
    assert vs[0].result == "not-found" and "unknown reduction" in vs[0].flags[0]
    _, vs = verdicts("theory cmonoid; vars a b; reduce cka_leq_one a;")
    assert vs[0].result == "not-found"


def test_prove_and_check_proof(tmp_path, capsys):
    path = write(tmp_path, MONOID_HEAD + "hyp a.a <= a;\nprove a.a.a <= a + b;\n")
    assert main([path, "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    proof = out["verdicts"][0]["witness"]
    (tmp_path / "p.json").write_text(json.dumps(proof))
    ok = write(tmp_path, MONOID_HEAD + "hyp a.a <= a;\ncheck-proof p.json;\n", "c.kah")
    assert main([ok]) == 0
    missing_hyp = write(tmp_path, MONOID_HEAD + "check-proof p.json;\n", "d.kah")
    assert main([missing_hyp]) == 2
    assert "rejected" in capsys.readouterr().out


def test_check_proof_missing_file(tmp_path):
    _, vs = verdicts(MONOID_HEAD + "check-proof nowhere.json;", base_dir=str(tmp_path))
    assert vs[0].result == "not-found"


def test_prove_not_found_is_inconclusive():
    _, vs = verdicts(MONOID_HEAD + "prove a.b <= b.a; prove a* <= a*;")
    assert [v.result for v in vs] == ["not-found", "not-found"]
    assert exit_code(vs) == 2


def test_lang_query():
    _, vs = verdicts(MONOID_HEAD + "lang a.(b + 1) @3;")
    assert vs[0].value == ["a", "a.b"]


# --- sessions ------------------------------------------------------------------------------

@pytest.mark.parametrize("kind,axioms,frag", [
    ("monoid", "KA", "kleene"),
    ("cmonoid", "cKA", "kleene"),
    ("bimonoid", "biKA", "bikleene"),
])
def test_default_axiomatisation(kind, axioms, frag):
    session, _ = parse_kah(f"theory {kind}; vars a;")
    assert session.axioms == axioms and session.fragment.value == frag
    assert session.Q.name == axioms


def test_free_default_is_naive():
    session, _ = parse_kah("theory free; sig f/2; vars x;")
    assert session.axioms == "naive" and session.Q.name.startswith("N(")


@pytest.mark.parametrize("text", [
    "theory monoid; vars a b; hyp a.a <= a; hyp b <= a + 1;",
    "theory bimonoid; vars a b; frag bikleene; hyp a||a <= a; hyp a.(b+1)* <= 0;",
    "theory free; sig f/2 c/0; vars x; axioms naive; hyp f(x, c) <= c;",
    "theory monoid; vars a; axioms leftKA;",
])
def test_session_roundtrip(text):
    session, _ = parse_kah(text)
    again, _ = parse_kah(session.to_text())
    assert again.to_text() == session.to_text()
    assert isinstance(again, Session) and again.theory == session.theory


def test_query_text_roundtrip():
    text = MONOID_HEAD + "incl a.a <= a @6/8; closure a* @4; lang a @2; decide a <= a; reduce ka_transitive a;"
    session, qs = parse_kah(text)
    _, again = parse_kah(session.to_text() + "\n" + "\n".join(q.to_text() for q in qs))
    assert [q.to_text() for q in again] == [q.to_text() for q in qs]


@pytest.mark.parametrize("text,fragment", [
    (MONOID_HEAD + "lang c;", "unknown variable"),
    (MONOID_HEAD + "lang a", "missing ';'"),
    ("vars a; lang a;", "missing 'theory'"),
    (MONOID_HEAD + "lang a; vars b;", "must come before"),
    (MONOID_HEAD + "frag ff; lang a*;", "outside"),
    ("theory monoid; axioms cKA; vars a;", "does not fit"),
    ("theory ring; vars a;", "unknown theory"),
    (MONOID_HEAD + "bogus a;", "unknown statement"),
    (MONOID_HEAD + "lang a @2/3;", "single bound"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(ParseError) as info:
        parse_kah(text)
    assert fragment in str(info.value)


def test_comments_are_ignored():
    session, qs = parse_kah("# header\ntheory monoid; # kind\nvars a; lang a @1; # tail\n")
    assert len(qs) == 1 and qs[0].line == 3


# --- flags, determinism and exit codes ------------------------------------------------------

MIXED = MONOID_HEAD + "hyp a.a <= a;\nincl a.a <= a;\nclosure a.b;\nincl b <= a;\nlang (a+b)* @2;\n"


def test_jobs_preserve_order(tmp_path, capsys):
    path = write(tmp_path, MIXED)
    main([path, "--json"])
    one = capsys.readouterr().out
    main([path, "--json", "--jobs", "3"])
    many = capsys.readouterr().out
    assert one == many
    ids = [v["id"] for v in json.loads(one)["verdicts"]]
    assert ids == [1, 2, 3, 4]


def test_json_fields(tmp_path, capsys):
    main([write(tmp_path, MIXED), "--json"])
    out = json.loads(capsys.readouterr().out)
    for v in out["verdicts"]:
        assert set(v) == {"id", "query", "result", "witness", "value", "bounds", "flags"}
        assert v["result"] in RESULTS


def test_bound_flags_and_env(tmp_path, capsys, monkeypatch):
    path = write(tmp_path, MONOID_HEAD + "lang (a+b)*;\n")
    main([path, "--json", "--bound", "1"])
    assert json.loads(capsys.readouterr().out)["verdicts"][0]["value"] == ["1", "a", "b"]
    monkeypatch.setenv("KAH_BOUNDS", "2/3")
    assert default_bounds() == (2, 3)
    main([path, "--json"])
    assert len(json.loads(capsys.readouterr().out)["verdicts"][0]["value"]) == 7
    monkeypatch.setenv("KAH_BOUNDS", "oops")
    assert main([path]) == 3


def test_usage_errors(tmp_path, capsys):
    path = write(tmp_path, MONOID_HEAD)
    assert main([path, "--bound", "5", "--work-bound", "2"]) == 3
    assert main([str(tmp_path / "absent.kah")]) == 3
    assert main(["--no-such-flag"]) == 3
    capsys.readouterr()


def test_trace_prints_derivation(tmp_path, capsys):
    main([write(tmp_path, MONOID_HEAD + "prove a <= a + b;\n"), "--trace"])
    assert "[axiom inl]" in capsys.readouterr().out


def test_exit_codes():
    _, vs = verdicts(MONOID_HEAD + "lang a @1;")
    assert exit_code(vs) == 0
    _, vs = verdicts(MONOID_HEAD + "lang a @1; incl a <= b @2/2; prove a.b <= b.a;")
    assert exit_code(vs) == 1


def test_module_entry_point(tmp_path):
    path = write(tmp_path, MONOID_HEAD + "incl a <= a + b @3/3;\n")
    proc = subprocess.run([sys.executable, "-m", "kah", path], capture_output=True, text=True)
    assert proc.returncode == 0 and "holds-bounded" in proc.stdout
