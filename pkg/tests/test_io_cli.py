from __future__ import annotations

import json
from pathlib import Path

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from hsaec import cli, suites
from hsaec import io as hio
from hsaec.generators import gen_random_model, make_rng
from hsaec.galois import all_elements
from hsaec.morphisms import transport
from hsaec.solutions import solve_solution
from hsaec.structure import Model, make_model


def test_standard_model_text():
    text = hio.serialize_model(Model(("a", "b", "c"), 2))
    assert text == "HSMODEL 1\nN 2\nATOMS a b c\n"


def test_twisted_model_text():
    m = make_model("abc", 2, [("bc", "abc"), ("ab", "abc")])
    assert hio.serialize_model(m).splitlines()[3:] == ["Q {a,b}|{a,b,c} 1", "Q {b,c}|{a,b,c} 1"]


@settings(max_examples=50)
@given(st.integers(2, 4), st.integers(0, 6), st.floats(0, 1), st.integers(0, 2**32 - 1))
def test_model_round_trip(n, k, density, seed):
    m = gen_random_model(n, k, density, seed)
    text = hio.serialize_model(m)
    assert hio.parse_model(text) == m
    assert hio.serialize_model(hio.parse_model(text)) == text


def test_parse_accepts_comments_and_zero_lines():
    text = "HSMODEL 1\n# comment\nN 2\nATOMS a b c\nQ {b,c}|{a,b,c} 0\nQ {a,c}|{a,b,c} 1\n"
    m = hio.parse_model(text)
    assert len(m.twist) == 1
    assert "0" not in hio.serialize_model(m).splitlines()[-1].split()[-1]


@pytest.mark.parametrize(
    "text,line",
    [
        ("HSMODEL 2\nN 2\nATOMS a b\n", 1),
        ("HSMODEL 1\nN x\nATOMS a b\n", 2),
        ("HSMODEL 1\nN 2\nATOMS a b c\nQ {a,d}|{a,b,c} 1\n", 4),
        ("HSMODEL 1\nN 2\nATOMS a b c\nQ {a,b}|{a,b,c} 2\n", 4),
        ("HSMODEL 1\nN 2\nATOMS a b c\nQ {a,b}|{a,b,c}\n", 4),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(hio.FormatError) as err:
        hio.parse_model(text)
    assert err.value.lineno == line


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_solution_and_embedding_round_trip(seed):
    rng = make_rng(seed)
    m = gen_random_model(2, int(rng.integers(2, 6)), 0.5, rng)
    h = solve_solution(m, rng=rng)
    text = hio.serialize_solution(h)
    assert hio.parse_solution(text, m) == h
    pi = {a: a + "x" for a in m.atoms}
    f = transport(m, pi, eps={u: 1 for u in m.blocks[:1]})
    etext = hio.serialize_embedding(f)
    g = hio.parse_embedding(etext, m, f.target)
    assert g == f and hio.serialize_embedding(g) == etext


def test_solution_hash_must_match():
    m = gen_random_model(2, 3, 0.5, 1)
    other = gen_random_model(2, 3, 0.5, 2)
    text = hio.serialize_solution(solve_solution(m))
    if other != m:
        with pytest.raises(hio.FormatError):
            hio.parse_solution(text, other)


def test_elements_round_trip():
    m = gen_random_model(2, 4, 0.5, 3)
    for x in all_elements(m):
        assert hio.parse_element(repr(x)) == x
    with pytest.raises(hio.FormatError):
        hio.parse_element("Q:{a,b}")


def test_amalgam_directory(tmp_path):
    from hsaec.amalgamation import disjoint_amalgam

    m0 = Model(("p",), 2)
    am = disjoint_amalgam(m0, Model(("p", "x"), 2), Model(("p", "y"), 2))
    hio.write_amalgam(tmp_path / "am", am)
    back = hio.read_amalgam(tmp_path / "am")
    assert back.result == am.result and back.f2 == am.f2


# -- CLI ------------------------------------------------------------------


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr()


def test_cli_gen_is_deterministic(tmp_path, capsys):
    a = run(["gen", "--n", "2", "--atoms", "4", "--seed", "9"], capsys)[1].out
    b = run(["gen", "--n", "2", "--atoms", "4", "--seed", "9"], capsys)[1].out
    assert a == b and a.startswith("HSMODEL 1")


def test_cli_amalg_unsat(tmp_path, capsys):
    (tmp_path / "m.hsm").write_text("HSMODEL 1\nN 2\nATOMS a1 a2 b1 b2\n")
    (tmp_path / "h1.hssol").write_text(
        "HSSOL 1\nMODEL m.hsm\nDOMAIN {a1,a2} {a1,b1} {a2,b1}\nF {a1,b1} = {{b1,b2}}\n"
    )
    code, out = run(["solve", str(tmp_path / "m.hsm"), "--over", "a1,a2,b2"], capsys)
    assert code == 0
    (tmp_path / "h2.hssol").write_text(out.out)
    code, out = run(
        ["amalg", str(tmp_path / "m.hsm"), str(tmp_path / "h1.hssol"), str(tmp_path / "h2.hssol"),
         "--k", "2", "--base", "a1,a2", "--new", "b1,b2"],
        capsys,
    )
    assert code == 1
    assert out.out.startswith("UNSAT") and "CERTIFICATE verified" in out.out


def test_cli_verdict_lines(tmp_path, capsys):
    (tmp_path / "m.hsm").write_text("HSMODEL 1\nN 2\nATOMS a b\n")
    (tmp_path / "n.hsm").write_text("HSMODEL 1\nN 2\nATOMS a b c\n")
    m, n = str(tmp_path / "m.hsm"), str(tmp_path / "n.hsm")
    code, out = run(["type-eq", m, n, "I:c", n, "I:c"], capsys)
    assert (code, out.out) == (0, "TYPE-EQ true\n")
    code, out = run(["type-eq", m, n, "I:a", n, "I:c"], capsys)
    assert (code, out.out) == (1, "TYPE-EQ false\n")
    code, out = run(["nonfork", m, m, n, "Gstar:{a,c}+{}"], capsys)
    assert (code, out.out) == (0, "NONFORK true CASE 3a\n")
    (tmp_path / "m0.hsm").write_text("HSMODEL 1\nN 2\nATOMS a\n")
    code, out = run(["nonfork", str(tmp_path / "m0.hsm"), m, n, "G:{{b,c}}"], capsys)
    assert (code, out.out) == (1, "NONFORK false CASE 2\n")


def test_cli_usage_errors(capsys):
    assert run(["suite", "no-such-suite"], capsys)[0] == 2
    assert run(["frobnicate"], capsys)[0] == 2
    assert run(["solve", "/nonexistent/file.hsm"], capsys)[0] == 2


def test_cli_witness_bundles(tmp_path, capsys):
    code, _ = run(["uniq-witness", "--n", "3", "--out", str(tmp_path / "uw")], capsys)
    assert code == 0
    assert (tmp_path / "uw" / "verdict.txt").read_text() == "UNIQ-WITNESS equivalent=false\n"
    assert (tmp_path / "uw" / "amalgam_a" / "f1.hsemb").exists()
    for name, atoms in (("m0", "a"), ("m1", "a b"), ("m2", "a c"), ("m3", "a b c d")):
        (tmp_path / f"{name}.hsm").write_text(f"HSMODEL 1\nN 2\nATOMS {atoms}\n")
    paths = [str(tmp_path / f"m{i}.hsm") for i in range(4)]
    code, _ = run(["nf-witness", *paths, "--out", str(tmp_path / "nf")], capsys)
    assert code == 0
    assert (tmp_path / "nf" / "chain.txt").read_text().startswith("NFCHAIN 1\nALPHA 1\n")
    assert (tmp_path / "nf" / "verdict.txt").read_text() == "NF true\n"
    assert (tmp_path / "nf" / "amalgam_b" / "result.hsm").exists()


def test_cli_uniq_check(capsys):
    code, out = run(["uniq-check", "--n", "3", "--budget", "1"], capsys)
    assert code == 0 and out.out.startswith("UNIQ-CHECK true")
    code, out = run(["uniq-check", "--n", "2", "--budget", "2", "--trials", "8"], capsys)
    assert code == 1 and out.out.startswith("UNIQ-CHECK false")


# -- suite runner ---------------------------------------------------------


def test_failing_suite_writes_replayable_witness(tmp_path, monkeypatch):
    def check(seed, case):
        return case[0] % 3 != 0, "multiple of three"

    bad = suites.Suite("toy", lambda s, t: [[i] for i in range(t)], check, 5)
    monkeypatch.setitem(suites.SUITES, "toy", bad)
    rep = suites.run_property_suite("toy", seed=4, out=tmp_path)
    assert (rep.passed, rep.failed) == (3, 2)
    assert len(rep.witnesses) == 2 and not rep.ok
    for path in rep.witnesses:
        lines = Path(path).read_text().splitlines()
        assert lines[0] == "HSWITNESS 1" and lines[2] == "SEED 4"
        assert json.loads(lines[3].split(" ", 1)[1])[0] % 3 == 0
        assert suites.replay(path)


def test_crash_counts_as_failure(tmp_path, monkeypatch):
    def check(seed, case):
        raise RuntimeError("boom")

    monkeypatch.setitem(suites.SUITES, "crash", suites.Suite("crash", lambda s, t: [[0]], check, 1))
    rep = suites.run_property_suite("crash", out=tmp_path)
    assert rep.failed == 1 and "boom" in rep.notes[0]


def test_unknown_suite():
    with pytest.raises(KeyError):
        suites.run_property_suite("nope")


def test_suites_are_deterministic():
    a = suites.run_property_suite("serialization", seed=7, trials=10)
    b = suites.run_property_suite("serialization", seed=7, trials=10)
    assert (a.passed, a.failed) == (b.passed, b.failed) == (10, 0)


def test_split_experiment_reports(capsys):
    rep = suites.run_property_suite("split-vs-nonfork", trials=10)
    assert rep.experiment and len(rep.notes) == 10
