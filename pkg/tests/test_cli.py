"""The lax command line, driven in-process through main()."""

import json

import pytest

from lax.cli import main

GOOD = """
# a two-step program
free y : A ;
(\\x : A. <x, x>) y pi0
"""

SESSION = """
free f : Z -> B ;
free y : Z ;
nu a : EM[Z -> Z]. [ efq[B](nota (\\z : Z. z)) || f (a y) ]
"""

ILL_TYPED = """
free y : A ;
y y
"""

BROKEN = "free y : A \n y (("


@pytest.fixture
def prog(tmp_path):
    def write(text, name="prog.lax"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return write


def test_check_ok(prog, capsys):
    assert main(["check", prog(GOOD)]) == 0
    out = capsys.readouterr().out
    assert "A" in out and "ok" in out


def test_check_json(prog, capsys):
    assert main(["check", prog(GOOD), "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out.strip())
    assert payload["ok"] is True
    assert payload["type"] == "A"


def test_check_rejects_ill_typed(prog, capsys):
    assert main(["check", prog(ILL_TYPED)]) == 1
    assert "expected" in capsys.readouterr().out


def test_check_rejects_syntax_errors(prog, capsys):
    assert main(["check", prog(BROKEN)]) == 1
    out = capsys.readouterr().out
    assert "error" in out.lower()


def test_missing_file_is_an_input_error(capsys):
    assert main(["check", "/nonexistent/nowhere.lax"]) == 1


def test_normalize_pretty_trace(prog, capsys):
    assert main(["normalize", prog(GOOD), "--trace", "--audit"]) == 0
    out = capsys.readouterr().out
    assert "[cycle 1 Intuitionistic] Beta" in out
    assert "y" in out.splitlines()[-1] or "normal" in out


def test_normalize_json_stream(prog, capsys):
    assert main(["normalize", prog(SESSION), "--trace", "--audit",
                 "--format", "json"]) == 0
    lines = [json.loads(l) for l in capsys.readouterr().out.splitlines() if l]
    events = {l["event"] for l in lines}
    assert {"step", "normal_form", "report"} <= events
    rules = [l["rule"] for l in lines if l["event"] == "step"]
    assert "BasicCross(0,1)" in rules
    reports = [l for l in lines if l["event"] == "report"]
    assert all(r["holds"] for r in reports)
    assert {r["property"] for r in reports} == {
        "trace-audit", "parallel-normal-form", "subformula"
    }


def test_normalize_is_deterministic(prog, capsys):
    path = prog(SESSION)
    main(["normalize", path, "--trace", "--format", "json"])
    first = capsys.readouterr().out
    main(["normalize", path, "--trace", "--format", "json"])
    assert capsys.readouterr().out == first


def test_normalize_step_budget_exit(prog, capsys):
    assert main(["normalize", prog(GOOD), "--max-steps", "1"]) == 2
    assert main(["normalize", prog(GOOD), "--max-steps", "5"]) == 0


def test_step_budget_env_var(prog, capsys, monkeypatch):
    monkeypatch.setenv("LAX_MAX_STEPS", "1")
    assert main(["normalize", prog(GOOD)]) == 2
    monkeypatch.delenv("LAX_MAX_STEPS")
    assert main(["normalize", prog(GOOD)]) == 0


def test_underline_flag_parses(prog, capsys):
    assert main(["normalize", prog(SESSION), "--underline", "on"]) == 0


def test_bundled_examples_replay(capsys):
    assert main(["examples"]) == 0
    out = capsys.readouterr().out
    for name in ("or", "mobility", "scheduler_c3", "broadcast_em3", "godel"):
        assert f"PASS {name}" in out


def test_fuzz_small_batch(capsys):
    assert main(["fuzz", "--seed", "7", "--count", "10", "--size", "18",
                 "--axiom", "c3", "--format", "json"]) == 0
    lines = [json.loads(l) for l in capsys.readouterr().out.splitlines() if l]
    stats = lines[-1]
    assert stats["terms"] == 10
    assert stats["violations"] == 0


def test_fuzz_without_sessions(capsys):
    assert main(["fuzz", "--count", "5", "--axiom", "none"]) == 0
