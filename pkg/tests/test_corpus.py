"""The bundled corpus: every expectation holds and every file that
elaborates survives a parse-print-parse round trip."""

from pathlib import Path

import pytest

from cctt.cli import main
from cctt.errors import UnboundVariable
from cctt.parser import parse_module, print_module

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
FILES = sorted(CORPUS.rglob("*.cctt"))


def test_corpus_is_present():
    assert CORPUS.is_dir()
    assert len(FILES) >= 30


def test_corpus_all_expectations_met(capsys):
    code = main(["check", "--corpus", str(CORPUS)])
    out = capsys.readouterr().out
    assert code == 0
    lines = [ln for ln in out.splitlines() if ln.startswith(("PASS", "FAIL", "SKIP"))]
    assert lines and all(ln.startswith("PASS") for ln in lines)
    assert " 0 failed, 0 skipped" in out.splitlines()[-1]


@pytest.mark.parametrize("path", FILES, ids=lambda p: p.stem)
def test_corpus_file_round_trips(path):
    text = path.read_text()
    try:
        module = parse_module(text)
    except UnboundVariable:
        pytest.skip("file deliberately names something undeclared")
    except Exception:
        if "--expect-fail(ParseError)" in text:
            pytest.skip("file deliberately fails to parse")
        raise
    assert parse_module(print_module(module)) == module


def test_dependents_of_a_failure_are_skipped(tmp_path, capsys):
    src = tmp_path / "dep.cctt"
    src.write_text(
        "--expect-fail(TypeMismatch)\n"
        "def broken (A : U0) (x : A) : U0 := x\n\n"
        "def uses : U0 := broken\n"
    )
    code = main(["check", str(src)])
    out = capsys.readouterr().out
    assert code == 0
    assert f"PASS {src}:broken" in out
    assert f"SKIP {src}:uses" in out


def test_unexpected_failure_sets_exit_code(tmp_path, capsys):
    src = tmp_path / "bad.cctt"
    src.write_text("def f (A : U0) (x : A) : U0 := x\n")
    code = main(["check", str(src)])
    out = capsys.readouterr().out
    assert code == 1
    assert "FAIL" in out and "TypeMismatch" in out


def test_max_steps_flag_limits_conversion(tmp_path, capsys):
    src = tmp_path / "steps.cctt"
    src.write_text(
        "data nat : U0 where\n  | zero\n  | succ (m : nat)\n\n"
        "def add (m : nat) (n : nat) : nat :=\n"
        "  clockelim^0 nat m into (h. nat) with\n"
        "  | zero => n\n  | succ x y => succ y\n\n"
        "--expect-conv add (succ zero) (succ zero)"
        " = succ (succ zero) : nat\n"
    )
    assert main(["check", str(src)]) == 0
    capsys.readouterr()
    code = main(["check", "--max-steps", "3", str(src)])
    out = capsys.readouterr().out
    assert code == 1
    assert "FuelExhausted" in out


def test_missing_file_is_a_usage_error(tmp_path, capsys):
    code = main(["check", str(tmp_path / "nope.cctt")])
    err = capsys.readouterr().err
    assert code == 2
    assert "cannot read" in err


def test_no_input_is_a_usage_error(capsys):
    assert main(["check"]) == 2


def test_missing_subcommand_is_a_usage_error(capsys):
    assert main([]) == 2
