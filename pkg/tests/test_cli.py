"""Golden files and exit codes for the ucr command line.

Golden files store report bodies only; headers carry a timestamp.  Set
UCR_UPDATE_GOLDEN=1 to rewrite them after an intentional change.
"""

import json
import os

import pytest
from conftest import FIXTURES, GOLDEN, body, run_cli

from ucr.cli import main
from ucr.documents import canonical_json

NAMES = ["ground", "s2", "rp2", "triv24"]


def _cases():
    for k in NAMES:
        yield f"validate_{k}", ["validate", f"{k}.json"]
        yield f"resolve_{k}", ["resolve", f"{k}.json"]
        yield f"quillen_{k}", ["quillen", f"{k}.json"]
        yield f"obstructions_{k}", ["obstructions", f"{k}.json"]
        yield f"chi_{k}", ["chi", f"ext_split_{k}.json"]
        yield f"delta_{k}", ["delta", f"ext_split_{k}.json", "auto", "auto"]
    yield "chi_nonzero_triv24", ["chi", "ext_nonzero_triv24.json"]
    yield "delta_nonzero_triv24", ["delta", "ext_split_triv24.json", "auto", "lambda_nonzero.json"]
    yield "delta_zero_triv24", ["delta", "ext_split_triv24.json", "auto", "lambda_zero.json"]
    yield "resolve_verify_s2", ["resolve", "--verify-only", "resolution_s2.json"]


CASES = dict(_cases())


def _check_golden(name: str, got: dict) -> None:
    path = GOLDEN / f"{name}.json"
    if os.environ.get("UCR_UPDATE_GOLDEN"):
        GOLDEN.mkdir(exist_ok=True)
        path.write_text(canonical_json(got), encoding="utf-8")
    assert path.exists(), f"missing golden file {path.name}; run with UCR_UPDATE_GOLDEN=1"
    assert got == json.loads(path.read_text(encoding="utf-8"))


@pytest.mark.parametrize("name", list(CASES))
def test_golden_and_deterministic(name):
    first = run_cli(*CASES[name], seed=1)
    second = run_cli(*CASES[name], seed=2)
    assert first.returncode == 0, first.stderr
    assert second.returncode == 0, second.stderr
    b1, b2 = body(first.stdout), body(second.stdout)
    assert canonical_json(b1) == canonical_json(b2)
    _check_golden(name, b1)


def test_report_envelope():
    p = run_cli("validate", "s2.json")
    doc = json.loads(p.stdout)
    assert doc["schema"] == "ucr/1" and doc["kind"] == "report"
    assert set(doc["header"]) == {"tool", "generated", "threads"}
    assert doc["body"]["input"]["file"] == "s2.json"
    assert doc["body"]["input"]["hash"].startswith("sha256:")
    assert p.stdout.endswith("\n")


def test_threads_recorded_and_checked():
    p = run_cli("validate", "ground.json", UCR_THREADS="3")
    assert json.loads(p.stdout)["header"]["threads"] == 3
    assert run_cli("validate", "ground.json", UCR_THREADS="many").returncode == 1


def test_quillen_csv(capsys):
    assert main(["quillen", str(FIXTURES / "s2.json"), "--format", "csv", "--trunc", "6"]) == 0
    out = capsys.readouterr().out
    blocks = out.strip().split("\n\n")
    assert len(blocks) == 2
    lines = blocks[1].splitlines()
    assert lines[0].startswith("# coefficients Σ^2K")
    assert lines[1] == "degree,s0,s1,s2"
    assert lines[2:] == ["0,0,0,0", "1,0,0,0", "2,1,0,0", "3,1,0,0", "4,1,1,1", "5,1,1,1", "6,1,1,1"]


def test_resolve_out_then_verify(tmp_path, capsys):
    out = tmp_path / "res.json"
    rep = tmp_path / "rep.json"
    assert main(["resolve", str(FIXTURES / "s2.json"), "--trunc", "5", "--out", str(out), "--report", str(rep)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(rep.read_text())["body"]["results"]["stamp"] == "verified"
    assert main(["resolve", "--verify-only", str(out)]) == 0
    assert out.read_text() == (FIXTURES / "resolution_s2.json").read_text()


# exit codes -------------------------------------------------------------------

FAULTS = [
    # 1: usage, I/O and malformed documents
    (1, ["frobnicate"]),
    (1, ["validate"]),
    (1, ["validate", "no_such_file.json"]),
    (1, ["validate", "faults/broken.json"]),
    (1, ["chi", "faults/ext_badname_triv24.json"]),
    (1, ["quillen", "s2.json", "--trunc", "-1"]),
    (1, ["chi", "s2.json"]),
    # 2: a computation found a violated axiom or has no solution
    (2, ["validate", "faults/rp2_nosq.json"]),
    (2, ["resolve", "faults/rp2_nosq.json"]),
    (2, ["resolve", "--verify-only", "faults/resolution_s2_truncated_level.json"]),
    (2, ["delta", "ext_nonzero_triv24.json", "auto", "auto"]),
    # 3: beyond the known truncation
    (3, ["quillen", "s2.json", "--trunc", "9"]),
    (3, ["resolve", "rp2.json", "--trunc", "12"]),
    (3, ["quillen", "s2.json", "--s-max", "2", "--dim", "2"]),
]


@pytest.mark.parametrize("code,args", FAULTS, ids=[" ".join(a) for _, a in FAULTS])
def test_exit_codes(code, args):
    p = run_cli(*args)
    assert p.returncode == code, p.stderr
    assert p.stderr.strip()


def test_failure_report_still_written():
    p = run_cli("validate", "faults/rp2_nosq.json")
    res = body(p.stdout)["results"]["validation"]
    assert res["ok"] is False
    assert any(c["name"] == "verschiebung" and not c["passed"] for c in res["checks"])


def test_document_error_names_the_path(capsys):
    assert main(["chi", str(FIXTURES / "faults" / "ext_badname_triv24.json")]) == 1
    assert "Sq1[v9.9.9]" in capsys.readouterr().err
