"""SMT-LIB export, validation, and backend plumbing (no real solver needed)."""

import os
import stat
from fractions import Fraction

import pytest

from unamb.convrec import ZeronessConfig, parse_convrec, zeroness
from unamb.smt import BackendError, export_smt, run_backend, validate_smt


def stub_backend(tmp_path, name, body):
    path = tmp_path / name
    path.write_text("#!/bin/sh\n" + body + "\n")
    path.chmod(path.stat().st_mode | stat.S_IXUSR)
    return str(path)


def test_export_has_expected_shape():
    s = parse_convrec("f(0)=1; f' = f*f")
    script = export_smt(s)
    validate_smt(script)
    assert "(set-logic QF_NRA)" in script
    assert "(declare-const y1 Real)" in script
    # combined degree 2 restricts the evaluation point to [0, 1/2)
    assert "(assert (< x (/ 1 2)))" in script
    assert "(assert (not (= y1 0)))" in script
    assert script.rstrip().endswith("(check-sat)")


def test_export_multi_variable_and_rationals():
    s = parse_convrec("f(0)=1/3; f' = 2*f*g - g\ng(0)=-1; g' = f")
    script = export_smt(s)
    validate_smt(script)
    assert "(declare-const y2 Real)" in script
    assert "(/ 1 3)" in script
    assert "(- 1)" in script


def test_export_degree_zero_uses_unit_interval():
    script = export_smt(parse_convrec("f(0)=1; f' = 2"))
    assert "(assert (< x 1))" in script


@pytest.mark.parametrize(
    "bad",
    [
        "",
        "(assert (= y1 0)",  # unbalanced
        "(assert (= y1 0)))",  # unbalanced the other way
        "(exit)",  # operator outside the exporter vocabulary
    ],
)
def test_validate_rejects(bad):
    with pytest.raises(ValueError):
        validate_smt(bad)


def test_run_backend_parses_answers(tmp_path):
    script = export_smt(parse_convrec("f(0)=0; f' = 0"))
    for answer in ("sat", "unsat", "unknown"):
        exe = stub_backend(tmp_path, f"solver-{answer}", f"echo {answer}")
        assert run_backend(script, exe, timeout=10) == answer


def test_run_backend_accepts_noisy_output(tmp_path):
    exe = stub_backend(tmp_path, "noisy", 'echo "c warming up"; echo unsat')
    assert run_backend("(check-sat)", exe, timeout=10) == "unsat"


def test_run_backend_missing_executable():
    with pytest.raises(BackendError):
        run_backend("(check-sat)", "/nonexistent/solver")


def test_run_backend_garbage_output(tmp_path):
    exe = stub_backend(tmp_path, "garbage", "echo flubber")
    with pytest.raises(BackendError):
        run_backend("(check-sat)", exe, timeout=10)


def test_run_backend_receives_the_script(tmp_path):
    # answer depends on the file contents, proving the script reaches the exe
    exe = stub_backend(
        tmp_path, "grepper", 'grep -q "marker-y1" "$1" && echo sat || echo unsat'
    )
    assert run_backend("(assert (= marker-y1 0))", exe, timeout=10) == "sat"
    assert run_backend("(assert (= other 0))", exe, timeout=10) == "unsat"


# -- zeroness staged verdicts through stub backends --------------------------

ZERO_SYS = "f(0)=0; f' = g - g\ng(0)=1; g' = g"


def test_zero_system_certified_by_unsat(tmp_path):
    exe = stub_backend(tmp_path, "unsat", "echo unsat")
    v = zeroness(parse_convrec(ZERO_SYS), ZeronessConfig(prefix_bound=8, backend=exe))
    assert v.kind == "zero_certified"
    assert v.backend == exe


def test_sat_answer_without_witness_stays_unknown(tmp_path):
    # the scan is extended, finds nothing, and the verdict is honest
    exe = stub_backend(tmp_path, "sat", "echo sat")
    v = zeroness(parse_convrec(ZERO_SYS), ZeronessConfig(prefix_bound=8, backend=exe))
    assert v.kind == "unknown"
    assert "32" in v.reason


def test_backend_unknown_propagates(tmp_path):
    exe = stub_backend(tmp_path, "unk", "echo unknown")
    v = zeroness(parse_convrec(ZERO_SYS), ZeronessConfig(prefix_bound=8, backend=exe))
    assert v.kind == "unknown"


def test_backend_failure_reported_not_raised(tmp_path):
    exe = stub_backend(tmp_path, "trash", "echo beep")
    v = zeroness(parse_convrec(ZERO_SYS), ZeronessConfig(prefix_bound=8, backend=exe))
    assert v.kind == "unknown"
    assert "backend failure" in v.reason


def test_nonzero_short_circuits_backend(tmp_path):
    # prefix scan finds the witness; the (broken) backend must never run
    exe = "/nonexistent/solver"
    v = zeroness(
        parse_convrec("f(0)=0; f' = 1"), ZeronessConfig(prefix_bound=8, backend=exe)
    )
    assert (v.kind, v.n, v.value) == ("nonzero_at", 1, 1)
