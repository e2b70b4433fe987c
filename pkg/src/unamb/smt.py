"""SMT-LIB export of the zeroness sentence, plus backend invocation.

The exported script asks whether some admissible evaluation point x with
0 <= x < 1/d admits a solution of the generating-function fixpoint
equations with a nonzero distinguished component.  unsat means the
distinguished generating function vanishes on the whole interval, hence
the sequence is identically zero.  sat is only a hint: the solver may
land on a spurious solution branch, so callers recover a concrete index
by evaluating the sequence prefix instead of trusting a model.
"""

from __future__ import annotations

import subprocess
import tempfile
from fractions import Fraction
from pathlib import Path

from .convrec import ConvRecSystem


class BackendError(RuntimeError):
    """External solver could not be run or gave no recognisable answer."""


def _rat(f: Fraction) -> str:
    f = Fraction(f)
    if f < 0:
        return f"(- {_rat(-f)})"
    if f.denominator == 1:
        return str(f.numerator)
    return f"(/ {f.numerator} {f.denominator})"


def _product(parts: list[str]) -> str:
    if not parts:
        return "1"
    if len(parts) == 1:
        return parts[0]
    return "(* " + " ".join(parts) + ")"


def _sum(parts: list[str]) -> str:
    if not parts:
        return "0"
    if len(parts) == 1:
        return parts[0]
    return "(+ " + " ".join(parts) + ")"


def export_smt(s: ConvRecSystem) -> str:
    """QF_NRA script: x in the uniqueness zone, the k fixpoint equations
    y_i = f_i(0) + x * p_i(y), and y1 != 0.  Variables are emitted as
    x, y1..yk regardless of source names (SMT-LIB symbol safety)."""
    d = s.combined_degree
    lines = [
        "(set-logic QF_NRA)",
        "(declare-const x Real)",
    ]
    for i in range(s.k):
        lines.append(f"(declare-const y{i + 1} Real)")
    lines.append("(assert (<= 0 x))")
    bound = "1" if d == 0 else _rat(Fraction(1, d))
    lines.append(f"(assert (< x {bound}))")
    for i, (init, poly) in enumerate(zip(s.initials, s.polys)):
        terms = []
        for mono, coef in poly.terms:
            factors = [] if coef == 1 and mono else [_rat(coef)]
            factors += [f"y{j + 1}" for j in mono]
            terms.append(_product(factors))
        rhs = _sum([_rat(init), _product(["x", _sum(terms)])] if terms else [_rat(init)])
        lines.append(f"(assert (= y{i + 1} {rhs}))")
    lines.append("(assert (not (= y1 0)))")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


_ALLOWED_HEADS = {
    "set-logic",
    "declare-const",
    "assert",
    "check-sat",
    "+",
    "-",
    "*",
    "/",
    "=",
    "not",
    "<=",
    "<",
}


def _tokenize(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def validate_smt(text: str) -> None:
    """Cheap well-formedness check: balanced parentheses and only the
    operator vocabulary the exporter emits.  Raises ValueError."""
    tokens = _tokenize(text)
    if not tokens:
        raise ValueError("empty script")
    depth = 0
    expect_head = False
    for tok in tokens:
        if tok == "(":
            depth += 1
            expect_head = True
        elif tok == ")":
            depth -= 1
            if depth < 0:
                raise ValueError("unbalanced parentheses")
            expect_head = False
        else:
            if expect_head and tok not in _ALLOWED_HEADS and tok != "Real":
                raise ValueError(f"unexpected operator {tok!r}")
            expect_head = False
    if depth != 0:
        raise ValueError("unbalanced parentheses")


def run_backend(script: str, backend_path: str, timeout: float = 60.0) -> str:
    """Run an SMT solver executable on the script; returns one of
    "sat", "unsat", "unknown"."""
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "query.smt2"
        path.write_text(script)
        try:
            proc = subprocess.run(
                [backend_path, str(path)],
                capture_output=True,
                text=True,
                timeout=timeout,
            )
        except FileNotFoundError as exc:
            raise BackendError(f"backend not found: {backend_path}") from exc
        except subprocess.TimeoutExpired as exc:
            raise BackendError(f"backend timed out after {timeout}s") from exc
    for line in proc.stdout.splitlines():
        word = line.strip()
        if word in ("sat", "unsat", "unknown"):
            return word
    raise BackendError(
        f"no sat/unsat/unknown in backend output "
        f"(exit {proc.returncode}): {proc.stdout[:200]!r} {proc.stderr[:200]!r}"
    )
