"""Command-line front end.

Five subcommands expose the toolkit: `universality` runs the layered
decision pipeline on a grammar, `inclusion` decides automaton/grammar
containment where a sound reduction exists, `measure` computes exact or
certified coin-flip measures with optional comparison and Monte Carlo
cross-checks, `sqrtsum` emits the square-root-sum reduction artifacts,
and `seq` evaluates, tests zeroness of, or exports convolution systems.

Every run prints a self-contained report (text, or canonical JSON with
--json) recording input hashes and all effective parameters, so a run
can be reproduced byte for byte.  Wall-clock timings are opt-in via
--timings since they never reproduce.  With --out-dir the report is
also written to disk together with a CSV of the tabular data and a
rendered figure.

Exit codes: 0 for a positive decision or a completed computation, 1 for
a negative decision, 2 when only bounded evidence or no decision is
available, 64 for usage errors, 65 for malformed inputs, 66 for missing
files, 70 for internal failures.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import report as rpt
from .alphabet import FormatError
from .automata import parse_automaton
from .convrec import ZeronessConfig, eval_prefix, parse_convrec, universality_difference, zeroness
from .gnf import to_short_gnf
from .grammar import check_unambiguous_bounded, parse_grammar, print_grammar
from .intervals import IntervalRational
from .measure import (
    ComparisonQuery,
    compare_measure,
    monte_carlo_measure,
    regular_measure_exact,
    trivial_epsilon_decision,
    ucfg_measure,
)
from .reductions import build_nfa_in_ucfg_instance, decide_nfa_in_ufa
from .smt import BackendError, export_smt, validate_smt
from .sqrtsum import build_reduction, normalise_instance, parse_instance, verify_reduction
from .universality import AmbiguityDiagnostic, decide_universality_grammar

EXIT_HOLDS = 0
EXIT_FAILS = 1
EXIT_UNDECIDED = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_NOINPUT = 66
EXIT_INTERNAL = 70

SMT_BACKEND_ENV = "UNAMB_SMT_BACKEND"


class UsageError(Exception):
    """Bad flags, bad config keys, unsupported modes."""


class _InputMissing(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on misuse, which collides with the
    # "undecided" exit code; route everything through UsageError instead
    def error(self, message):
        raise UsageError(message)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _config_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def _config_mc(text: str) -> tuple[int, int]:
    parts = text.split()
    if len(parts) != 2:
        raise UsageError(f"mc needs two integers (samples seed), got {text!r}")
    return int(parts[0]), int(parts[1])


# accepted config-file keys and how to convert their raw string values
_CONFIG_CONVERTERS = {
    "bound": int,
    "compare": str,
    "json": _config_bool,
    "kind": str,
    "mc": _config_mc,
    "measure_tol": Fraction,
    "out_dir": str,
    "prefix_bound": int,
    "smt_backend": str,
    "timeout": float,
    "timings": _config_bool,
    "tol": Fraction,
    "unambiguity_bound": int,
    "verify": _config_bool,
}


def _load_config(path: str) -> dict[str, str]:
    """Flat key=value defaults; '#' comments and blank lines ignored."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise _InputMissing(f"cannot read config file {path}: {exc}") from exc
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key = value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower().replace("-", "_")
        value = value.strip()
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "'\"":
            value = value[1:-1]
        if key not in _CONFIG_CONVERTERS:
            raise UsageError(f"config line {lineno}: unknown key {key!r}")
        values[key] = value
    return values


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise _InputMissing(f"cannot read {path}: {exc}") from exc


def _entry(path: str) -> dict[str, str]:
    try:
        return rpt.RunReport.input_entry(path)
    except OSError as exc:
        raise _InputMissing(f"cannot read {path}: {exc}") from exc


def _parse_compare(spec: str) -> tuple[str, Fraction]:
    parts = spec.split()
    if len(parts) != 2 or parts[0] not in ("<=", "<", ">", ">="):
        raise UsageError(
            f'--compare wants "OP EPSILON" with OP one of <= < > >=, got {spec!r}'
        )
    try:
        eps = Fraction(parts[1])
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--compare threshold is not rational: {parts[1]!r}")
    return parts[0], eps


def _fig_float(x) -> float | None:
    try:
        v = float(x)
    except (OverflowError, ValueError):
        return None
    return v if math.isfinite(v) else None


def _interval_ready(iv: IntervalRational) -> dict:
    return {
        "lo": rpt.frac_str(iv.lo),
        "hi": rpt.frac_str(iv.hi),
        "width": rpt.frac_str(iv.width),
        "approx": [_fig_float(iv.lo), _fig_float(iv.hi)],
    }


def _sniff_target(text: str) -> str:
    """Grammar files carry a 'start:' line, automata a 'states:' line."""
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("start:"):
            return "grammar"
        if line.startswith("states:"):
            return "automaton"
    raise FormatError(
        "cannot tell grammar from automaton: the file has neither a "
        "'start:' nor a 'states:' line"
    )


class _Timer:
    def __init__(self) -> None:
        self.marks: dict[str, float] = {}
        self._start = time.perf_counter()
        self._last = self._start

    def lap(self, name: str) -> None:
        now = time.perf_counter()
        self.marks[name] = now - self._last
        self._last = now

    def total(self) -> dict[str, float]:
        out = dict(self.marks)
        out["total"] = time.perf_counter() - self._start
        return out


# ---------------------------------------------------------------------------
# command handlers; each returns (exit code, result payload, inputs, writer)
# where writer(out_dir) drops the command's CSV/figure/auxiliary files


def _deficit_writer(gs, upto: int, title: str):
    def write(out_dir: Path) -> None:
        row = eval_prefix(universality_difference(gs), upto)[0]
        xs = list(range(upto + 1))
        rpt.write_csv(out_dir / "data.csv", ["n", "missing_words"], list(zip(xs, row)))
        rpt.render_series_figure(
            out_dir / "figure.png",
            title,
            "word length n",
            "words of Sigma^n outside L",
            xs,
            [("missing", [_fig_float(v) for v in row])],
        )

    return write


def _cmd_universality(args, conf, timer):
    inputs = {"grammar": _entry(args.grammar)}
    g = parse_grammar(_read(args.grammar))
    timer.lap("parse")
    try:
        urep = decide_universality_grammar(
            g,
            bound=conf["bound"],
            measure_tol=conf["measure_tol"],
            smt_backend=conf["smt_backend"],
        )
    except AmbiguityDiagnostic as exc:
        timer.lap("decide")
        result = {
            "verdict": "ABORTED-AMBIGUOUS",
            "detail": str(exc),
            "ambiguity": {"length": exc.length, "excess": exc.excess},
        }
        return EXIT_DATA, result, inputs, None
    timer.lap("decide")
    result = {
        "verdict": urep.verdict,
        "description": urep.describe(g.alphabet),
        "bound": urep.bound,
        "witness": g.alphabet.format_word(urep.witness) if urep.witness is not None else None,
        "witness_length": urep.witness_length,
        "certificate": urep.certificate,
        "stages": list(urep.stages),
    }
    code = {
        "NOT-UNIVERSAL": EXIT_FAILS,
        "UNIVERSAL-CERTIFIED": EXIT_HOLDS,
    }.get(urep.verdict, EXIT_UNDECIDED)
    gs = g if g.is_short_gnf else to_short_gnf(g)
    upto = urep.witness_length if urep.witness_length is not None else conf["bound"]
    writer = _deficit_writer(gs, upto, "universality deficit scan")
    return code, result, inputs, writer


_UNSUPPORTED_KINDS = ("cfg-in-ufa", "cfg-in-cfg", "ucfg-in-ucfg")


def _cmd_inclusion(args, conf, timer):
    kind = conf["kind"]
    if kind is None:
        raise UsageError("--kind is required (nfa-in-ufa or nfa-in-ucfg)")
    if kind in _UNSUPPORTED_KINDS:
        raise UsageError(
            f"kind {kind} is not implemented: the reduction needs the "
            "complement of the left-hand language, and complementing a "
            "(deterministic) pushdown language is outside what this tool "
            "can express unambiguously"
        )
    inputs = {
        "lhs": _entry(args.lhs),
        "rhs": _entry(args.rhs),
    }
    a = parse_automaton(_read(args.lhs))
    if kind == "nfa-in-ufa":
        b = parse_automaton(_read(args.rhs))
        timer.lap("parse")
        res = decide_nfa_in_ufa(a, b)
        timer.lap("decide")
        result = {
            "kind": kind,
            "verdict": res.kind,
            "route": "determinise lhs, lift rhs, decide UFA universality",
        }
        if res.kind == "holds":
            code = EXIT_HOLDS
        elif res.kind == "fails":
            code = EXIT_FAILS
            result["witness"] = a.alphabet.format_word(res.witness)
        else:  # rhs is not actually unambiguous
            code = EXIT_DATA
            result["detail"] = "right-hand automaton is not unambiguous"
            if res.witness is not None:
                result["ambiguous_word"] = b.alphabet.format_word(res.witness)
        if res.certificate is not None:
            result["certificate"] = list(res.certificate)
        return code, result, inputs, None

    # nfa-in-ucfg: build the universality instance and run the pipeline
    g = parse_grammar(_read(args.rhs))
    timer.lap("parse")
    gs = g if g.is_short_gnf else to_short_gnf(g)
    chk = check_unambiguous_bounded(gs, conf["unambiguity_bound"])
    if not chk.ok:
        result = {
            "kind": kind,
            "verdict": "not_unambiguous",
            "detail": f"right-hand grammar: {chk}",
            "ambiguous_word": gs.alphabet.format_word(chk.witness),
        }
        return EXIT_DATA, result, inputs, None
    inst = build_nfa_in_ucfg_instance(a, gs)
    timer.lap("reduce")
    try:
        urep = decide_universality_grammar(
            inst.target,
            bound=conf["bound"],
            measure_tol=conf["measure_tol"],
            smt_backend=conf["smt_backend"],
        )
    except AmbiguityDiagnostic as exc:
        timer.lap("decide")
        result = {
            "kind": kind,
            "verdict": "not_unambiguous",
            "detail": f"right-hand grammar is not unambiguous: {exc}",
        }
        return EXIT_DATA, result, inputs, None
    timer.lap("decide")
    provenance = {k: v for k, v in inst.provenance.items() if k != "homomorphism"}
    verdict_map = {
        "UNIVERSAL-CERTIFIED": ("holds", EXIT_HOLDS),
        "UNIVERSAL-BOUNDED": (f"holds-bounded({urep.bound})", EXIT_UNDECIDED),
        "NOT-UNIVERSAL": ("fails", EXIT_FAILS),
        "UNDECIDED": ("undecided", EXIT_UNDECIDED),
    }
    verdict, code = verdict_map[urep.verdict]
    result = {
        "kind": kind,
        "verdict": verdict,
        "pipeline_verdict": urep.describe(inst.target.alphabet),
        "provenance": provenance,
        "stages": list(urep.stages),
    }
    if urep.verdict == "NOT-UNIVERSAL":
        if urep.witness is not None:
            hom = inst.provenance["homomorphism"]
            lifted = inst.target.alphabet
            names = [hom[lifted.name(c)] for c in urep.witness]
            result["witness"] = " ".join(names) if names else "eps"
        else:
            result["certificate"] = urep.certificate
    upto = urep.witness_length if urep.witness_length is not None else conf["bound"]
    writer = _deficit_writer(inst.target, upto, "inclusion: reduced deficit scan")
    return code, result, inputs, writer


def _cmd_measure(args, conf, timer):
    inputs = {"target": _entry(args.target)}
    text = _read(args.target)
    shape = _sniff_target(text)
    if shape == "automaton":
        target = parse_automaton(text)
        timer.lap("parse")
        mu = regular_measure_exact(target)
        lo = hi = mu
        measured = {"kind": "exact", "value": mu, "approx": _fig_float(mu)}
    else:
        g = parse_grammar(text)
        target = g if g.is_short_gnf else to_short_gnf(g)
        timer.lap("parse")
        # the measure semantics assume unambiguity; spot-check it before
        # trusting derivation counts as word counts
        chk = check_unambiguous_bounded(target, conf["unambiguity_bound"])
        if not chk.ok:
            result = {
                "target_kind": shape,
                "verdict": "not-unambiguous",
                "detail": str(chk),
                "ambiguous_word": target.alphabet.format_word(chk.witness),
            }
            return EXIT_DATA, result, inputs, None
        m = ucfg_measure(target, tol=conf["tol"])
        if m.kind == "exact":
            lo = hi = m.value
            measured = {"kind": "exact", "value": m.value, "approx": _fig_float(m.value)}
        else:
            lo, hi = m.interval.lo, m.interval.hi
            measured = {"kind": "interval", "interval": _interval_ready(m.interval)}
    timer.lap("measure")
    result = {"target_kind": shape, "measure": measured}
    code = EXIT_HOLDS

    if conf["compare"] is not None:
        op, eps = _parse_compare(conf["compare"])
        dec = trivial_epsilon_decision(op, eps)
        if dec is None:
            dec = compare_measure(ComparisonQuery(target, eps, op), tol=conf["tol"])
        comparison = {
            "op": op,
            "epsilon": eps,
            "decision": dec.decision,
        }
        if dec.reason:
            comparison["reason"] = dec.reason
        if dec.witness is not None:
            comparison["witness"] = target.alphabet.format_word(dec.witness)
        if dec.exact is not None:
            comparison["exact"] = dec.exact
        if dec.interval is not None:
            comparison["interval"] = _interval_ready(dec.interval)
        result["comparison"] = comparison
        code = {"holds": EXIT_HOLDS, "fails": EXIT_FAILS}.get(dec.decision, EXIT_UNDECIDED)
        timer.lap("compare")

    estimate = None
    if conf["mc"] is not None:
        samples, seed = conf["mc"]
        est = monte_carlo_measure(target, samples, seed)
        estimate = (est.mean, est.half_width)
        result["monte_carlo"] = {
            "samples": est.samples,
            "seed": est.seed,
            "mean": est.mean,
            "half_width": est.half_width,
            "confidence": est.confidence,
            "consistent": bool(
                Fraction(est.mean) + Fraction(est.half_width) >= lo
                and Fraction(est.mean) - Fraction(est.half_width) <= hi
            ),
        }
        timer.lap("mc")

    def write(out_dir: Path) -> None:
        rows = [("lower", rpt.frac_str(lo), _fig_float(lo)), ("upper", rpt.frac_str(hi), _fig_float(hi))]
        if estimate is not None:
            rows.append(("mc_mean", "", estimate[0]))
            rows.append(("mc_half_width", "", estimate[1]))
        rpt.write_csv(out_dir / "data.csv", ["quantity", "exact", "approx"], rows)
        rpt.render_interval_figure(
            out_dir / "figure.png", "coin-flip measure", lo, hi, estimate
        )

    return code, result, inputs, write


def _cmd_sqrtsum(args, conf, timer):
    inputs = {"instance": _entry(args.instance)}
    d0, ds, op = parse_instance(_read(args.instance))
    inst = normalise_instance(d0, ds, op)
    timer.lap("parse")
    out = build_reduction(inst)
    timer.lap("build")

    result = {
        "instance": {"d0": d0, "d": list(ds), "op": op},
        "normalised": {"d0": inst.d0, "d": list(inst.ds), "op": inst.op, "h": inst.h},
        "epsilon": out.epsilon,
        "measure_op": out.metadata["measure_op"],
        "a_weight": out.a_weight,
        "grammar_size": out.metadata["grammar_size"],
        "nonterminals": len(out.grammar.productions),
        "branches": out.metadata["branches"],
    }
    code = EXIT_HOLDS
    if conf["verify"]:
        v = verify_reduction(
            out, inst, tol=conf["tol"], unambiguity_bound=conf["unambiguity_bound"]
        )
        timer.lap("verify")
        ready = {}
        for key, value in v.items():
            if isinstance(value, IntervalRational):
                ready[key] = _interval_ready(value)
            else:
                ready[key] = value
        result["verify"] = ready
        if not v["ok"]:
            code = EXIT_INTERNAL

    xs_float = [
        (_fig_float(u) or 0.0) + (_fig_float(v) or 0.0) * math.sqrt(di)
        for (u, v), di in zip(out.xs, inst.ds)
    ]

    def write(out_dir: Path) -> None:
        (out_dir / "grammar.txt").write_text(print_grammar(out.grammar))
        meta = {
            "epsilon": rpt.frac_str(out.epsilon),
            "measure_op": out.metadata["measure_op"],
            "a_weight": rpt.frac_str(out.a_weight),
            "instance": rpt.json_ready(result["instance"]),
            "normalised": rpt.json_ready(result["normalised"]),
            "cs": [rpt.frac_str(c) for c in out.cs],
            "xs": [[rpt.frac_str(u), rpt.frac_str(v)] for u, v in out.xs],
            "metadata": rpt.json_ready(out.metadata),
        }
        import json as _json

        (out_dir / "reduction.json").write_text(
            _json.dumps(meta, sort_keys=True, indent=2) + "\n"
        )
        rows = [
            (i + 1, di, rpt.frac_str(c), rpt.frac_str(u), rpt.frac_str(v), xf)
            for i, (di, c, (u, v), xf) in enumerate(zip(inst.ds, out.cs, out.xs, xs_float))
        ]
        rpt.write_csv(
            out_dir / "data.csv", ["i", "d_i", "c_i", "x_u", "x_v", "x_approx"], rows
        )
        labels = [f"a{i + 1} (d={di})" for i, di in enumerate(inst.ds)]
        rpt.render_bars_figure(
            out_dir / "figure.png",
            "branch measure decomposition x = c + x^2/2",
            labels,
            [
                ("c_i", [_fig_float(c) or 0.0 for c in out.cs]),
                ("x_i^2 / 2", [xf * xf / 2 for xf in xs_float]),
            ],
            "measure",
            stacked=True,
        )

    return code, result, inputs, write


def _cmd_seq(args, conf, timer):
    inputs = {"system": _entry(args.system)}
    s = parse_convrec(_read(args.system))
    timer.lap("parse")
    action = args.action

    if action == "eval":
        if args.n is None:
            raise UsageError("seq ... eval needs a length: seq FILE eval N")
        n = args.n
        if n < 0:
            raise UsageError("eval length must be nonnegative")
        table = eval_prefix(s, n)
        timer.lap("eval")
        result = {
            "action": "eval",
            "n": n,
            "names": list(s.names),
            "values": {name: [Fraction(v) for v in row] for name, row in zip(s.names, table)},
        }

        def write(out_dir: Path) -> None:
            xs = list(range(n + 1))
            rows = [
                [i] + [rpt.frac_str(Fraction(table[r][i])) for r in range(len(s.names))]
                for i in xs
            ]
            rpt.write_csv(out_dir / "data.csv", ["n"] + list(s.names), rows)
            series = [
                (name, [_fig_float(v) for v in row])
                for name, row in zip(s.names, table)
            ]
            logy = all(
                v is None or v > 0 for _, row in series for v in row
            ) and any(v is not None and v > 0 for _, row in series for v in row)
            rpt.render_series_figure(
                out_dir / "figure.png", "sequence prefix", "n", "value", xs, series, logy=logy
            )

        return EXIT_HOLDS, result, inputs, write

    if action == "zeroness":
        cfg = ZeronessConfig(
            prefix_bound=conf["prefix_bound"],
            backend=conf["smt_backend"],
            timeout=conf["timeout"],
        )
        v = zeroness(s, cfg)
        timer.lap("zeroness")
        result = {"action": "zeroness", "verdict": v.kind}
        if v.n is not None:
            result["first_nonzero_index"] = v.n
        if v.value is not None:
            result["value"] = Fraction(v.value)
        if v.bound is not None:
            result["bound"] = v.bound
        if v.backend is not None:
            result["backend"] = v.backend
        if v.reason is not None:
            result["reason"] = v.reason
        code = {
            "nonzero_at": EXIT_FAILS,
            "zero_certified": EXIT_HOLDS,
        }.get(v.kind, EXIT_UNDECIDED)
        return code, result, inputs, None

    # export-smt
    script = export_smt(s)
    validate_smt(script)
    timer.lap("export")
    result = {
        "action": "export-smt",
        "validated": True,
        "script_sha256": hashlib.sha256(script.encode()).hexdigest(),
        "script": script,
    }

    def write(out_dir: Path) -> None:
        (out_dir / "system.smt2").write_text(script)

    return EXIT_HOLDS, result, inputs, write


# ---------------------------------------------------------------------------
# argument wiring

_HARD_DEFAULTS = {
    "universality": {
        "bound": 32,
        "measure_tol": Fraction(1, 1 << 30),
        "smt_backend": None,
    },
    "inclusion": {
        "kind": None,
        "bound": 32,
        "measure_tol": Fraction(1, 1 << 30),
        "smt_backend": None,
        "unambiguity_bound": 8,
    },
    "measure": {"tol": Fraction(1, 1 << 30), "compare": None, "mc": None, "unambiguity_bound": 8},
    "sqrtsum": {"tol": Fraction(1, 10**6), "unambiguity_bound": 8, "verify": False},
    "seq": {"prefix_bound": None, "timeout": 60.0, "smt_backend": None},
}

_COMMON_DEFAULTS = {"json": False, "timings": False, "out_dir": None}

_HANDLERS = {
    "universality": _cmd_universality,
    "inclusion": _cmd_inclusion,
    "measure": _cmd_measure,
    "sqrtsum": _cmd_sqrtsum,
    "seq": _cmd_seq,
}


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--json", action="store_const", const=True, default=None,
                     help="print the report as canonical JSON")
    sub.add_argument("--timings", action="store_const", const=True, default=None,
                     help="include wall-clock stage timings in the report")
    sub.add_argument("--config", metavar="FILE",
                     help="key=value file supplying defaults for any flag")
    sub.add_argument("--out-dir", metavar="DIR", dest="out_dir",
                     help="directory for report.json, data.csv, and figure.png")


def _build_parser() -> _Parser:
    parser = _Parser(prog="unamb", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = subs.add_parser("universality", help="decide whether a grammar derives every word")
    p.add_argument("grammar", help="grammar file")
    p.add_argument("--bound", type=int, help="length bound for the counting scan (default 32)")
    p.add_argument("--measure-tol", dest="measure_tol", type=_fraction,
                   help="tolerance for the measure stage")
    p.add_argument("--smt-backend", dest="smt_backend",
                   help=f"solver executable for certification (or ${SMT_BACKEND_ENV})")
    _add_common(p)

    p = subs.add_parser("inclusion", help="decide a language inclusion")
    p.add_argument("lhs", help="left-hand automaton file")
    p.add_argument("rhs", help="right-hand automaton or grammar file")
    p.add_argument("--kind", choices=["nfa-in-ufa", "nfa-in-ucfg", *_UNSUPPORTED_KINDS],
                   help="which inclusion to decide")
    p.add_argument("--bound", type=int, help="length bound for the pipeline scan")
    p.add_argument("--measure-tol", dest="measure_tol", type=_fraction,
                   help="tolerance for the measure stage")
    p.add_argument("--smt-backend", dest="smt_backend",
                   help=f"solver executable for certification (or ${SMT_BACKEND_ENV})")
    p.add_argument("--unambiguity-bound", dest="unambiguity_bound", type=int,
                   help="right-hand grammar spot-check length bound (default 8)")
    _add_common(p)

    p = subs.add_parser("measure", help="coin-flip measure of an automaton or grammar")
    p.add_argument("target", help="automaton or grammar file")
    p.add_argument("--tol", type=_fraction, help="enclosure tolerance for grammar targets")
    p.add_argument("--compare", metavar='"OP EPS"',
                   help='compare the measure against a threshold, e.g. ">= 1/2"')
    p.add_argument("--mc", nargs=2, type=int, metavar=("SAMPLES", "SEED"),
                   help="Monte Carlo cross-check")
    p.add_argument("--unambiguity-bound", dest="unambiguity_bound", type=int,
                   help="derivation-count spot-check length bound (default 8)")
    _add_common(p)

    p = subs.add_parser("sqrtsum", help="emit the reduction for a square-root-sum instance")
    p.add_argument("instance", help="instance JSON file")
    p.add_argument("--verify", action="store_const", const=True, default=None,
                   help="run the end-to-end verification checks")
    p.add_argument("--tol", type=_fraction, help="verification tolerance (default 1/10^6)")
    p.add_argument("--unambiguity-bound", dest="unambiguity_bound", type=int,
                   help="derivation-count check length bound (default 8)")
    _add_common(p)

    p = subs.add_parser("seq", help="convolution system tools")
    p.add_argument("system", help="system file")
    p.add_argument("action", choices=["eval", "zeroness", "export-smt"])
    p.add_argument("n", nargs="?", type=int, help="prefix length for eval")
    p.add_argument("--prefix-bound", dest="prefix_bound", type=int,
                   help="scan length for zeroness")
    p.add_argument("--timeout", type=float, help="solver timeout in seconds")
    p.add_argument("--smt-backend", dest="smt_backend",
                   help=f"solver executable for certification (or ${SMT_BACKEND_ENV})")
    _add_common(p)

    return parser


def _effective_config(args) -> dict:
    """Merge CLI flags over config-file values over hard defaults."""
    file_values = _load_config(args.config) if args.config else {}
    conf = {}
    schema = dict(_HARD_DEFAULTS[args.command])
    schema.update(_COMMON_DEFAULTS)
    for name, default in schema.items():
        value = getattr(args, name, None)
        if value is None and name in file_values:
            converter = _CONFIG_CONVERTERS[name]
            try:
                value = converter(file_values[name])
            except (ValueError, ZeroDivisionError):
                raise UsageError(f"config value for {name} is malformed: {file_values[name]!r}")
        if value is None:
            value = default
        conf[name] = value
    if isinstance(conf.get("mc"), list):
        conf["mc"] = tuple(conf["mc"])
    if "smt_backend" in conf and conf["smt_backend"] is None:
        conf["smt_backend"] = os.environ.get(SMT_BACKEND_ENV) or None
    return conf


def _report_config(conf: dict) -> dict:
    public = {}
    for key in sorted(conf):
        value = conf[key]
        if key == "mc" and value is not None:
            public["mc_samples"], public["mc_seed"] = value[0], value[1]
        else:
            public[key] = value
    return public


def _run(argv) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError("a subcommand is required (see --help)")
    conf = _effective_config(args)

    timer = _Timer()
    code, result, inputs, writer = _HANDLERS[args.command](args, conf, timer)

    out_dir = conf["out_dir"]
    if out_dir is None and args.command == "sqrtsum":
        out_dir = Path(args.instance).stem + "-out"
        conf = dict(conf)
        conf["out_dir"] = out_dir
    if out_dir is not None:
        files = ["report.json"]
        if writer is not None:
            files += {"sqrtsum": ["grammar.txt", "reduction.json", "data.csv", "figure.png"],
                      "seq": {"eval": ["data.csv", "figure.png"],
                              "export-smt": ["system.smt2"]}.get(getattr(args, "action", ""), []),
                      }.get(args.command, ["data.csv", "figure.png"])
        result["outputs"] = {"directory": str(out_dir), "files": files}

    if args.config:
        inputs["config"] = _entry(args.config)

    report = rpt.RunReport(
        command=args.command,
        inputs=inputs,
        config=_report_config(conf),
        result=result,
        timings=timer.total() if conf["timings"] else None,
    )

    if out_dir is not None:
        out_path = Path(out_dir)
        out_path.mkdir(parents=True, exist_ok=True)
        if writer is not None:
            writer(out_path)
        (out_path / "report.json").write_text(report.to_json())

    sys.stdout.write(report.to_json() if conf["json"] else report.to_text())
    return code


def main(argv: list[str] | None = None) -> int:
    try:
        return _run(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _InputMissing as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOINPUT
    except BackendError as exc:
        print(f"solver backend error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except ValueError as exc:
        # every domain error (parse, format, reduction, measure) is one
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
