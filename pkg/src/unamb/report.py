"""Reproducible run reports for the command-line front end.

A report records everything needed to re-run the command: input paths
with content hashes, the effective configuration, and the result
payload.  Serialisation is canonical (sorted keys, fixed indentation,
exact rationals as strings), so two runs with the same inputs, flags,
and seed produce byte-identical output.  Wall-clock timings never
reproduce and are therefore opt-in.

Delimited output and figures live here too: commands that take an
output directory drop a CSV of their tabular data and a rendered PNG
next to the report.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

__all__ = [
    "RunReport",
    "frac_str",
    "hash_file",
    "json_ready",
    "render_bars_figure",
    "render_interval_figure",
    "render_series_figure",
    "write_csv",
]


def hash_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _approx(x: Fraction) -> float:
    try:
        return float(x)
    except OverflowError:
        return float("inf") if x > 0 else float("-inf")


def json_ready(obj):
    """Recursively convert a result payload to JSON-encodable form.

    Fractions become exact strings (floats lose the exactness the tools
    work hard for); tuples become lists; dict keys are stringified.
    """
    if isinstance(obj, Fraction):
        return frac_str(obj)
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, (int, str, float)):
        return obj
    if isinstance(obj, dict):
        return {str(k): json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    return str(obj)


def _flatten(prefix: str, value, lines: list[str]) -> None:
    if isinstance(value, dict):
        for k in value:
            _flatten(f"{prefix}.{k}" if prefix else str(k), value[k], lines)
    elif isinstance(value, list):
        if all(not isinstance(v, (dict, list)) for v in value):
            lines.append(f"{prefix}: {' '.join(str(v) for v in value)}")
        else:
            for i, v in enumerate(value):
                _flatten(f"{prefix}[{i}]", v, lines)
    else:
        lines.append(f"{prefix}: {value}")


@dataclass
class RunReport:
    """Self-contained record of one command invocation."""

    command: str
    inputs: dict[str, dict[str, str]]  # role -> {"path": ..., "sha256": ...}
    config: dict
    result: dict
    timings: dict | None = None

    @staticmethod
    def input_entry(path: str | Path) -> dict[str, str]:
        return {"path": str(path), "sha256": hash_file(path)}

    def payload(self) -> dict:
        out = {
            "command": self.command,
            "inputs": json_ready(self.inputs),
            "config": json_ready(self.config),
            "result": json_ready(self.result),
        }
        if self.timings is not None:
            out["timings"] = {k: round(v, 4) for k, v in self.timings.items()}
        return out

    def to_json(self) -> str:
        return json.dumps(self.payload(), sort_keys=True, indent=2) + "\n"

    def to_text(self) -> str:
        data = self.payload()
        lines = [f"command: {data['command']}"]
        for role in sorted(data["inputs"]):
            ent = data["inputs"][role]
            lines.append(f"input {role}: {ent['path']} (sha256 {ent['sha256'][:16]})")
        for key in sorted(data["config"]):
            lines.append(f"config {key}: {data['config'][key]}")
        _flatten("", data["result"], lines)
        if "timings" in data:
            for key in sorted(data["timings"]):
                lines.append(f"time {key}: {data['timings'][key]}s")
        return "\n".join(lines) + "\n"


def write_csv(path: str | Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow([str(v) for v in row])
    Path(path).write_text(buf.getvalue())


# Figures are rendered headless; the import lives inside the helpers so
# library use never touches matplotlib.  PNG metadata is pinned to keep
# repeated runs byte-stable.

_PNG_META = {"Software": "unamb"}


def _new_axes():
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=120)
    return plt, fig, ax


def _finish(plt, fig, ax, path: str | Path, title: str) -> None:
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(str(path), format="png", metadata=_PNG_META)
    plt.close(fig)


def render_series_figure(
    path: str | Path,
    title: str,
    xlabel: str,
    ylabel: str,
    xs: Sequence[int],
    series: Sequence[tuple[str, Sequence[Fraction | int | float | None]]],
    logy: bool = False,
) -> None:
    """Line plot of one or more sequences; None entries are skipped."""
    plt, fig, ax = _new_axes()
    for label, ys in series:
        px = [x for x, y in zip(xs, ys) if y is not None]
        py = [_approx(Fraction(y)) if isinstance(y, (int, Fraction)) else y
              for x, y in zip(xs, ys) if y is not None]
        ax.plot(px, py, marker="o", markersize=3, linewidth=1.2, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if logy:
        ax.set_yscale("log")
    if len(series) > 1:
        ax.legend()
    ax.grid(True, alpha=0.3)
    _finish(plt, fig, ax, path, title)


def render_interval_figure(
    path: str | Path,
    title: str,
    lo: Fraction,
    hi: Fraction,
    estimate: tuple[float, float] | None = None,
) -> None:
    """Measure enclosure on [0, 1], with an optional sampled estimate
    drawn as mean +/- half-width for a visual consistency check."""
    plt, fig, ax = _new_axes()
    flo, fhi = _approx(lo), _approx(hi)
    ax.axhspan(flo, fhi, color="tab:blue", alpha=0.35,
               label=f"certified [{flo:.9g}, {fhi:.9g}]")
    ax.axhline(flo, color="tab:blue", linewidth=1.0)
    ax.axhline(fhi, color="tab:blue", linewidth=1.0)
    if estimate is not None:
        mean, half = estimate
        ax.errorbar([0.5], [mean], yerr=[half], fmt="o", color="tab:red",
                    capsize=4, label=f"sampled {mean:.6g} +/- {half:.2g}")
    ax.set_xlim(0, 1)
    pad = max((fhi - flo) * 2, 0.05)
    ax.set_ylim(max(0.0, flo - pad), min(1.0, fhi + pad))
    ax.set_xticks([])
    ax.set_ylabel("measure")
    ax.legend(loc="best")
    _finish(plt, fig, ax, path, title)


def render_bars_figure(
    path: str | Path,
    title: str,
    labels: Sequence[str],
    groups: Sequence[tuple[str, Sequence[Fraction | float]]],
    ylabel: str,
    stacked: bool = False,
) -> None:
    """Grouped or stacked bar chart over categorical labels."""
    plt, fig, ax = _new_axes()
    idx = list(range(len(labels)))
    if stacked:
        bottom = [0.0] * len(labels)
        for name, values in groups:
            vals = [_approx(Fraction(v)) if isinstance(v, (int, Fraction)) else v
                    for v in values]
            ax.bar(idx, vals, bottom=bottom, label=name, width=0.6)
            bottom = [b + v for b, v in zip(bottom, vals)]
    else:
        width = 0.8 / max(1, len(groups))
        for gi, (name, values) in enumerate(groups):
            vals = [_approx(Fraction(v)) if isinstance(v, (int, Fraction)) else v
                    for v in values]
            offs = [i + (gi - (len(groups) - 1) / 2) * width for i in idx]
            ax.bar(offs, vals, width=width, label=name)
    ax.set_xticks(idx)
    ax.set_xticklabels(list(labels), rotation=30, ha="right")
    ax.set_ylabel(ylabel)
    ax.legend()
    ax.grid(True, axis="y", alpha=0.3)
    _finish(plt, fig, ax, path, title)
