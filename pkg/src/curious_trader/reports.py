"""Report and dataset file formats.

* ``trackrecord.csv``: header ``tick,equity,return``; the first row leaves
  ``return`` empty.
* ``answers.jsonl``: one object per decision tick with ``tick``, ``verdict``,
  ``ci_lo``, ``ci_hi`` (null for DontKnow) and ``basis_count``.
* ``turing_report.json``: see ``TURING_REPORT_SCHEMA``.
* ``sweep_ranking.csv``: one row per agent, best first.
* datasets for ``distance``: a header of column names, then numeric rows.

Floats are written with ``repr`` so files round-trip exactly and repeated runs
are byte-identical.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ParseError
from .evaluation import TrackRecord, TuringReport, good_trade_fraction, metrics

TRACKRECORD_HEADER = "tick,equity,return"
SWEEP_HEADER = ("rank,index,score,sharpe,max_drawdown,var_95,final_equity,trades,"
                "good_trade_fraction,dont_know_fraction,seed,band_lo,band_hi,epsilon,"
                "min_connected,window")

_METRICS_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["sharpe", "max_drawdown", "var_95"],
    "properties": {
        "sharpe": {"type": "number"},
        "max_drawdown": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "var_95": {"type": "number", "minimum": 0},
    },
}

TURING_REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["metrics_a", "metrics_b", "rho", "distance", "verdict", "threshold", "bands"],
    "properties": {
        "metrics_a": _METRICS_SCHEMA,
        "metrics_b": _METRICS_SCHEMA,
        "rho": {"type": "number", "minimum": 0, "maximum": 1},
        "distance": {"type": "number", "minimum": 0},
        "verdict": {"enum": ["Indistinguishable", "Distinguishable"]},
        "threshold": {"type": "number", "exclusiveMinimum": 0},
        "bands": {
            "type": "object",
            "additionalProperties": False,
            "required": ["sharpe", "max_drawdown", "var_95"],
            "properties": {k: {"type": "number", "minimum": 0}
                           for k in ("sharpe", "max_drawdown", "var_95")},
        },
    },
}

ANSWER_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["tick", "verdict", "ci_lo", "ci_hi", "basis_count"],
    "properties": {
        "tick": {"type": "integer", "minimum": 0},
        "verdict": {"enum": ["Buy", "Sell", "Hold", "DontKnow"]},
        "ci_lo": {"type": ["number", "null"]},
        "ci_hi": {"type": ["number", "null"]},
        "basis_count": {"type": "integer", "minimum": 0},
    },
}


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_lines(path, lines: Sequence[str]) -> None:
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


# --------------------------------------------------------------------- track records


def write_trackrecord(record: TrackRecord, path, ticks: Sequence[int] | None = None) -> None:
    ticks = list(range(record.equity.size)) if ticks is None else list(ticks)
    if len(ticks) != record.equity.size:
        raise ValueError("need one tick label per equity point")
    lines = [TRACKRECORD_HEADER, f"{ticks[0]},{_fmt(record.equity[0])},"]
    lines += [f"{t},{_fmt(e)},{_fmt(r)}"
              for t, e, r in zip(ticks[1:], record.equity[1:], record.returns)]
    _write_lines(path, lines)


def read_trackrecord(path) -> TrackRecord:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != TRACKRECORD_HEADER:
        raise ParseError(f"expected header {TRACKRECORD_HEADER!r}", line=1)
    equity, returns = [], []
    for lineno, raw in enumerate(lines[1:], start=2):
        parts = raw.split(",")
        if len(parts) != 3:
            raise ParseError(f"expected 3 fields, got {len(parts)}", line=lineno)
        try:
            int(parts[0])
            e = float(parts[1])
            r = float(parts[2]) if lineno > 2 else None
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from exc
        if lineno == 2 and parts[2] != "":
            raise ParseError("first row must leave return empty", line=lineno)
        if not (math.isfinite(e) and e > 0):
            raise ParseError(f"equity {parts[1]} is not positive", line=lineno)
        equity.append(e)
        if r is not None:
            returns.append(r)
    if not equity:
        raise ParseError("track record has no rows", line=2)
    try:
        return TrackRecord(np.array(equity), np.array(returns))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


# -------------------------------------------------------------------------- answers


def write_answers(rows, path) -> None:
    _write_lines(path, [json.dumps(row.to_json(), allow_nan=False) for row in rows])


def write_turing_report(report: TuringReport, path) -> None:
    Path(path).write_text(json.dumps(report.to_json(), indent=2, allow_nan=False) + "\n",
                          encoding="utf-8", newline="\n")


def write_sweep(results, path, risk_free: float = 0.0) -> None:
    lines = [SWEEP_HEADER]
    for res in results:
        run = res.run
        m = metrics(run.record, risk_free)
        frac = good_trade_fraction(run.record.trades)
        dont_know = sum(r.answer.verdict.value == "DontKnow" for r in run.answers)
        p = run.params
        lines.append(",".join([
            str(res.rank), str(res.index), _fmt(res.score), _fmt(m.sharpe),
            _fmt(m.max_drawdown), _fmt(m.var_95), _fmt(run.record.equity[-1]),
            str(len(run.record.trades)), "" if frac is None else _fmt(frac),
            _fmt(dont_know / len(run.answers)), str(p.seed), _fmt(p.band[0]), _fmt(p.band[1]),
            _fmt(p.epsilon), _fmt(p.min_connected), str(p.window),
        ]))
    _write_lines(path, lines)


# ------------------------------------------------------------------------- datasets


def read_dataset(path) -> np.ndarray:
    """Numeric table with a header row; returns an ``n x m`` array."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    lines = [ln for ln in text.split("\n") if ln != ""]
    if not lines:
        raise ParseError("dataset is empty", line=1)
    width = len(lines[0].split(","))
    rows = []
    for lineno, raw in enumerate(lines[1:], start=2):
        parts = raw.split(",")
        if len(parts) != width:
            raise ParseError(f"expected {width} fields, got {len(parts)}", line=lineno)
        try:
            values = [float(x) for x in parts]
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from exc
        if not all(math.isfinite(v) for v in values):
            raise ParseError("non-finite value", line=lineno)
        rows.append(values)
    if not rows:
        raise ParseError("dataset has no rows", line=2)
    return np.array(rows)
