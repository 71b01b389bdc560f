"""Matrix file formats and JSON report encoding.

Text format::

    m_A m_B
    M_11 ... M_1m_B
    ...

Blank lines and ``#`` comments are ignored.  The JSON format is
``{"rows": m_A, "cols": m_B, "entries": [[...], ...]}``.
"""

from __future__ import annotations

import json
import math
import sys

from dimwitness import __version__
from dimwitness.core import BellExpression
from dimwitness.errors import DomainError
from dimwitness.optimizer import DimensionProfile, WitnessReport


class MatrixParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


def _tokens(line: str):
    """Yield ``(column, token)`` with 1-based columns."""
    col = 0
    for tok in line.split():
        col = line.index(tok, col)
        yield col + 1, tok
        col += len(tok)


def _number(tok: str, line: int, col: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise MatrixParseError(f"not a number: {tok!r}", line, col) from None
    if not math.isfinite(v):
        raise MatrixParseError(f"non-finite entry {tok!r}", line, col)
    return v


def parse_matrix_text(text: str) -> BellExpression:
    if text.lstrip().startswith("{"):
        return parse_matrix_json(text)
    lines = [(i, ln.split("#", 1)[0]) for i, ln in enumerate(text.splitlines(), start=1)]
    lines = [(i, ln) for i, ln in lines if ln.strip()]
    if not lines:
        raise MatrixParseError("empty input")
    lineno, header = lines[0]
    head = list(_tokens(header))
    if len(head) != 2:
        raise MatrixParseError("header must be 'm_A m_B'", lineno, 1)
    dims = []
    for col, tok in head:
        if not tok.isdigit() or int(tok) < 1:
            raise MatrixParseError(f"bad dimension {tok!r}", lineno, col)
        dims.append(int(tok))
    rows, cols = dims
    body = lines[1:]
    if len(body) != rows:
        where = body[rows][0] if len(body) > rows else (body[-1][0] if body else lineno)
        raise MatrixParseError(f"expected {rows} matrix rows, found {len(body)}", where)
    entries = []
    for lineno, ln in body:
        toks = list(_tokens(ln))
        if len(toks) != cols:
            col = toks[cols][0] if len(toks) > cols else len(ln.rstrip()) + 1
            raise MatrixParseError(f"expected {cols} entries, found {len(toks)}", lineno, col)
        entries.append([_number(tok, lineno, col) for col, tok in toks])
    return _build(entries)


def parse_matrix_json(text: str) -> BellExpression:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(obj, dict) or not {"rows", "cols", "entries"} <= obj.keys():
        raise MatrixParseError("JSON matrix needs 'rows', 'cols' and 'entries'")
    rows, cols, entries = obj["rows"], obj["cols"], obj["entries"]
    if not isinstance(entries, list) or len(entries) != rows:
        raise MatrixParseError(f"'entries' must hold {rows} rows")
    out = []
    for i, row in enumerate(entries, start=1):
        if not isinstance(row, list) or len(row) != cols:
            raise MatrixParseError(f"row {i} must hold {cols} entries")
        vals = []
        for j, v in enumerate(row, start=1):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise MatrixParseError(f"entry ({i}, {j}) is not a finite number")
            vals.append(float(v))
        out.append(vals)
    return _build(out)


def _build(entries) -> BellExpression:
    try:
        return BellExpression(entries)
    except DomainError as exc:
        raise MatrixParseError(str(exc)) from None


def parse_matrix(source: str) -> BellExpression:
    """Read a matrix from a path, or from stdin when ``source`` is ``-``."""
    if source == "-":
        return parse_matrix_text(sys.stdin.read())
    try:
        with open(source) as fh:
            return parse_matrix_text(fh.read())
    except OSError as exc:
        raise MatrixParseError(f"cannot read {source}: {exc.strerror}") from None


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() and abs(v) < 2**53 else repr(float(v))


def format_matrix(expr: BellExpression, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps({"rows": expr.rows, "cols": expr.cols, "entries": expr.entries})
    lines = [f"{expr.rows} {expr.cols}"]
    lines += [" ".join(_fmt(v) for v in row) for row in expr.matrix]
    return "\n".join(lines) + "\n"


def profile_to_json(profile: DimensionProfile) -> list[dict]:
    return [{"n": e.n, "value": float(e.value), "converged": bool(e.converged),
             "restarts": int(e.restarts), "source": e.source} for e in profile.entries]


def report_to_json(report: WitnessReport) -> dict:
    return {
        "profile": profile_to_json(report.profile),
        "gaps": [{"n": g.n, "n_next": g.n_next, "size": float(g.size),
                  "witness_dim": g.witness_dim, "threshold": float(g.threshold),
                  "grade": g.grade} for g in report.gaps],
        "witness_dim": report.witness_dim,
        "grade": report.grade,
        "threshold": None if report.threshold is None else float(report.threshold),
    }


def profile_csv(profile: DimensionProfile) -> str:
    rows = ["n,value,converged"]
    rows += [f"{e.n},{float(e.value)!r},{str(bool(e.converged)).lower()}" for e in profile.entries]
    return "\n".join(rows) + "\n"


def envelope(command: str, seed, config: dict, payload, timing: float) -> dict:
    return {"tool_version": __version__, "command": command, "seed": seed,
            "config": config, "payload": payload, "timing": {"seconds": timing}}


def dumps(obj) -> str:
    """JSON with shortest round-trip float repr (at most 17 significant digits)."""
    return json.dumps(obj, indent=2, allow_nan=False)
