"""MPS export and re-import for assembled problems.

The writer emits classic fixed-layout MPS (ROWS / COLUMNS / RHS / BOUNDS,
binaries bracketed by INTORG/INTEND markers). Row names come from the
constraint-family tags, column names from the variable kinds. When any
natural name would exceed the 8-character budget of the fixed format, all
names fall back to generated short names and a sidecar map records the
natural name for each.

Values are written with shortest round-trip float formatting, so parsing
the output reproduces the exact coefficient matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .milp import MilpProblem, Row, SENSE_EQ, SENSE_GE, SENSE_LE

_NAME_LIMIT = 8
_SENSE_TO_TYPE = {SENSE_LE: "L", SENSE_EQ: "E", SENSE_GE: "G"}
_TYPE_TO_SENSE = {v: k for k, v in _SENSE_TO_TYPE.items()}

OBJECTIVE_ROW = "COST"


@dataclass(frozen=True)
class MpsDocument:
    """Rendered MPS text plus the short-name sidecar (None if not needed)."""

    text: str
    name_map: dict[str, str] | None


def _natural_column_name(description: str) -> str:
    # "X[i=0,k=1,t=7]" -> "X0_1_7"
    kind = description[0]
    inner = description[description.index("[") + 1 : -1]
    parts = [piece.split("=")[1] for piece in inner.split(",")]
    return kind + "_".join(parts)


def _natural_row_name(row_name: str) -> str:
    # "1b[k=0,t=3]" -> "b0_3"
    tag = row_name[: row_name.index("[")]
    inner = row_name[row_name.index("[") + 1 : -1]
    parts = [piece.split("=")[1] for piece in inner.split(",")]
    return tag[-1] + "_".join(parts)


def _make_names(prob: MilpProblem) -> tuple[list[str], list[str], dict[str, str] | None]:
    idx = prob.index
    col_names = [_natural_column_name(idx.describe(c)) for c in range(prob.num_columns)]
    row_names = [_natural_row_name(row.name) for row in prob.rows]
    over = any(len(n) > _NAME_LIMIT for n in col_names) or any(
        len(n) > _NAME_LIMIT for n in row_names
    )
    if not over:
        return col_names, row_names, None
    short_cols = [f"C{c:07d}" for c in range(prob.num_columns)]
    short_rows = [f"R{r:07d}" for r in range(len(prob.rows))]
    name_map = {s: n for s, n in zip(short_cols, col_names)}
    name_map.update({s: prob.rows[r].name for r, s in enumerate(short_rows)})
    return short_cols, short_rows, name_map


def _fmt(value: float) -> str:
    # repr() gives the shortest string that round-trips the float exactly.
    return repr(float(value))


def export_mps(prob: MilpProblem, problem_name: str = "FLEETSCHED") -> MpsDocument:
    """Render the problem as MPS text; deterministic byte-for-byte."""
    col_names, row_names, name_map = _make_names(prob)

    lines = [f"NAME          {problem_name}", "ROWS", f" N  {OBJECTIVE_ROW}"]
    for row, rname in zip(prob.rows, row_names):
        lines.append(f" {_SENSE_TO_TYPE[row.sense]}  {rname}")

    # Column-major entries: objective coefficient first, then constraint
    # rows in emission order.
    per_col: list[list[tuple[str, float]]] = [[] for _ in range(prob.num_columns)]
    for c in range(prob.num_columns):
        if prob.objective[c] != 0.0:
            per_col[c].append((OBJECTIVE_ROW, float(prob.objective[c])))
    for row, rname in zip(prob.rows, row_names):
        for col, coef in row.coefs:
            per_col[col].append((rname, float(coef)))

    lines.append("COLUMNS")
    marker_open = False
    for c in range(prob.num_columns):
        if prob.is_binary[c] and not marker_open:
            lines.append("    MARKER                 'MARKER'                 'INTORG'")
            marker_open = True
        if not prob.is_binary[c] and marker_open:
            lines.append("    MARKER                 'MARKER'                 'INTEND'")
            marker_open = False
        entries = per_col[c]
        cname = col_names[c]
        for j in range(0, len(entries), 2):
            pair = entries[j : j + 2]
            chunks = [f"    {cname:<10}"]
            for rname, coef in pair:
                chunks.append(f"{rname:<10}{_fmt(coef):<16}")
            lines.append("".join(chunks).rstrip())
    if marker_open:
        lines.append("    MARKER                 'MARKER'                 'INTEND'")

    lines.append("RHS")
    rhs_entries = [
        (rname, float(row.rhs))
        for row, rname in zip(prob.rows, row_names)
        if row.rhs != 0.0
    ]
    for j in range(0, len(rhs_entries), 2):
        pair = rhs_entries[j : j + 2]
        chunks = ["    RHS       "]
        for rname, value in pair:
            chunks.append(f"{rname:<10}{_fmt(value):<16}")
        lines.append("".join(chunks).rstrip())

    # Bounds: continuous default is [0, +inf); anything else is explicit.
    # Binary columns always get an explicit line so parsing needs no
    # integer-default convention.
    lines.append("BOUNDS")
    for c in range(prob.num_columns):
        lo, up = float(prob.lower[c]), float(prob.upper[c])
        cname = col_names[c]
        if lo == up:
            lines.append(f" FX BND       {cname:<10}{_fmt(lo)}")
            continue
        if lo != 0.0:
            if math.isinf(lo):
                lines.append(f" MI BND       {cname}")
            else:
                lines.append(f" LO BND       {cname:<10}{_fmt(lo)}")
        if math.isinf(up):
            if prob.is_binary[c]:
                lines.append(f" PL BND       {cname}")
        else:
            lines.append(f" UP BND       {cname:<10}{_fmt(up)}")

    lines.append("ENDATA")
    return MpsDocument(text="\n".join(lines) + "\n", name_map=name_map)


@dataclass
class ParsedMps:
    """MPS contents in name space: rows, senses, coefficients, bounds."""

    name: str
    objective_name: str
    row_names: list[str]
    row_senses: dict[str, str]
    col_names: list[str]
    coefficients: dict[tuple[str, str], float]  # (row, col) -> coef
    objective: dict[str, float]  # col -> coef
    rhs: dict[str, float]
    lower: dict[str, float]
    upper: dict[str, float]
    integer_cols: set[str]


def parse_mps(text: str) -> ParsedMps:
    """Parse MPS text produced by export_mps (whitespace-tokenized)."""
    parsed = ParsedMps(
        name="",
        objective_name="",
        row_names=[],
        row_senses={},
        col_names=[],
        coefficients={},
        objective={},
        rhs={},
        lower={},
        upper={},
        integer_cols=set(),
    )
    section = None
    in_integer = False
    seen_cols: set[str] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        tokens = raw.split()
        head = tokens[0].upper()

        if not raw.startswith(" ") and not raw.startswith("\t"):
            if head == "NAME":
                parsed.name = tokens[1] if len(tokens) > 1 else ""
                continue
            if head in {"ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS"}:
                section = head
                continue
            if head == "ENDATA":
                break
            raise ValueError(f"line {lineno}: unknown MPS section {tokens[0]!r}")

        if section == "ROWS":
            rtype, rname = tokens[0].upper(), tokens[1]
            if rtype == "N":
                if parsed.objective_name:
                    raise ValueError(f"line {lineno}: second objective row {rname!r}")
                parsed.objective_name = rname
            else:
                if rtype not in _TYPE_TO_SENSE:
                    raise ValueError(f"line {lineno}: unknown row type {rtype!r}")
                parsed.row_names.append(rname)
                parsed.row_senses[rname] = _TYPE_TO_SENSE[rtype]
            continue

        if section == "COLUMNS":
            if len(tokens) >= 3 and tokens[1] == "'MARKER'":
                if tokens[2] == "'INTORG'":
                    in_integer = True
                elif tokens[2] == "'INTEND'":
                    in_integer = False
                continue
            cname = tokens[0]
            if cname not in seen_cols:
                seen_cols.add(cname)
                parsed.col_names.append(cname)
                if in_integer:
                    parsed.integer_cols.add(cname)
            pairs = tokens[1:]
            if len(pairs) % 2 != 0:
                raise ValueError(f"line {lineno}: odd COLUMNS entry count")
            for rname, value in zip(pairs[::2], pairs[1::2]):
                coef = float(value)
                if rname == parsed.objective_name:
                    parsed.objective[cname] = parsed.objective.get(cname, 0.0) + coef
                else:
                    key = (rname, cname)
                    if key in parsed.coefficients:
                        raise ValueError(
                            f"line {lineno}: duplicate coefficient for {key}"
                        )
                    parsed.coefficients[key] = coef
            continue

        if section == "RHS":
            pairs = tokens[1:]
            for rname, value in zip(pairs[::2], pairs[1::2]):
                parsed.rhs[rname] = float(value)
            continue

        if section == "BOUNDS":
            btype = tokens[0].upper()
            cname = tokens[2]
            if btype == "FX":
                parsed.lower[cname] = float(tokens[3])
                parsed.upper[cname] = float(tokens[3])
            elif btype == "LO":
                parsed.lower[cname] = float(tokens[3])
            elif btype == "UP":
                parsed.upper[cname] = float(tokens[3])
            elif btype == "MI":
                parsed.lower[cname] = -math.inf
            elif btype == "PL":
                parsed.upper[cname] = math.inf
            elif btype == "BV":
                parsed.lower[cname] = 0.0
                parsed.upper[cname] = 1.0
                parsed.integer_cols.add(cname)
            else:
                raise ValueError(f"line {lineno}: unknown bound type {btype!r}")
            continue

        raise ValueError(f"line {lineno}: data outside any section")

    return parsed


def parsed_arrays(parsed: ParsedMps):
    """Flatten a ParsedMps into arrays in its column/row emission order.

    Returns (objective, row_senses, rhs, coefficient dict keyed by
    (row_pos, col_pos), lower, upper, is_integer), applying the MPS default
    bounds [0, +inf) where no BOUNDS line was given.
    """
    col_pos = {c: j for j, c in enumerate(parsed.col_names)}
    row_pos = {r: i for i, r in enumerate(parsed.row_names)}
    n, m = len(parsed.col_names), len(parsed.row_names)

    objective = np.zeros(n)
    for cname, coef in parsed.objective.items():
        objective[col_pos[cname]] = coef

    senses = [parsed.row_senses[r] for r in parsed.row_names]
    rhs = np.zeros(m)
    for rname, value in parsed.rhs.items():
        rhs[row_pos[rname]] = value

    coefs = {
        (row_pos[r], col_pos[c]): v for (r, c), v in parsed.coefficients.items()
    }

    lower = np.zeros(n)
    upper = np.full(n, np.inf)
    for cname, value in parsed.lower.items():
        lower[col_pos[cname]] = value
    for cname, value in parsed.upper.items():
        upper[col_pos[cname]] = value

    is_integer = np.zeros(n, dtype=bool)
    for cname in parsed.integer_cols:
        is_integer[col_pos[cname]] = True

    return objective, senses, rhs, coefs, lower, upper, is_integer


def matches_problem(parsed: ParsedMps, prob: MilpProblem) -> bool:
    """True iff the parsed file encodes exactly the given problem."""
    objective, senses, rhs, coefs, lower, upper, is_integer = parsed_arrays(parsed)
    if objective.shape[0] != prob.num_columns or len(senses) != prob.num_rows:
        return False
    if not np.array_equal(objective, prob.objective):
        return False
    for i, row in enumerate(prob.rows):
        if senses[i] != row.sense or rhs[i] != row.rhs:
            return False
    expected = {}
    for i, row in enumerate(prob.rows):
        for col, coef in row.coefs:
            expected[(i, col)] = coef
    if coefs != expected:
        return False
    if not np.array_equal(lower, prob.lower) or not np.array_equal(upper, prob.upper):
        return False
    return np.array_equal(is_integer, prob.is_binary)
