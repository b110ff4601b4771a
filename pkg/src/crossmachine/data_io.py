"""Text formats: CPU score listings, runtime matrices, comparison tables, reports.

Parsers reject malformed input instead of repairing it, and every error names
the 1-based line it was found on. Numbers are written as the shortest decimal
text that reads back to the same float, so write-then-parse is the identity.
"""

from __future__ import annotations

import csv
import io
import math
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .runtime_model import MachineScore, RuntimeMatrix
from .signtest import DIRECTIONS, REJECT, PairedObservation, SignTestResult

__all__ = [
    "ParseError",
    "CpuScoreTable",
    "ComparisonRow",
    "ComparisonTable",
    "normalize_model",
    "parse_cpu_scores",
    "write_cpu_scores",
    "parse_runtime_matrix",
    "write_runtime_matrix",
    "parse_comparison",
    "write_comparison",
    "write_report",
]


class ParseError(ValueError):
    def __init__(self, lineno: int, message: str) -> None:
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def normalize_model(name: str) -> str:
    return " ".join(name.split()).casefold()


def _num(x: float) -> str:
    x = float(x)
    if math.isfinite(x) and x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _float(text: str, lineno: int, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(lineno, f"{what} {text!r} is not a number") from None
    if not math.isfinite(value):
        raise ParseError(lineno, f"{what} {text!r} is not finite")
    return value


def _lines(text: str) -> list[str]:
    # splitlines() also accepts CRLF
    return text.splitlines()


# -- CPU scores --------------------------------------------------------------


@dataclass(frozen=True)
class CpuScoreTable:
    entries: dict[str, float] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def lookup(self, cpu_model: str) -> float:
        """Score of ``cpu_model``; exact match after case and whitespace folding."""
        key = normalize_model(cpu_model)
        for name, score in self.entries.items():
            if normalize_model(name) == key:
                return score
        raise KeyError(cpu_model)

    def machine(self, cpu_model: str) -> MachineScore:
        return MachineScore(cpu_model, self.lookup(cpu_model))


_SEPARATOR = re.compile(r"^[\s|:+-]*$")


def parse_cpu_scores(text: str) -> CpuScoreTable:
    """Read ``model | score`` or tab-separated rows.

    Markdown table borders and separator rows are accepted. The first row
    is taken as a header when its score cell is not numeric.
    """
    entries: dict[str, float] = {}
    seen: dict[str, int] = {}
    first = True
    for lineno, raw in enumerate(_lines(text), start=1):
        line = raw.strip()
        if not line or _SEPARATOR.match(line):
            continue
        if "\t" in line and "|" not in line:
            cells = line.split("\t")
        else:
            cells = line.strip("|").split("|")
        cells = [c.strip() for c in cells if c.strip()]
        if len(cells) != 2:
            raise ParseError(lineno, f"expected two columns (model, score), got {len(cells)}")
        model, score_text = cells
        try:
            score = float(score_text)
        except ValueError:
            if first:
                first = False
                continue
            raise ParseError(lineno, f"score {score_text!r} is not a number") from None
        first = False
        if not (math.isfinite(score) and score > 0):
            raise ParseError(lineno, f"score of {model!r} must be positive")
        key = normalize_model(model)
        if key in seen:
            raise ParseError(lineno, f"duplicate model {model!r} (first seen on line {seen[key]})")
        seen[key] = lineno
        entries[" ".join(model.split())] = score
    return CpuScoreTable(entries)


def write_cpu_scores(table: CpuScoreTable) -> str:
    rows = ["model | score"] + [f"{name} | {_num(score)}" for name, score in table.entries.items()]
    return "\n".join(rows) + "\n"


# -- runtime matrix ------------------------------------------------------------


def parse_runtime_matrix(text: str) -> RuntimeMatrix:
    """Read the runtime-matrix CSV.

    Layout::

        machine,<model 1>,<model 2>,...
        score,<score 1>,<score 2>,...
        <process id>,<runtime on 1>,<runtime on 2>,...
    """
    rows = [(i, r) for i, r in enumerate(csv.reader(io.StringIO(text)), start=1) if any(c.strip() for c in r)]
    if len(rows) < 2:
        raise ParseError(len(rows) + 1, "expected a machine row and a score row")
    (l_names, names), (l_scores, scores) = rows[0], rows[1]
    names = [c.strip() for c in names[1:]]
    if not names:
        raise ParseError(l_names, "no machines listed")
    if len(scores) - 1 != len(names):
        raise ParseError(l_scores, f"expected {len(names)} scores, got {len(scores) - 1}")
    machines = []
    for name, cell in zip(names, scores[1:]):
        s = _float(cell.strip(), l_scores, f"score of {name!r}")
        if s <= 0:
            raise ParseError(l_scores, f"score of {name!r} must be positive")
        machines.append(MachineScore(name, s))
    processes: list[str] = []
    columns: list[list[float]] = []
    for lineno, row in rows[2:]:
        if len(row) - 1 != len(names):
            raise ParseError(lineno, f"expected {len(names)} runtimes, got {len(row) - 1}")
        values = []
        for name, cell in zip(names, row[1:]):
            t = _float(cell.strip(), lineno, f"runtime on {name!r}")
            if t <= 0:
                raise ParseError(lineno, f"runtime on {name!r} must be positive, got {cell.strip()!r}")
            values.append(t)
        processes.append(row[0].strip())
        columns.append(values)
    if not processes:
        raise ParseError(rows[-1][0], "no process rows")
    runtimes = [[columns[p][m] for p in range(len(processes))] for m in range(len(names))]
    return RuntimeMatrix(tuple(machines), tuple(processes), runtimes)


def write_runtime_matrix(matrix: RuntimeMatrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["machine"] + [m.cpu_model for m in matrix.machines])
    w.writerow(["score"] + [_num(m.score) for m in matrix.machines])
    for p, pid in enumerate(matrix.processes):
        w.writerow([pid] + [_num(float(t)) for t in matrix.runtimes[:, p]])
    return buf.getvalue()


# -- comparison table ------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ComparisonRow:
    instance_id: str
    t1: float
    a: float
    t_hat2: float | None = None
    b_hat: float | None = None


@dataclass(frozen=True)
class ComparisonTable:
    rows: tuple[ComparisonRow, ...]
    direction: str = "minimize"
    machine1: str | None = None
    machine2: str | None = None
    s1: float | None = None
    s2: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(self.rows))
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        ids = [r.instance_id for r in self.rows]
        if len(set(ids)) != len(ids):
            raise ValueError("instance ids must be unique")

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def has_b_hat(self) -> bool:
        return bool(self.rows) and all(r.b_hat is not None for r in self.rows)

    def pairs(self) -> list[PairedObservation]:
        missing = [r.instance_id for r in self.rows if r.b_hat is None]
        if missing:
            raise ValueError(f"no b_hat value for {', '.join(missing)}")
        return [PairedObservation(r.instance_id, r.a, r.b_hat) for r in self.rows]

    def with_estimates(self, t_hat2: Sequence[float]) -> ComparisonTable:
        rows = tuple(
            ComparisonRow(r.instance_id, r.t1, r.a, t, r.b_hat) for r, t in zip(self.rows, t_hat2)
        )
        return ComparisonTable(rows, self.direction, self.machine1, self.machine2, self.s1, self.s2)


_REQUIRED = ("instance", "t1", "a")
_OPTIONAL = ("t_hat2", "b_hat")
_META_KEYS = ("direction", "machine1", "machine2", "s1", "s2")


def parse_comparison(text: str) -> ComparisonTable:
    """Read ``instance,t1,a[,t_hat2][,b_hat]`` CSV.

    Leading ``# key = value`` comment lines may carry ``direction``,
    ``machine1``, ``machine2``, ``s1`` and ``s2``; other comments are ignored.
    Optional cells may be left empty.
    """
    meta: dict[str, str] = {}
    body: list[tuple[int, str]] = []
    for lineno, raw in enumerate(_lines(text), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if sep and key.strip() in _META_KEYS:
                meta[key.strip()] = value.strip()
            continue
        body.append((lineno, raw))
    if not body:
        raise ParseError(1, "no header row")
    header_line, header_text = body[0]
    header = [h.strip() for h in next(csv.reader([header_text]))]
    for col in _REQUIRED:
        if col not in header:
            raise ParseError(header_line, f"missing required column {col!r}")
    unknown = [h for h in header if h not in _REQUIRED + _OPTIONAL]
    if unknown or len(set(header)) != len(header):
        raise ParseError(header_line, f"unexpected or repeated columns: {unknown or header}")
    if len(body) == 1:
        raise ParseError(header_line, "table has a header but no rows")
    idx = {h: i for i, h in enumerate(header)}
    rows: list[ComparisonRow] = []
    seen: set[str] = set()
    for lineno, raw in body[1:]:
        cells = [c.strip() for c in next(csv.reader([raw]))]
        if len(cells) != len(header):
            raise ParseError(lineno, f"expected {len(header)} cells, got {len(cells)}")
        inst = cells[idx["instance"]]
        if not inst:
            raise ParseError(lineno, "empty instance id")
        if inst in seen:
            raise ParseError(lineno, f"duplicate instance {inst!r}")
        seen.add(inst)
        t1 = _float(cells[idx["t1"]], lineno, "t1")
        if t1 <= 0:
            raise ParseError(lineno, "t1 must be positive")
        a = _float(cells[idx["a"]], lineno, "a")
        opt: dict[str, float | None] = {}
        for col in _OPTIONAL:
            cell = cells[idx[col]] if col in idx else ""
            opt[col] = _float(cell, lineno, col) if cell else None
        if opt["t_hat2"] is not None and opt["t_hat2"] <= 0:
            raise ParseError(lineno, "t_hat2 must be positive")
        rows.append(ComparisonRow(inst, t1, a, opt["t_hat2"], opt["b_hat"]))
    direction = meta.get("direction", "minimize")
    if direction not in DIRECTIONS:
        raise ParseError(1, f"unknown direction {direction!r}")
    s1 = _float(meta["s1"], 1, "s1") if "s1" in meta else None
    s2 = _float(meta["s2"], 1, "s2") if "s2" in meta else None
    return ComparisonTable(
        tuple(rows), direction, meta.get("machine1"), meta.get("machine2"), s1, s2
    )


def write_comparison(table: ComparisonTable) -> str:
    lines = [f"# direction = {table.direction}"]
    for key in ("machine1", "machine2", "s1", "s2"):
        value = getattr(table, key)
        if value is not None:
            lines.append(f"# {key} = {_num(value) if isinstance(value, float) else value}")
    cols = list(_REQUIRED)
    if any(r.t_hat2 is not None for r in table.rows):
        cols.append("t_hat2")
    if any(r.b_hat is not None for r in table.rows):
        cols.append("b_hat")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in table.rows:
        row = [r.instance_id, _num(r.t1), _num(r.a)]
        if "t_hat2" in cols:
            row.append("" if r.t_hat2 is None else _num(r.t_hat2))
        if "b_hat" in cols:
            row.append("" if r.b_hat is None else _num(r.b_hat))
        w.writerow(row)
    return "\n".join(lines) + "\n" + buf.getvalue()


# -- report -------------------------------------------------------------------------


def _outcome(row: ComparisonRow, direction: str) -> str:
    if row.b_hat is None:
        return ""
    a, b = (row.a, row.b_hat) if direction == "minimize" else (-row.a, -row.b_hat)
    if a == b:
        return "tie"
    return "A" if a < b else "B"


def write_report(
    result: SignTestResult, table: ComparisonTable, warnings: Iterable[str] = ()
) -> str:
    """Plain-text report of one comparison.

    Echoes the table with the per-instance winner, then the test summary.
    Probabilities carry 9 fractional digits, runtimes 6.
    """
    out = [f"direction: {table.direction}"]
    for label, name, score in (("M1", table.machine1, table.s1), ("M2", table.machine2, table.s2)):
        if name is not None or score is not None:
            bits = [b for b in (name, None if score is None else f"score {_num(score)}") if b]
            out.append(f"{label}: {', '.join(bits)}")
    out.append("instance,t1,a,t_hat2,b_hat,better")
    for r in table.rows:
        t_hat = "" if r.t_hat2 is None else f"{r.t_hat2:.6f}"
        b_hat = "" if r.b_hat is None else _num(r.b_hat)
        out.append(f"{r.instance_id},{_num(r.t1)},{_num(r.a)},{t_hat},{b_hat},{_outcome(r, table.direction)}")
    out += [
        f"pairs: {result.n_total}",
        f"ties removed: {result.n_total - result.n}",
        f"n: {result.n}",
        f"k (A better): {result.k}",
        f"p_gamma: {result.p_gamma:.9f}",
        f"alpha: {result.alpha:.9f}",
        f"sign test p-value: {result.p_value:.9f}",
        f"corrected p-value: {result.corrected_p_value:.9f}",
    ]
    if result.decision == REJECT:
        out.append("decision: reject H0 (B performs statistically significantly better than A)")
    else:
        out.append("decision: fail to reject H0 (no evidence that B performs better than A)")
    out += [f"warning: {w}" for w in warnings]
    return "\n".join(out) + "\n"
