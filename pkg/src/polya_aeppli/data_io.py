"""
Reading and writing count data, plus the two embedded bivariate datasets.

Two text formats are understood, both UTF-8 CSV with LF or CRLF endings:

* **records**: one observation per line, ``k`` non-negative integer
  columns, optional header line;
* **table** (bivariate only): a header ``n1\\n2,0,1,...`` naming the ``n2``
  values, then one line per ``n1`` value holding the frequencies.

Written files always use LF line endings; non-integer frequencies are
written with 17 significant digits.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DataError, InconsistentDimension, MalformedCell, MalformedLine
from .samples import ContingencyTable, CountSample

__all__ = [
    "DataFormat",
    "DatasetDescriptor",
    "EMBEDDED",
    "parse_records",
    "parse_table",
    "emit_records",
    "emit_table",
    "sniff_format",
    "load_data",
    "embedded_dataset",
]

TABLE_CORNER = "n1\\n2"


class DataFormat(str, enum.Enum):
    RECORDS = "records"
    TABLE = "table"


@dataclass(frozen=True)
class DatasetDescriptor:
    name: str
    k: int
    format: DataFormat
    source: str  # "embedded" or a file path
    sha256: str | None = None
    description: str = ""


EMBEDDED: dict[str, DatasetDescriptor] = {
    "australian_health": DatasetDescriptor(
        "australian_health", 2, DataFormat.TABLE, "embedded",
        "7caac0738c5f859e125ecc0ca83fbd447b956878dd36cb5e68c3833f9954458a",
        "Australian health survey 1977-78: doctor/specialist consultations (n1) "
        "by prescribed medications used in the past two days (n2), m = 5190",
    ),
    "spanish_auto": DatasetDescriptor(
        "spanish_auto", 2, DataFormat.TABLE, "embedded",
        "79e44a8cb188b52d61cc7deffa4a447c232850b316e5f85ec19b42b4fcaf7608",
        "Spanish automobile insurance portfolio 1995: third-party liability "
        "claims (n1) by other claims (n2), m = 80994",
    ),
}


def _lines(text: str) -> list[str]:
    if text.startswith("﻿"):
        text = text[1:]
    return text.replace("\r\n", "\n").replace("\r", "\n").split("\n")


def _count(token: str) -> int | None:
    """Parse a non-negative integer token; ``None`` if it is not one."""
    t = token.strip()
    if not t:
        return None
    try:
        v = int(t)
    except ValueError:
        try:
            f = float(t)
        except ValueError:
            return None
        if not (f.is_integer() and f >= 0):
            return None
        v = int(f)
    return v if v >= 0 else None


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def parse_records(text: str) -> CountSample:
    """Parse one-observation-per-line CSV.

    A first line containing a non-numeric token is taken as a header.

    Raises
    ------
    MalformedLine
        A token is not a non-negative integer (1-based physical line number).
    InconsistentDimension
        A line has a different number of columns from the first data line.
    """
    rows: list[list[int]] = []
    k = None
    first = True
    for line_no, raw in enumerate(_lines(text), start=1):
        if not raw.strip():
            continue
        tokens = [t.strip() for t in raw.split(",")]
        if first:
            first = False
            if not all(_is_number(t) for t in tokens):
                continue  # header
        if k is None:
            k = len(tokens)
        elif len(tokens) != k:
            raise InconsistentDimension(line_no, k, len(tokens))
        vals = [_count(t) for t in tokens]
        if any(v is None for v in vals):
            bad = next(t for t, v in zip(tokens, vals) if v is None)
            raise MalformedLine(line_no, f"{bad!r} is not a non-negative integer")
        rows.append(vals)  # type: ignore[arg-type]
    if not rows:
        return CountSample(np.empty((0, k or 2), dtype=np.int64))
    return CountSample(np.array(rows, dtype=np.int64))


def parse_table(text: str) -> ContingencyTable:
    """Parse a bivariate frequency table (rows ``n1``, columns ``n2``).

    The corner label of the header is free text. Row labels must be
    distinct non-negative integers.

    Raises
    ------
    MalformedCell
        A label or frequency is not a non-negative integer, or a row has the
        wrong length (reported at the first missing or extra column).
    """
    lines = [(i, l) for i, l in enumerate(_lines(text), start=1) if l.strip()]
    if not lines:
        return ContingencyTable(np.empty((0, 2), np.int64), np.empty(0))
    _, header = lines[0]
    head = [t.strip() for t in header.split(",")]
    cols = []
    for j, t in enumerate(head[1:]):
        v = _count(t)
        if v is None:
            raise MalformedCell(-1, j, f"column label {t!r} is not a non-negative integer")
        cols.append(v)
    if len(set(cols)) != len(cols):
        raise MalformedCell(-1, 0, "duplicate column labels")
    cells, freq, seen = [], [], set()
    for _, raw in lines[1:]:
        tokens = [t.strip() for t in raw.split(",")]
        r = _count(tokens[0])
        if r is None:
            raise MalformedCell(-1, -1, f"row label {tokens[0]!r} is not a non-negative integer")
        if r in seen:
            raise MalformedCell(r, -1, "duplicate row label")
        seen.add(r)
        if len(tokens) - 1 != len(cols):
            raise MalformedCell(r, min(len(tokens) - 1, len(cols)), "row length does not match header")
        for c, t in zip(cols, tokens[1:]):
            v = _count(t)
            if v is None:
                raise MalformedCell(r, c, f"{t!r} is not a non-negative integer frequency")
            cells.append((r, c))
            freq.append(v)
    if not cells:
        return ContingencyTable(np.empty((0, 2), np.int64), np.empty(0))
    return ContingencyTable(np.array(cells, dtype=np.int64), np.array(freq, dtype=float))


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else format(float(v), ".17g")


def emit_records(sample: CountSample, header: bool = True) -> str:
    """Records CSV with an ``n1,n2,...`` header line."""
    out = []
    if header:
        out.append(",".join(f"n{i + 1}" for i in range(sample.k)))
    out.extend(",".join(str(int(v)) for v in row) for row in sample.observations)
    return "\n".join(out) + "\n"


def emit_table(table: ContingencyTable) -> str:
    """Dense bivariate table CSV covering ``0..max n1`` by ``0..max n2``."""
    if table.k != 2:
        raise ValueError("table format is bivariate; use records for k >= 3")
    if table.cells.shape[0] == 0:
        return ""
    dense = table.to_dense()
    out = [TABLE_CORNER + "," + ",".join(str(j) for j in range(dense.shape[1]))]
    for i, row in enumerate(dense):
        out.append(str(i) + "," + ",".join(_fmt(v) for v in row))
    return "\n".join(out) + "\n"


def sniff_format(text: str) -> DataFormat:
    """Guess the format: a non-numeric corner followed by integer labels means table."""
    for raw in _lines(text):
        if raw.strip():
            tokens = [t.strip() for t in raw.split(",")]
            if not _is_number(tokens[0]) and len(tokens) > 1 and all(_count(t) is not None for t in tokens[1:]):
                return DataFormat.TABLE
            return DataFormat.RECORDS
    return DataFormat.RECORDS


def load_data(path: str | Path, fmt: DataFormat | str | None = None) -> CountSample | ContingencyTable:
    """Read a data file; ``fmt=None`` sniffs the format.

    Raises
    ------
    DataError
        If the file cannot be read (the message names the path) or is
        malformed.
    """
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {str(p)!r}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise DataError(f"{str(p)!r} is not UTF-8 text") from None
    fmt = sniff_format(text) if fmt is None else DataFormat(fmt)
    return parse_table(text) if fmt is DataFormat.TABLE else parse_records(text)


def embedded_dataset(name: str) -> ContingencyTable:
    """One of the embedded observed frequency tables, checksum-verified."""
    try:
        desc = EMBEDDED[name]
    except KeyError:
        raise KeyError(f"unknown dataset {name!r}; choose from {sorted(EMBEDDED)}") from None
    raw = resources.files("polya_aeppli.data").joinpath(f"{name}.csv").read_bytes()
    digest = hashlib.sha256(raw).hexdigest()
    if digest != desc.sha256:
        raise DataError(f"embedded dataset {name!r} failed its checksum")
    return parse_table(raw.decode("utf-8"))
