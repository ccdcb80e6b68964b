"""CSV/JSON readers and writers.

Floats are written with ``repr``, the shortest string that parses back to
the same double.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import ValidationError


class MalformedInputError(ValidationError):
    def __init__(self, path, line, detail):
        self.line = line
        super().__init__(f"{path}: row {line}: {detail}")


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def rows_to_csv(rows: list[dict], columns: list[str] | None = None) -> str:
    columns = columns or (list(rows[0]) if rows else [])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c, "")) for c in columns])
    return buf.getvalue()


def record_to_text(record: dict, fmt: str) -> str:
    if fmt == "csv":
        return rows_to_csv([record])
    if fmt == "json":
        return json.dumps({k: _jsonable(v) for k, v in record.items()}, indent=2) + "\n"
    raise ValidationError(f"unknown format {fmt!r}")


def text_to_record(text: str, fmt: str) -> dict:
    if fmt == "csv":
        rows = list(csv.DictReader(io.StringIO(text)))
        if len(rows) != 1:
            raise ValidationError(f"expected one data row, got {len(rows)}")
        return rows[0]
    return json.loads(text)


def write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def read_income_file(path) -> np.ndarray:
    """Read a single-column CSV with header ``income``; rows keep file order.

    Row numbers in error messages count the header as row 1.
    """
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as err:
        raise ValidationError(f"cannot read {path}: {err.strerror}") from err
    values = []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["income"]:
            raise MalformedInputError(path, 1, f"expected header 'income', got {header!r}")
        for line, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 1:
                raise MalformedInputError(path, line, f"expected one column, got {len(row)}")
            try:
                x = float(row[0])
            except ValueError:
                raise MalformedInputError(path, line, f"not a number: {row[0]!r}") from None
            if not (math.isfinite(x) and x > 0):
                raise MalformedInputError(path, line, f"income must be finite and > 0, got {row[0]!r}")
            values.append(x)
    return np.asarray(values, dtype=np.float64)


def write_income_file(path, values) -> None:
    write_text(path, "income\n" + "".join(f"{float(v)!r}\n" for v in values))
