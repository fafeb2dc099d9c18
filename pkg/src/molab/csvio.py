"""CSV output with a declared schema and 17 significant digits for reals."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

TRACE_SCHEMA = ("n", "m_n", "dist_n", "vol_shell")
NORM_TABLE_SCHEMA = ("lambda", "modular")


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return "%.17g" % value
    if value is None:
        return ""
    return str(value)


def render_csv(rows: Iterable[Mapping], schema: Sequence[str]) -> str:
    """RFC-4180 text (CRLF line ends, minimal quoting) with a header row."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(schema)
    for row in rows:
        missing = [k for k in schema if k not in row]
        if missing:
            raise ValueError(f"row is missing columns {missing}")
        writer.writerow([format_cell(row[k]) for k in schema])
    return buf.getvalue()


def emit_csv(rows: Iterable[Mapping], schema: Sequence[str], path: str | Path) -> Path:
    """Write rows to ``path``; I/O errors propagate as OSError."""
    if not schema:
        raise ValueError("schema must name at least one column")
    text = render_csv(rows, schema)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
