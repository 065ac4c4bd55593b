"""CSV / JSON emission with a metadata block.

CSV files start with one ``# {json}`` comment line holding the metadata,
then a header row.  Floats are written with 17 significant digits so that
parsing and re-emitting a file reproduces it byte for byte.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, TextIO

import numpy as np

META_PREFIX = "# "


def _scalar(v: Any) -> Any:
    if isinstance(v, np.generic):
        return v.item()
    return v


def format_value(v: Any) -> str:
    v = _scalar(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.17g}"
    if v is None:
        return ""
    return str(v)


def parse_value(s: str) -> Any:
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def _jsonable(obj: Any) -> Any:
    obj = _scalar(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, Path):
        return str(obj)
    return obj


def render_csv(records: Iterable[dict], columns: list[str] | None = None,
               metadata: dict | None = None) -> str:
    """CSV text for homogeneous records.

    ``columns`` fixes the header; it is required to write a header for an
    empty batch.
    """
    records = list(records)
    if columns is None:
        columns = list(records[0].keys()) if records else []
    for i, rec in enumerate(records):
        if list(rec.keys()) != list(columns):
            raise ValueError(f"record {i} has keys {list(rec.keys())}, expected {columns}")
    buf = io.StringIO()
    if metadata is not None:
        buf.write(META_PREFIX + json.dumps(_jsonable(metadata), sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([format_value(rec[c]) for c in columns])
    return buf.getvalue()


def read_csv_text(text: str) -> tuple[list[dict], list[str], dict | None]:
    """Inverse of :func:`render_csv`: ``(records, columns, metadata)``."""
    lines = text.splitlines(keepends=True)
    meta = None
    if lines and lines[0].startswith(META_PREFIX):
        meta = json.loads(lines[0][len(META_PREFIX):])
        lines = lines[1:]
    rows = list(csv.reader(lines))
    if not rows:
        return [], [], meta
    columns = rows[0]
    records = [dict(zip(columns, (parse_value(x) for x in row))) for row in rows[1:]]
    return records, columns, meta


def render_json(payload: dict, metadata: dict | None = None) -> str:
    doc = dict(payload)
    if metadata is not None:
        doc["metadata"] = metadata
    return json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n"


def _write(text: str, out: str | Path | TextIO | None) -> None:
    if out is None or out == "-":
        import sys
        sys.stdout.write(text)
    elif hasattr(out, "write"):
        out.write(text)
    else:
        path = Path(out)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def emit_csv(records, out=None, columns=None, metadata=None) -> str:
    text = render_csv(records, columns=columns, metadata=metadata)
    _write(text, out)
    return text


def emit_json(payload: dict, out=None, metadata=None) -> str:
    text = render_json(payload, metadata=metadata)
    _write(text, out)
    return text


def read_csv(path) -> tuple[list[dict], list[str], dict | None]:
    with open(path, encoding="utf-8", newline="") as fh:
        return read_csv_text(fh.read())


def read_radii(path) -> np.ndarray:
    """Radii from a plain CSV: the ``r`` column if present, otherwise the first column."""
    records, columns, _ = read_csv(path)
    if not columns:
        raise ValueError(f"{path}: empty file")
    col = "r" if "r" in columns else columns[0]
    return np.array([float(rec[col]) for rec in records])
