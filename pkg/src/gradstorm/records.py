"""CSV / JSON writers for experiment artifacts.

Floats are written with 17 significant digits so every value round-trips.
Each file carries the resolved configuration and the package version; no
timestamps or host details are written, so identical inputs give identical
bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math

from . import __version__


def fmt(value):
    """One CSV cell."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    return str(value)


def header_lines(config: dict):
    lines = [f"# gradstorm {__version__}"]
    for key in sorted(config):
        lines.append(f"# {key} = {fmt(config[key])}")
    return lines


def csv_text(fields, rows, config: dict | None = None):
    buf = io.StringIO()
    for line in header_lines(config or {}):
        buf.write(line + "\r\n")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def read_csv(text):
    """Parse text written by :func:`csv_text` into (header comments, field names, rows)."""
    lines = text.splitlines()
    comments = [ln for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if not ln.startswith("#")]
    reader = csv.reader(body)
    fields = next(reader)
    return comments, fields, [r for r in reader]


def _clean(obj):
    """JSON-safe copy: tuples to lists, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return fmt(obj)
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalars
        return _clean(obj.item())
    return obj


def json_text(payload: dict, config: dict | None = None):
    doc = {"tool": "gradstorm", "version": __version__}
    if config is not None:
        doc["config"] = _clean(config)
    doc.update(_clean(payload))
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
