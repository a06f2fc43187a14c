"""Curve tables: CSV with '#' metadata lines, plus a JSON mirror.

Floats are written with ``repr`` so identical inputs give identical bytes.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

CURVE_COLUMNS = ("beta", "method", "metric", "threshold_db", "value", "stderr")
COMPARE_COLUMNS = (
    "beta", "metric", "threshold_db", "analytic_method", "analytic", "empirical",
    "stderr", "deviation", "tolerance", "within_tolerance",
)
METHODS = ("analytic-gamma", "analytic-laplace", "analytic-series", "mc-hybrid", "mc-ppp")


@dataclass
class Table:
    columns: tuple
    metadata: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)

    def add(self, **row):
        unknown = set(row) - set(self.columns)
        if unknown:
            raise KeyError(f"unknown columns {sorted(unknown)}")
        self.rows.append({c: row.get(c) for c in self.columns})

    def select(self, **match):
        return [r for r in self.rows if all(r[k] == v for k, v in match.items())]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(v):
    if v == "":
        return None
    if v in ("true", "false"):
        return v == "true"
    try:
        return float(v)
    except ValueError:
        return v


def to_csv(table):
    buf = io.StringIO()
    for key, value in table.metadata.items():
        buf.write(f"# {key}: {_fmt(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_fmt(row[c]) for c in table.columns])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def to_json(table):
    doc = {
        "metadata": {k: _json_value(v) for k, v in table.metadata.items()},
        "columns": list(table.columns),
        "rows": [{k: _json_value(v) for k, v in row.items()} for row in table.rows],
    }
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def write(table, path):
    """Write ``path`` (CSV) and its ``.json`` mirror; returns both paths."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_csv(table), encoding="utf-8")
    mirror = path.with_suffix(".json")
    mirror.write_text(to_json(table), encoding="utf-8")
    return path, mirror


def read_csv(text):
    """Inverse of :func:`to_csv`."""
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            meta[key] = _parse(value)
        else:
            body.append(line)
    reader = csv.reader(body)
    columns = tuple(next(reader))
    rows = [{c: _parse(v) for c, v in zip(columns, rec)} for rec in reader]
    if "metric" in columns:
        for r in rows:
            if isinstance(r["metric"], float):
                r["metric"] = str(r["metric"])
    return Table(columns, meta, rows)


def validate_json(text):
    from .scenario import load_schema

    doc = json.loads(text)
    jsonschema.validate(doc, load_schema("table"))
    return doc
