"""Tabular datasets and their CSV / JSON encodings.

Cells are floats, ints, bools or strings. Floats are written with 17
significant digits and always carry a decimal point or exponent, so a
parsed file reproduces the original cell types and values exactly.
"""
import csv
import io
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

INFEASIBLE = "infeasible"
_INT = re.compile(r"^[+-]?\d+$")


@dataclass(frozen=True)
class Dataset:
    name: str
    columns: tuple
    rows: tuple

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ValueError(f"{self.name}: row {i} has {len(row)} cells, expected {len(self.columns)}")

    def column(self, name):
        j = self.columns.index(name)
        return [row[j] for row in self.rows]


def format_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        s = format(v, ".17g")
        return s if any(ch in s for ch in ".e") else s + ".0"
    if isinstance(v, str):
        if any(ord(ch) < 32 and ch != "\t" for ch in v):
            raise ValueError(f"text cell {v!r} contains control characters")
        return v
    # numpy scalars
    if hasattr(v, "item"):
        return format_cell(v.item())
    raise TypeError(f"unsupported cell type {type(v).__name__}")


def parse_cell(s: str):
    if s == "true":
        return True
    if s == "false":
        return False
    if _INT.match(s):
        return int(s)
    try:
        return float(s)
    except ValueError:
        return s


def to_csv(ds: Dataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ds.columns)
    for row in ds.rows:
        w.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def from_csv(text: str, name: str = "") -> Dataset:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ValueError("empty CSV")
    return Dataset(name, rows[0], [[parse_cell(c) for c in r] for r in rows[1:]])


def _json_cell(v):
    if hasattr(v, "item") and not isinstance(v, (bool, int, float, str)):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return format_cell(v)
    return v


def to_json(ds: Dataset) -> str:
    obj = {"name": ds.name, "columns": list(ds.columns),
           "rows": [[_json_cell(v) for v in row] for row in ds.rows]}
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def from_json(text: str) -> Dataset:
    obj = json.loads(text)
    conv = lambda v: float(v) if v in ("inf", "-inf", "nan") else v
    return Dataset(obj["name"], obj["columns"], [[conv(v) for v in r] for r in obj["rows"]])


def write_dataset(ds: Dataset, out_dir, fmt: str = "csv") -> Path:
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    path = Path(out_dir) / f"{ds.name}.{fmt}"
    text = to_csv(ds) if fmt == "csv" else to_json(ds)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def read_dataset(path) -> Dataset:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        return from_json(text)
    return from_csv(text, path.stem)
