"""Readers and writers for fields, series and JSON reports.

Binary field layout (all little-endian)::

    offset  size  content
    0       4     magic b"DDHF"
    4       2     format version (uint16, currently 1)
    6       2     reserved (zero)
    8       4     n_times (uint32)
    12      4     n_cells (uint32)
    16      8     x_min (float64)
    24      8     x_max (float64)
    32      8*T   times
    ...     8*T*N values, row-major (time, cell)
"""

from __future__ import annotations

import csv
import json
import math
import struct
from pathlib import Path

import numpy as np

from .solver import Grid1D, SpaceTimeField

SCHEMA_VERSION = 1
MAGIC = b"DDHF"
_HEADER = struct.Struct("<4sHHIIdd")


def _clean(obj):
    """JSON-safe copy: inf -> "inf", nan -> null, numpy scalars -> Python."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, report: dict, kind: str) -> Path:
    path = Path(path)
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind}
    doc.update(_clean(report))
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_rows(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return v


def read_rows(path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def write_field_csv(path, fld: SpaceTimeField) -> Path:
    x = fld.x
    rows = ((t, xi, u) for t, row in zip(fld.times, fld.values) for xi, u in zip(x, row))
    return write_rows(path, ["t", "x", "u"], rows)


def read_field_csv(path) -> SpaceTimeField:
    header, rows = read_rows(path)
    if header != ["t", "x", "u"]:
        raise ValueError(f"unexpected field header {header}")
    data = np.array(rows, dtype=float)
    times = np.unique(data[:, 0])
    n = data.shape[0] // times.size
    x = data[:n, 1]
    dx = (x[-1] - x[0]) / (n - 1)
    grid = Grid1D(x[0] - dx / 2, x[-1] + dx / 2, n)
    return SpaceTimeField(grid, times, data[:, 2].reshape(times.size, n))


def write_field_bin(path, fld: SpaceTimeField) -> Path:
    path = Path(path)
    g = fld.grid
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(MAGIC, 1, 0, fld.times.size, g.n_cells, g.x_min, g.x_max))
        fh.write(fld.times.astype("<f8").tobytes())
        fh.write(np.ascontiguousarray(fld.values, dtype="<f8").tobytes())
    return path


def read_field_bin(path) -> SpaceTimeField:
    raw = Path(path).read_bytes()
    magic, version, _, nt, nc, x_min, x_max = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ValueError("not a field file (bad magic)")
    if version != 1:
        raise ValueError(f"unsupported field format version {version}")
    off = _HEADER.size
    times = np.frombuffer(raw, dtype="<f8", count=nt, offset=off)
    values = np.frombuffer(raw, dtype="<f8", count=nt * nc, offset=off + 8 * nt)
    return SpaceTimeField(Grid1D(x_min, x_max, nc), times.copy(), values.reshape(nt, nc).copy())


def read_field(path) -> SpaceTimeField:
    path = Path(path)
    with path.open("rb") as fh:
        head = fh.read(4)
    return read_field_bin(path) if head == MAGIC else read_field_csv(path)


def write_series_csv(path, series) -> Path:
    return write_rows(path, ["k", "rho_k", "osc_k"], series.to_rows())
