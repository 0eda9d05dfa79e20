"""Grid-spec parsing, CSV/JSON serialization and run manifests."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import re
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .convolution import Axis, Grid2D

__all__ = [
    "parse_axis",
    "parse_grid_spec",
    "parse_complex",
    "checksum",
    "RunManifest",
    "grid_to_csv",
    "grid_from_csv",
    "points_to_csv",
    "points_from_csv",
    "grid_to_json",
    "grid_from_json",
    "table_to_csv",
    "table_to_json",
]

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_AXIS_RE = re.compile(rf"^\s*({_NUM}):({_NUM}):(\d+)\s*$")


def parse_axis(text: str) -> Axis:
    m = _AXIS_RE.match(text)
    if not m:
        raise ValueError(f"malformed axis {text!r}; expected min:max:count")
    lo, hi, count = float(m.group(1)), float(m.group(2)), int(m.group(3))
    if not lo < hi:
        raise ValueError(f"inverted bounds in axis {text!r}")
    if count < 2:
        raise ValueError(f"axis {text!r} needs at least 2 points")
    return Axis(lo, hi, count)


def parse_grid_spec(text: str) -> tuple:
    """``"min:max:count,min:max:count"`` -> ``(re_axis, im_axis)``."""
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"malformed grid spec {text!r}; expected two comma-separated axes")
    return parse_axis(parts[0]), parse_axis(parts[1])


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ValueError(f"cannot parse complex number {text!r}") from None


def _fmt(x: float) -> str:
    return repr(float(x))


def checksum(values) -> str:
    """SHA-256 of the little-endian float64/complex128 bytes of ``values``."""
    a = np.asarray(values)
    a = np.ascontiguousarray(a, dtype="<c16" if np.iscomplexobj(a) else "<f8")
    return hashlib.sha256(a.tobytes()).hexdigest()


@dataclass
class RunManifest:
    subcommand: str
    params: dict
    grid: dict | None = None
    seed: int | None = None
    checksum: str = ""
    version: str = __version__
    duration_s: float = 0.0
    results: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def grid_to_csv(grid: Grid2D) -> str:
    """Rows ``re_alpha,im_alpha,value[,value_im]``, imaginary axis outermost."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cplx = grid.is_complex
    w.writerow(["re_alpha", "im_alpha", "value"] + (["value_im"] if cplx else []))
    xs, ys = grid.re_axis.points, grid.im_axis.points
    for i, y in enumerate(ys):
        row = grid.values[i]
        for j, x in enumerate(xs):
            v = row[j]
            if cplx:
                w.writerow([_fmt(x), _fmt(y), _fmt(v.real), _fmt(v.imag)])
            else:
                w.writerow([_fmt(x), _fmt(y), _fmt(v)])
    return buf.getvalue()


def points_to_csv(alpha, values) -> str:
    """Same layout as :func:`grid_to_csv` for an arbitrary list of points."""
    alpha = np.asarray(alpha, dtype=complex).ravel()
    values = np.asarray(values).ravel()
    cplx = np.iscomplexobj(values)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re_alpha", "im_alpha", "value"] + (["value_im"] if cplx else []))
    for a, v in zip(alpha, values):
        row = [_fmt(a.real), _fmt(a.imag)]
        row += [_fmt(v.real), _fmt(v.imag)] if cplx else [_fmt(v)]
        w.writerow(row)
    return buf.getvalue()


def points_from_csv(text: str):
    """Inverse of :func:`points_to_csv`: ``(alpha, values)``."""
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    if header[:3] != ["re_alpha", "im_alpha", "value"]:
        raise ValueError(f"unexpected CSV header {header}")
    data = np.array([[float(c) for c in r] for r in body]).reshape(-1, len(header))
    alpha = data[:, 0] + 1j * data[:, 1]
    values = data[:, 2] + 1j * data[:, 3] if len(header) == 4 else data[:, 2]
    return alpha, values


def grid_from_csv(text: str) -> Grid2D:
    alpha, values = points_from_csv(text)
    xs = np.unique(alpha.real)
    ys = np.unique(alpha.imag)
    if xs.size * ys.size != values.size:
        raise ValueError("CSV rows do not form a full rectangular grid")
    return Grid2D.from_samples(xs, ys, values.reshape(ys.size, xs.size))


def grid_to_json(grid: Grid2D, manifest: RunManifest | None = None) -> str:
    doc = {
        "manifest": manifest.to_dict() if manifest else None,
        "re_axis": list(grid.re_axis.as_tuple()),
        "im_axis": list(grid.im_axis.as_tuple()),
        "order": "im-major",
        "values": [float(v) for v in np.real(grid.values).ravel()],
    }
    if grid.is_complex:
        doc["values_im"] = [float(v) for v in np.imag(grid.values).ravel()]
    return json.dumps(doc, indent=1) + "\n"


def grid_from_json(text: str) -> Grid2D:
    doc = json.loads(text)
    re_axis = Axis(*doc["re_axis"])
    im_axis = Axis(*doc["im_axis"])
    v = np.array(doc["values"], dtype=float)
    if "values_im" in doc:
        v = v + 1j * np.array(doc["values_im"], dtype=float)
    return Grid2D(re_axis, im_axis, v.reshape(im_axis.count, re_axis.count))


def table_to_csv(table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a", "b", "value"])
    for rec in table.as_records():
        w.writerow([rec["a"], rec["b"], _fmt(rec["value"])])
    return buf.getvalue()


def table_to_json(table, manifest: RunManifest | None = None) -> str:
    from .entanglement import LABELS

    doc = {
        "manifest": manifest.to_dict() if manifest else None,
        "labels": list(LABELS),
        "values": [[float(v) for v in row] for row in table.values],
        "residual": float(table.residual),
        "method": table.method,
    }
    return json.dumps(doc, indent=1) + "\n"
