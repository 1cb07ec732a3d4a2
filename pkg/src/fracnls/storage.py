"""On-disk formats: field container, CSV series and atomically written JSON records.

Field container layout (all little-endian)::

    magic   8 bytes   b"FNLSFLD1"
    dim     uint32
    n       uint32
    L       float64
    data    n**dim complex values, interleaved (re, im) float64, C order
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import struct
import tempfile
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .exceptions import FracNLSError
from .field import Field, GridSpec, radial_profile

PathLike = Union[str, os.PathLike]

MAGIC = b"FNLSFLD1"
_HEADER = struct.Struct("<8sIId")


def atomic_write_bytes(path: PathLike, data: bytes) -> None:
    """Write ``data`` to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: PathLike, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _finite(obj):
    # JSON has no inf/nan; encode them as strings so records stay parseable
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {str(k): _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def write_json(path: PathLike, record: dict) -> None:
    text = json.dumps(_finite(record), indent=2, sort_keys=True, default=_json_default)
    atomic_write_text(path, text + "\n")


def read_json(path: PathLike) -> dict:
    with open(path) as fh:
        return json.load(fh)


# --------------------------------------------------------------------------
# fields
# --------------------------------------------------------------------------

def field_to_bytes(u: Field) -> bytes:
    g = u.grid
    head = _HEADER.pack(MAGIC, g.dim, g.n, g.L)
    data = np.ascontiguousarray(u.values, dtype="<c16").tobytes()
    return head + data


def field_from_bytes(buf: bytes) -> Field:
    if len(buf) < _HEADER.size:
        raise FracNLSError("truncated field container")
    magic, dim, n, L = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise FracNLSError("not a field container (bad magic)")
    grid = GridSpec(dim, n, L)
    count = n ** dim
    body = buf[_HEADER.size:]
    if len(body) != 16 * count:
        raise FracNLSError(f"field container holds {len(body)} data bytes, expected {16 * count}")
    vals = np.frombuffer(body, dtype="<c16").reshape(grid.shape)
    return Field(grid, vals.astype(np.complex128))


def write_field(path: PathLike, u: Field) -> None:
    atomic_write_bytes(path, field_to_bytes(u))


def read_field(path: PathLike) -> Field:
    return field_from_bytes(Path(path).read_bytes())


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    atomic_write_text(path, _csv_text(header, rows))


def write_radial_csv(path: PathLike, u: Field) -> None:
    """Profile along the positive first axis: columns ``r, re, im``."""
    r, v = radial_profile(u)
    write_csv(path, ("r", "re", "im"), zip(r, v.real, v.imag))


def read_csv(path: PathLike) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
