"""Strict NPY v1.0 reader/writer for 2-D float64 arrays.

Only the profile this package emits is accepted on read: magic ``\\x93NUMPY``,
format version 1.0, dtype ``<f8``, C order, 2-D non-empty shape, exact
payload length. Anything else raises ``FormatError`` with the byte offset of
the problem (``ShapeError`` for empty shapes). Files written here are
readable by any standard NPY loader and vice versa.
"""

from __future__ import annotations

import ast
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError, ParameterError, ShapeError
from .linalg import Matrix, as_matrix

_MAGIC = b"\x93NUMPY"
_VERSION = b"\x01\x00"
_DESCR = "<f8"
_HEADER_ALIGN = 64


def save_array(path, array: Matrix) -> None:
    """Write a validated 2-D float64 array; nothing is written on failure."""
    a = np.ascontiguousarray(as_matrix(array, "array"), dtype="<f8")
    header = (
        f"{{'descr': '{_DESCR}', 'fortran_order': False, "
        f"'shape': ({a.shape[0]}, {a.shape[1]}), }}"
    )
    prefix_len = len(_MAGIC) + len(_VERSION) + 2
    total = prefix_len + len(header) + 1
    header = header + " " * (-total % _HEADER_ALIGN) + "\n"
    blob = _MAGIC + _VERSION + struct.pack("<H", len(header)) + header.encode("latin-1")
    Path(path).write_bytes(blob + a.tobytes(order="C"))


def load_array(path) -> Matrix:
    """Read a file written by ``save_array`` (or an equivalent strict NPY)."""
    data = Path(path).read_bytes()
    if len(data) < 6 or data[:6] != _MAGIC:
        raise FormatError("bad magic; not an NPY file", offset=0)
    if len(data) < 8:
        raise FormatError("file ends inside the version field", offset=len(data))
    if data[6:8] != _VERSION:
        raise FormatError(
            f"unsupported NPY version {data[6]}.{data[7]}; only 1.0 is accepted",
            offset=6,
        )
    if len(data) < 10:
        raise FormatError("file ends inside the header length field", offset=len(data))
    (header_len,) = struct.unpack("<H", data[8:10])
    body_start = 10 + header_len
    if len(data) < body_start:
        raise FormatError("file ends inside the header", offset=len(data))

    try:
        header = ast.literal_eval(data[10:body_start].decode("latin-1").strip())
    except (ValueError, SyntaxError):
        raise FormatError("malformed header dictionary", offset=10) from None
    if not isinstance(header, dict) or set(header) != {"descr", "fortran_order", "shape"}:
        raise FormatError("header must define descr, fortran_order and shape", offset=10)
    if header["descr"] != _DESCR:
        raise FormatError(
            f"dtype mismatch: expected '{_DESCR}', got {header['descr']!r}", offset=10
        )
    if header["fortran_order"] is not False:
        raise FormatError("Fortran-ordered arrays are not accepted", offset=10)
    shape = header["shape"]
    if (
        not isinstance(shape, tuple)
        or len(shape) != 2
        or not all(isinstance(d, int) for d in shape)
    ):
        raise FormatError(f"shape must be a 2-tuple of ints, got {shape!r}", offset=10)
    rows, cols = shape
    if rows < 1 or cols < 1:
        raise ShapeError(f"arrays must be non-empty, got shape {shape}")

    need = rows * cols * 8
    have = len(data) - body_start
    if have < need:
        raise FormatError(
            f"truncated data: expected {need} payload bytes, found {have}",
            offset=body_start + have,
        )
    if have > need:
        raise FormatError(
            f"{have - need} trailing bytes after the payload", offset=body_start + need
        )
    out = np.frombuffer(data, dtype="<f8", count=rows * cols, offset=body_start)
    out = out.reshape(rows, cols).copy()
    if not np.all(np.isfinite(out)):
        raise ParameterError(f"{path}: array contains non-finite entries")
    return out
