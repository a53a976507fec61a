"""JSON interchange helpers.

Complex scalars are two-element arrays ``[re, im]``; matrices are row-major
arrays of rows.  This is the wire format for every CLI command and service
endpoint.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError

__all__ = ["encode_matrix", "decode_matrix", "encode_point", "decode_points"]


def encode_matrix(m: np.ndarray) -> list:
    a = np.atleast_2d(np.asarray(m, dtype=complex))
    return [[[float(x.real), float(x.imag)] for x in row] for row in a]


def decode_matrix(data, shape: tuple[int, int] | None = None) -> np.ndarray:
    try:
        rows = len(data)
        cols = len(data[0]) if rows else (shape[1] if shape else 0)
        out = np.zeros((rows, cols), dtype=complex)
        for i, row in enumerate(data):
            if len(row) != cols:
                raise InputError("ragged matrix rows")
            for j, cell in enumerate(row):
                re, im = float(cell[0]), float(cell[1])
                out[i, j] = re + 1j * im
    except (TypeError, IndexError, ValueError) as exc:
        raise InputError(f"bad matrix payload: {exc}") from exc
    if shape is not None:
        want = tuple(shape)
        if want[0] == 0 or want[1] == 0:
            return np.zeros(want, dtype=complex)
        if out.shape != want:
            raise InputError(f"matrix shape {out.shape} does not match {want}")
    return out


def encode_point(z: np.ndarray) -> list:
    return [[float(c.real), float(c.imag)] for c in np.asarray(z, dtype=complex).reshape(-1)]


def decode_points(data, d: int) -> list[np.ndarray]:
    """Points JSON: a list of points, each a list of d [re, im] pairs."""
    try:
        pts = []
        for entry in data:
            if len(entry) != d:
                raise InputError(f"point has {len(entry)} coordinates, expected {d}")
            pts.append(np.array([complex(c[0], c[1]) for c in entry]))
        return pts
    except (TypeError, IndexError, ValueError) as exc:
        raise InputError(f"bad points payload: {exc}") from exc
