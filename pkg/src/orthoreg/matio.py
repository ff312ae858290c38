"""Matrix file formats.

MATF v1: 8 magic bytes ``ORTHMAT1``, then rows and cols as little-endian
uint32, then rows*cols little-endian float64 values in row-major order.

CSV: one matrix row per line, comma-separated decimal reals, no header.
Values are written with repr so a round trip is bit-exact.
"""

import struct

import numpy as np

from .errors import MatrixFileError
from .linalg import as_matrix

MATF_MAGIC = b"ORTHMAT1"
_HEADER = struct.Struct("<II")


def save_matf(path, w):
    w = as_matrix(w)
    rows, cols = w.shape
    with open(path, "wb") as fh:
        fh.write(MATF_MAGIC)
        fh.write(_HEADER.pack(rows, cols))
        fh.write(w.astype("<f8", copy=False).tobytes(order="C"))


def load_matf(path):
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise MatrixFileError(f"cannot read {path}: {exc}") from exc
    if blob[:8] != MATF_MAGIC:
        raise MatrixFileError(f"{path}: bad magic, not a MATF v1 file")
    if len(blob) < 16:
        raise MatrixFileError(f"{path}: truncated header")
    rows, cols = _HEADER.unpack(blob[8:16])
    if rows < 1 or cols < 1:
        raise MatrixFileError(f"{path}: invalid dimensions {rows}x{cols}")
    expected = 16 + 8 * rows * cols
    if len(blob) != expected:
        raise MatrixFileError(
            f"{path}: expected {expected} bytes for {rows}x{cols}, "
            f"got {len(blob)}")
    data = np.frombuffer(blob[16:], dtype="<f8").astype(np.float64)
    if not np.isfinite(data).all():
        raise MatrixFileError(f"{path}: non-finite entries")
    return data.reshape(rows, cols)


def save_csv(path, w):
    w = as_matrix(w)
    with open(path, "w", encoding="ascii") as fh:
        for row in w:
            fh.write(",".join(repr(x) for x in row.tolist()))
            fh.write("\n")


def load_csv(path):
    try:
        with open(path, "r", encoding="ascii") as fh:
            lines = [ln for ln in (raw.strip() for raw in fh) if ln]
    except (OSError, UnicodeDecodeError) as exc:
        raise MatrixFileError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise MatrixFileError(f"{path}: empty matrix file")
    rows = []
    width = None
    for i, line in enumerate(lines, start=1):
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise MatrixFileError(
                f"{path}: row {i} has {len(cells)} cells, expected {width}")
        row = []
        for j, cell in enumerate(cells, start=1):
            try:
                row.append(float(cell))
            except ValueError:
                raise MatrixFileError(
                    f"{path}: row {i}, column {j}: not a number: {cell!r}")
        rows.append(row)
    m = np.array(rows, dtype=np.float64)
    if not np.isfinite(m).all():
        raise MatrixFileError(f"{path}: non-finite entries")
    return m


def load_matrix(path):
    """Load a matrix from MATF or CSV, sniffing the magic bytes."""
    try:
        with open(path, "rb") as fh:
            head = fh.read(8)
    except OSError as exc:
        raise MatrixFileError(f"cannot read {path}: {exc}") from exc
    if head == MATF_MAGIC:
        return load_matf(path)
    return load_csv(path)
