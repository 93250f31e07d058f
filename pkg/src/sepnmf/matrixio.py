"""Matrix file formats and run manifests.

Two formats (documented in docs/formats.md):

  csv   plain comma-separated rows, no header, 17 significant digits
        (lossless round-trip for float64)
  raw   16-byte header -- magic "SNMF", u32 rows, u32 cols, little-endian --
        followed by the column-major float64 payload

A run manifest records the command line, configuration, seed, library
version, input checksums and a timestamp alongside every CLI output.
"""

import hashlib
import json
import struct
from datetime import datetime, timezone

import numpy as np

from ._version import __version__
from .errors import InvalidMatrixError
from .linalg import as_matrix

MAGIC = b"SNMF"


def write_matrix_csv(path, M):
    M = as_matrix(M)
    with open(path, "w", encoding="ascii") as fh:
        for i in range(M.shape[0]):
            fh.write(",".join(f"{v:.17g}" for v in M[i, :]))
            fh.write("\n")


def read_matrix_csv(path):
    try:
        M = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    except Exception as exc:
        raise InvalidMatrixError(f"cannot parse CSV matrix {path}: {exc}") from exc
    return as_matrix(M, name=str(path))


def write_matrix_raw(path, M):
    M = as_matrix(M)
    rows, cols = M.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", rows, cols))
        fh.write(M.tobytes(order="F"))


def read_matrix_raw(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise InvalidMatrixError(f"{path}: bad magic, not a raw matrix file")
    if len(blob) < 12:
        raise InvalidMatrixError(f"{path}: truncated raw matrix header")
    rows, cols = struct.unpack("<II", blob[4:12])
    expected = 12 + 8 * rows * cols
    if len(blob) != expected:
        raise InvalidMatrixError(
            f"{path}: payload length {len(blob) - 12} does not match {rows}x{cols}")
    data = np.frombuffer(blob[12:], dtype="<f8")
    return as_matrix(data.reshape((rows, cols), order="F"), name=str(path))


def read_matrix(path, fmt=None):
    """Read a matrix, sniffing the format from the magic when fmt is None."""
    if fmt is None:
        with open(path, "rb") as fh:
            fmt = "raw" if fh.read(4) == MAGIC else "csv"
    if fmt == "raw":
        return read_matrix_raw(path)
    if fmt == "csv":
        return read_matrix_csv(path)
    raise InvalidMatrixError(f"unknown matrix format {fmt!r}")


def write_matrix(path, M, fmt="csv"):
    if fmt == "raw":
        write_matrix_raw(path, M)
    elif fmt == "csv":
        write_matrix_csv(path, M)
    else:
        raise InvalidMatrixError(f"unknown matrix format {fmt!r}")


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, command, config, seed, inputs=()):
    manifest = {
        "command": list(command),
        "config": config,
        "seed": seed,
        "version": __version__,
        "inputs": {str(p): sha256_file(p) for p in inputs},
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
