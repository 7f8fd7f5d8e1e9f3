"""Matrix files: row-major CSV with complex entries as "re+imi", and the PALB binary format.

PALB layout (little endian): magic b"PALB", uint32 version, uint64 N, then
N*N (re, im) float64 pairs in row-major order.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

MAGIC = b"PALB"
VERSION = 1
_HEADER = struct.Struct("<4sIQ")


def format_complex(z: complex) -> str:
    z = complex(z)
    im = z.imag
    sign = "-" if (im < 0 or (im == 0 and np.signbit(im))) else "+"
    return f"{z.real!r}{sign}{abs(im)!r}i"


def parse_complex(text: str) -> complex:
    text = text.strip()
    if text.endswith("i"):
        body = text[:-1]
        # split at the last sign that is not part of an exponent
        for pos in range(len(body) - 1, 0, -1):
            if body[pos] in "+-" and body[pos - 1] not in "eE":
                return complex(float(body[:pos]), float(body[pos:]))
        return complex(0.0, float(body))
    return complex(float(text), 0.0)


def write_csv(M: np.ndarray, path) -> None:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in M:
            w.writerow([format_complex(z) for z in row])


def read_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [[parse_complex(x) for x in row] for row in csv.reader(fh) if row]
    M = np.array(rows, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{path}: not a square matrix")
    return M


def write_binary(M: np.ndarray, path) -> None:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    N = M.shape[0]
    body = np.empty((N * N, 2), dtype="<f8")
    body[:, 0] = M.real.ravel()
    body[:, 1] = M.imag.ravel()
    Path(path).write_bytes(_HEADER.pack(MAGIC, VERSION, N) + body.tobytes())


def read_binary(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, version, N = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    if body.size != 2 * N * N:
        raise ValueError(f"{path}: expected {2 * N * N} floats, found {body.size}")
    pairs = body.reshape(N * N, 2)
    return (pairs[:, 0] + 1j * pairs[:, 1]).reshape(N, N)


def load_matrix(path) -> np.ndarray:
    """Read either format, chosen by the magic bytes."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    M = read_binary(path) if head == MAGIC else read_csv(path)
    return M.real.copy() if np.all(M.imag == 0) else M
