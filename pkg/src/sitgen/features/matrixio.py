"""Binary matrix files: magic SGM1, u32 rows, u32 cols, float32 row-major.

Single matrices go to standalone files; collections go to a concatenated
archive with a JSON index of byte offsets.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"SGM1"
_HEADER = struct.Struct("<4sII")


def write_matrix(path: str | Path, matrix: np.ndarray) -> None:
    with open(path, "wb") as fh:
        _write_record(fh, matrix)


def _write_record(fh, matrix: np.ndarray) -> None:
    if matrix.ndim == 1:
        matrix = matrix[None, :]
    if matrix.ndim != 2:
        raise ValueError(f"expected 2-d matrix, got shape {matrix.shape}")
    rows, cols = matrix.shape
    fh.write(_HEADER.pack(MAGIC, rows, cols))
    fh.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())


def read_matrix(path: str | Path) -> np.ndarray:
    with open(path, "rb") as fh:
        return _read_record(fh)


def _read_record(fh) -> np.ndarray:
    header = fh.read(_HEADER.size)
    if len(header) < _HEADER.size:
        raise ValueError("truncated matrix file")
    magic, rows, cols = _HEADER.unpack(header)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}, expected {MAGIC!r}")
    payload = fh.read(rows * cols * 4)
    if len(payload) < rows * cols * 4:
        raise ValueError("truncated matrix payload")
    return np.frombuffer(payload, dtype="<f4").reshape(rows, cols).astype(np.float32)


def index_path(archive: str | Path) -> Path:
    return Path(str(archive) + ".index.json")


def write_matrix_archive(path: str | Path, matrices: dict[str, np.ndarray]) -> None:
    """Concatenated SGM1 records plus a JSON index of byte offsets."""
    index: dict[str, int] = {}
    with open(path, "wb") as fh:
        for key in sorted(matrices):
            index[key] = fh.tell()
            _write_record(fh, matrices[key])
    with open(index_path(path), "w", encoding="utf-8") as fh:
        json.dump(index, fh, sort_keys=True)


def read_matrix_archive(path: str | Path) -> dict[str, np.ndarray]:
    with open(index_path(path), encoding="utf-8") as fh:
        index = json.load(fh)
    out: dict[str, np.ndarray] = {}
    with open(path, "rb") as fh:
        for key, offset in index.items():
            fh.seek(offset)
            out[key] = _read_record(fh)
    return out
