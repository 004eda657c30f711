"""Reader/writer for the ``CAVT`` binary tensor container.

Layout (all little-endian)::

    b"CAVT" | u32 version | u32 rank | rank x u64 dims | f32 values (row-major)
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import TensorFormatError

MAGIC = b"CAVT"
VERSION = 1

_HEADER = struct.Struct("<4sII")


def encode(array: np.ndarray) -> bytes:
    arr = np.asarray(array)
    if not np.all(np.isfinite(arr)):
        raise TensorFormatError("tensor contains non-finite values")
    dims = struct.pack(f"<{arr.ndim}Q", *arr.shape)
    payload = np.ascontiguousarray(arr, dtype="<f4").tobytes()
    return _HEADER.pack(MAGIC, VERSION, arr.ndim) + dims + payload


def decode(data: bytes) -> np.ndarray:
    if len(data) < _HEADER.size:
        raise TensorFormatError("truncated header")
    magic, version, rank = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise TensorFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise TensorFormatError(f"unsupported version {version}")
    offset = _HEADER.size
    if len(data) < offset + 8 * rank:
        raise TensorFormatError("truncated dims")
    dims = struct.unpack_from(f"<{rank}Q", data, offset)
    offset += 8 * rank
    count = int(np.prod(dims, dtype=np.int64)) if rank else 1
    expected = offset + 4 * count
    if len(data) < expected:
        raise TensorFormatError(f"truncated payload: need {expected} bytes, got {len(data)}")
    if len(data) > expected:
        raise TensorFormatError(f"{len(data) - expected} trailing bytes after payload")
    values = np.frombuffer(data, dtype="<f4", count=count, offset=offset)
    return values.reshape(dims).astype(np.float32)


def write_tensor(path: str | Path, array: np.ndarray) -> None:
    Path(path).write_bytes(encode(array))


def read_tensor(path: str | Path) -> np.ndarray:
    return decode(Path(path).read_bytes())
