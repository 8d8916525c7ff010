"""Binary serialization for tag stores.

Layout (little-endian): magic ``TGS1``, u32 format version, u32 header
length, UTF-8 JSON header (class count, model hash, id lists, popularity
tables, skipped-pair count, pair count), then u32 pair track indices, u32
pair user indices, and the float32 probability matrix. All arrays are kept
float32/u32 in memory, so a round trip is bit-identical.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .store import TagStore

MAGIC = b"TGS1"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sII")


def store_to_bytes(store: TagStore) -> bytes:
    header = {
        "c": store.c,
        "model_hash": store.model_hash,
        "track_ids": store.track_ids,
        "user_ids": store.user_ids,
        "track_popularity": store.track_popularity,
        "situation_popularity": {
            str(k): v for k, v in store.situation_popularity.items()
        },
        "skipped_pairs": store.skipped_pairs,
        "n_pairs": store.n_pairs,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    return b"".join(
        [
            _PREFIX.pack(MAGIC, FORMAT_VERSION, len(blob)),
            blob,
            np.ascontiguousarray(store.pair_tracks, dtype=np.uint32).tobytes(),
            np.ascontiguousarray(store.pair_users, dtype=np.uint32).tobytes(),
            np.ascontiguousarray(store.probs, dtype=np.float32).tobytes(),
        ]
    )


def write_store(path: str | Path, store: TagStore) -> None:
    Path(path).write_bytes(store_to_bytes(store))


def read_store(path: str | Path) -> TagStore:
    data = Path(path).read_bytes()
    if len(data) < _PREFIX.size:
        raise ValueError(f"{path}: truncated store file")
    magic, version, header_len = _PREFIX.unpack_from(data, 0)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {version}")
    off = _PREFIX.size
    header = json.loads(data[off : off + header_len].decode("utf-8"))
    off += header_len

    n = int(header["n_pairs"])
    c = int(header["c"])
    expected = off + n * 4 + n * 4 + n * c * 4
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(data)}")
    pair_tracks = np.frombuffer(data[off : off + n * 4], dtype=np.uint32).copy()
    off += n * 4
    pair_users = np.frombuffer(data[off : off + n * 4], dtype=np.uint32).copy()
    off += n * 4
    probs = (
        np.frombuffer(data[off:], dtype=np.float32).reshape(n, c).copy()
    )
    return TagStore(
        c=c,
        model_hash=header["model_hash"],
        track_ids=list(header["track_ids"]),
        user_ids=list(header["user_ids"]),
        pair_tracks=pair_tracks,
        pair_users=pair_users,
        probs=probs,
        track_popularity={
            str(k): int(v) for k, v in header["track_popularity"].items()
        },
        situation_popularity={
            int(k): {str(t): int(cnt) for t, cnt in v.items()}
            for k, v in header["situation_popularity"].items()
        },
        skipped_pairs=int(header["skipped_pairs"]),
    )
