"""Binary model files for the two-branch tagger.

Layout (little-endian): magic ``UAM1``, u32 format version, u32 header
length, UTF-8 JSON header (architecture config, metrics, blob manifest),
then raw float32 parameter and state blobs in declaration order. Arrays
are float32 on disk and in memory, so load(save(m)) reproduces predictions
bit for bit.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .model import UamatConfig, UamatModel

MAGIC = b"UAM1"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sII")


def model_to_bytes(model: UamatModel) -> bytes:
    if model.config.dtype != "float32":
        raise ValueError(
            "only float32 models are serialized; float64 is for gradient checks"
        )
    blobs: list[tuple[str, np.ndarray]] = []
    for name, layer, key in model.param_items():
        blobs.append((f"p:{name}", layer.p[key]))
    for name, layer, key in model.state_items():
        blobs.append((f"s:{name}", layer.state[key]))
    header = {
        "config": {
            "c": model.config.c,
            "n_mels": model.config.n_mels,
            "n_frames": model.config.n_frames,
            "user_dim": model.config.user_dim,
            "width": model.config.width,
            "dropout": model.config.dropout,
            "dtype": model.config.dtype,
            "init_seed": model.config.init_seed,
        },
        "metrics": model.metrics,
        "blobs": [{"name": n, "shape": list(a.shape)} for n, a in blobs],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    parts = [_PREFIX.pack(MAGIC, FORMAT_VERSION, len(blob)), blob]
    for _, arr in blobs:
        parts.append(np.ascontiguousarray(arr, dtype=np.float32).tobytes())
    return b"".join(parts)


def save_model(path: str | Path, model: UamatModel) -> None:
    Path(path).write_bytes(model_to_bytes(model))


def load_model(path: str | Path, expected_c: int | None = None) -> UamatModel:
    data = Path(path).read_bytes()
    if len(data) < _PREFIX.size:
        raise ValueError(f"{path}: truncated model file")
    magic, version, header_len = _PREFIX.unpack_from(data, 0)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {version}")
    off = _PREFIX.size
    header = json.loads(data[off : off + header_len].decode("utf-8"))
    off += header_len

    config = UamatConfig(**header["config"])
    if expected_c is not None and config.c != expected_c:
        raise ValueError(
            f"{path}: model outputs C={config.c} but the active taxonomy "
            f"expects C={expected_c}"
        )
    model = UamatModel.build(config)
    model.metrics = dict(header["metrics"])

    declared = [(f"p:{n}", layer, key, "p") for n, layer, key in model.param_items()]
    declared += [(f"s:{n}", layer, key, "s") for n, layer, key in model.state_items()]
    manifest = header["blobs"]
    if [b["name"] for b in manifest] != [d[0] for d in declared]:
        raise ValueError(f"{path}: blob manifest does not match the architecture")

    for (name, layer, key, kind), entry in zip(declared, manifest):
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 4
        if off + nbytes > len(data):
            raise ValueError(f"{path}: truncated blob {name}")
        arr = np.frombuffer(data[off : off + nbytes], dtype=np.float32).reshape(shape)
        off += nbytes
        target = layer.p if kind == "p" else layer.state
        if target[key].shape != shape:
            raise ValueError(
                f"{path}: blob {name} has shape {shape}, expected {target[key].shape}"
            )
        target[key] = arr.copy()
    if off != len(data):
        raise ValueError(f"{path}: {len(data) - off} trailing bytes after blobs")
    return model
