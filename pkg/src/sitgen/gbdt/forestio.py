"""Binary serialization for boosted forests.

Layout (little-endian): magic ``SPF1``, u32 format version, u32 header
length, UTF-8 JSON header (training config, class count, feature names,
per-tree node counts, loss history), then for each tree — round-major,
class within round — its nodes as fixed-width records::

    feature u8 | threshold f32 | left u32 | right u32 | leaf flag u8 | weight f32

Thresholds and weights are stored (and kept in memory) as float32, so a
save/load round trip reproduces the forest bit for bit.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .boosting import SpForest, SpTrainConfig, Tree

MAGIC = b"SPF1"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sII")  # magic, version, header length
_NODE = struct.Struct("<BfIIBf")


def forest_to_bytes(forest: SpForest) -> bytes:
    header = {
        "config": {
            "rounds": forest.config.rounds,
            "max_depth": forest.config.max_depth,
            "shrinkage": forest.config.shrinkage,
            "l2_reg": forest.config.l2_reg,
            "min_child_weight": forest.config.min_child_weight,
            "min_gain": forest.config.min_gain,
        },
        "c": forest.c,
        "feature_names": list(forest.feature_names),
        "tree_node_counts": [
            t.n_nodes for round_trees in forest.trees for t in round_trees
        ],
        "train_loss_history": forest.train_loss_history,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    parts = [_PREFIX.pack(MAGIC, FORMAT_VERSION, len(blob)), blob]
    for round_trees in forest.trees:
        for t in round_trees:
            for i in range(t.n_nodes):
                parts.append(
                    _NODE.pack(
                        int(t.feature[i]),
                        float(t.threshold[i]),
                        int(t.left[i]),
                        int(t.right[i]),
                        int(t.is_leaf[i]),
                        float(t.weight[i]),
                    )
                )
    return b"".join(parts)


def write_forest(path: str | Path, forest: SpForest) -> None:
    Path(path).write_bytes(forest_to_bytes(forest))


def read_forest(path: str | Path) -> SpForest:
    data = Path(path).read_bytes()
    if len(data) < _PREFIX.size:
        raise ValueError(f"{path}: truncated forest file")
    magic, version, header_len = _PREFIX.unpack_from(data, 0)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {version}")
    off = _PREFIX.size
    header = json.loads(data[off : off + header_len].decode("utf-8"))
    off += header_len

    cfg = SpTrainConfig(**header["config"])
    counts = header["tree_node_counts"]
    c = header["c"]
    if len(counts) % c != 0:
        raise ValueError(f"{path}: {len(counts)} trees is not a multiple of C={c}")
    expected = off + sum(counts) * _NODE.size
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(data)}")

    trees: list[list[Tree]] = []
    round_trees: list[Tree] = []
    for n_nodes in counts:
        feature = np.empty(n_nodes, dtype=np.uint8)
        threshold = np.empty(n_nodes, dtype=np.float32)
        left = np.empty(n_nodes, dtype=np.uint32)
        right = np.empty(n_nodes, dtype=np.uint32)
        is_leaf = np.empty(n_nodes, dtype=np.uint8)
        weight = np.empty(n_nodes, dtype=np.float32)
        for i in range(n_nodes):
            rec = _NODE.unpack_from(data, off)
            off += _NODE.size
            feature[i], threshold[i], left[i] = rec[0], rec[1], rec[2]
            right[i], is_leaf[i], weight[i] = rec[3], rec[4], rec[5]
        round_trees.append(
            Tree(feature, threshold, left, right, is_leaf, weight)
        )
        if len(round_trees) == c:
            trees.append(round_trees)
            round_trees = []
    return SpForest(
        c=c,
        config=cfg,
        trees=trees,
        feature_names=tuple(header["feature_names"]),
        train_loss_history=list(header["train_loss_history"]),
    )
