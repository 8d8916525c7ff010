"""Corpus, playlist, split, and demographics files.

Stream corpora are JSON-lines with a header line carrying the schema
version and the active taxonomy size, then one stream per line. Split
files reference a corpus by name and store index arrays, so they stay
valid as long as the corpus file does.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from ..domain import Demographics, Stream, TaxonomySubset
from .labeling import Playlist
from .splits import DatasetSplit, SplitKind, validate_split

SCHEMA_VERSION = 1


def write_corpus(path: str | Path, streams: list[Stream], c: int) -> None:
    TaxonomySubset(c)
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps({"schema_version": SCHEMA_VERSION, "c": c}) + "\n")
        for s in streams:
            f.write(json.dumps(s.to_json(), sort_keys=True) + "\n")


def read_corpus(path: str | Path) -> tuple[list[Stream], int]:
    with open(path, encoding="utf-8") as f:
        header = json.loads(f.readline())
        if header.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(
                f"{path}: unsupported schema version {header.get('schema_version')}"
            )
        c = int(header["c"])
        TaxonomySubset(c)
        streams = [Stream.from_json(json.loads(line)) for line in f if line.strip()]
    return streams, c


def write_logs(path: str | Path, logs: list[tuple[str, Stream]]) -> None:
    """Unlabeled play logs: one (playlist id, stream) pair per line."""
    with open(path, "w", encoding="utf-8") as f:
        for playlist_id, stream in logs:
            f.write(
                json.dumps(
                    {"playlist": playlist_id, "stream": stream.to_json()},
                    sort_keys=True,
                )
                + "\n"
            )


def read_logs(path: str | Path) -> list[tuple[str, Stream]]:
    out: list[tuple[str, Stream]] = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            obj = json.loads(line)
            out.append((str(obj["playlist"]), Stream.from_json(obj["stream"])))
    return out


def write_playlists(path: str | Path, playlists: list[Playlist]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for p in playlists:
            f.write(json.dumps(p.to_json(), sort_keys=True) + "\n")


def read_playlists(path: str | Path) -> list[Playlist]:
    with open(path, encoding="utf-8") as f:
        return [Playlist.from_json(json.loads(line)) for line in f if line.strip()]


def write_split(path: str | Path, split: DatasetSplit, corpus_name: str) -> None:
    payload = {
        "kind": split.kind.value,
        "seed": split.seed,
        "test_fraction": split.test_fraction,
        "corpus": corpus_name,
        "train_indices": list(split.train_indices),
        "test_indices": list(split.test_indices),
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def read_split(path: str | Path, streams: list[Stream]) -> DatasetSplit:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    train_idx = tuple(int(i) for i in payload["train_indices"])
    test_idx = tuple(int(i) for i in payload["test_indices"])
    for i in (*train_idx, *test_idx):
        if not 0 <= i < len(streams):
            raise ValueError(f"{path}: stream index {i} outside corpus of {len(streams)}")
    split = DatasetSplit(
        kind=SplitKind(payload["kind"]),
        train=tuple(streams[i] for i in train_idx),
        test=tuple(streams[i] for i in test_idx),
        train_indices=train_idx,
        test_indices=test_idx,
        seed=int(payload["seed"]),
        test_fraction=float(payload["test_fraction"]),
    )
    validate_split(split)
    return split


def split_corpus_name(path: str | Path) -> str:
    return json.loads(Path(path).read_text(encoding="utf-8"))["corpus"]


def write_demographics(path: str | Path, demographics: dict[str, Demographics]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(["user_id", "age", "country", "gender"])
        for uid in sorted(demographics):
            d = demographics[uid]
            w.writerow([uid, d.age, d.country, d.gender.value])


def read_demographics(path: str | Path) -> dict[str, Demographics]:
    out: dict[str, Demographics] = {}
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            out[row["user_id"]] = Demographics.from_json(
                {"age": row["age"], "country": row["country"], "gender": row["gender"]}
            )
    return out
