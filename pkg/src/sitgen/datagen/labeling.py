"""Playlist-title labeling pipeline: filters, matching, and stream labeling."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace

from ..domain import Situation, Stream
from .keywords import KeywordTable, match_situation


@dataclass(frozen=True)
class Playlist:
    id: str
    title: str
    tracks: tuple[str, ...]
    track_artists: dict[str, str]
    track_albums: dict[str, str]

    def __post_init__(self) -> None:
        if not self.tracks:
            raise ValueError(f"playlist {self.id} has no tracks")
        missing = [t for t in self.tracks if t not in self.track_artists]
        if missing:
            raise ValueError(f"playlist {self.id}: tracks missing artist: {missing[:3]}")
        missing = [t for t in self.tracks if t not in self.track_albums]
        if missing:
            raise ValueError(f"playlist {self.id}: tracks missing album: {missing[:3]}")

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "tracks": list(self.tracks),
            "track_artists": dict(self.track_artists),
            "track_albums": dict(self.track_albums),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Playlist":
        return cls(
            id=obj["id"],
            title=obj["title"],
            tracks=tuple(obj["tracks"]),
            track_artists=dict(obj["track_artists"]),
            track_albums=dict(obj["track_albums"]),
        )


MAX_PLAYLIST_TRACKS = 100
MAX_ARTIST_OR_ALBUM_SHARE = 0.25


def filter_playlist(p: Playlist) -> bool:
    """True iff the playlist passes the size and diversity filters.

    Rejected: more than 100 tracks, or any single artist or album covering
    more than 25% of the playlist.
    """
    n = len(p.tracks)
    if n > MAX_PLAYLIST_TRACKS:
        return False
    artist_counts = Counter(p.track_artists[t] for t in p.tracks)
    if max(artist_counts.values()) / n > MAX_ARTIST_OR_ALBUM_SHARE:
        return False
    album_counts = Counter(p.track_albums[t] for t in p.tracks)
    if max(album_counts.values()) / n > MAX_ARTIST_OR_ALBUM_SHARE:
        return False
    return True


@dataclass
class LabelingDiagnostics:
    """Bookkeeping for one labeling run; rows() feeds the CSV report."""

    labeled: int = 0
    unknown_playlist: int = 0
    filtered_playlist: int = 0
    unmatched_title: int = 0
    per_situation: Counter = field(default_factory=Counter)

    def rows(self) -> list[tuple[str, int]]:
        rows = [
            ("labeled", self.labeled),
            ("unknown_playlist", self.unknown_playlist),
            ("filtered_playlist", self.filtered_playlist),
            ("unmatched_title", self.unmatched_title),
        ]
        rows.extend(
            (f"labeled_{s.value}", n) for s, n in sorted(
                self.per_situation.items(), key=lambda kv: kv[0].index
            )
        )
        return rows


def label_streams(
    playlists: list[Playlist],
    logs: list[tuple[str, Stream]],
    kw: KeywordTable,
) -> tuple[list[Stream], LabelingDiagnostics]:
    """Label each logged stream with its playlist's situation.

    The track/user/device triplet gets a joint tag from the playlist title;
    nothing is tagged individually. Streams on playlists that fail the
    filters or whose title is ambiguous/unmatched are dropped.
    """
    by_id = {p.id: p for p in playlists}
    verdict: dict[str, Situation | None | str] = {}
    for p in playlists:
        if not filter_playlist(p):
            verdict[p.id] = "filtered"
        else:
            verdict[p.id] = match_situation(p.title, kw)

    out: list[Stream] = []
    diag = LabelingDiagnostics()
    for playlist_id, stream in logs:
        playlist = by_id.get(playlist_id)
        if playlist is None:
            diag.unknown_playlist += 1
            continue
        if stream.track not in playlist.track_artists:
            raise ValueError(
                f"log stream track {stream.track!r} not in playlist {playlist_id!r}"
            )
        v = verdict[playlist_id]
        if v == "filtered":
            diag.filtered_playlist += 1
        elif v is None:
            diag.unmatched_title += 1
        else:
            out.append(replace(stream, situation=v))
            diag.labeled += 1
            diag.per_situation[v] += 1
    return out, diag
