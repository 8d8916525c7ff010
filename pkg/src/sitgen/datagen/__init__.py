"""Corpus construction: playlist-title labeling, synthetic generation, splits."""

from .corpusio import (
    SCHEMA_VERSION,
    read_corpus,
    read_demographics,
    read_logs,
    read_playlists,
    read_split,
    write_corpus,
    write_demographics,
    write_logs,
    write_playlists,
    write_split,
)
from .keywords import (
    DEFAULT_KEYWORDS,
    KeywordTable,
    build_keyword_table,
    default_keyword_table,
    load_keyword_table,
    match_situation,
)
from .labeling import (
    MAX_ARTIST_OR_ALBUM_SHARE,
    MAX_PLAYLIST_TRACKS,
    LabelingDiagnostics,
    Playlist,
    filter_playlist,
    label_streams,
)
from .reports import DistributionReport, distribution_report
from .sessions import segment_sessions
from .splits import (
    BUDGET_SLACK,
    DatasetSplit,
    SplitError,
    SplitKind,
    make_split,
    validate_split,
)
from .synth import SynthBundle, SynthConfig, hour_density, synth_generate

__all__ = [
    "BUDGET_SLACK",
    "DEFAULT_KEYWORDS",
    "DatasetSplit",
    "DistributionReport",
    "KeywordTable",
    "LabelingDiagnostics",
    "MAX_ARTIST_OR_ALBUM_SHARE",
    "MAX_PLAYLIST_TRACKS",
    "Playlist",
    "SCHEMA_VERSION",
    "SplitError",
    "SplitKind",
    "SynthBundle",
    "SynthConfig",
    "build_keyword_table",
    "default_keyword_table",
    "distribution_report",
    "filter_playlist",
    "hour_density",
    "label_streams",
    "load_keyword_table",
    "make_split",
    "match_situation",
    "read_corpus",
    "read_demographics",
    "read_logs",
    "read_playlists",
    "read_split",
    "segment_sessions",
    "synth_generate",
    "validate_split",
    "write_corpus",
    "write_demographics",
    "write_logs",
    "write_playlists",
    "write_split",
]
