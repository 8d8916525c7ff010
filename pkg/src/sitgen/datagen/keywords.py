"""Situation keyword table used to label playlist titles.

Keywords are stored as surface forms and stemmed at load time. The default
table ships with each tag plus a handful of synonyms; deployments can
override it with a JSON file mapping tag -> list of keywords.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..domain import Situation, TaxonomySubset
from ..stemmer import porter_stem, stem_title

DEFAULT_KEYWORDS: dict[str, list[str]] = {
    "work": ["work", "office", "study", "focus", "homework"],
    "gym": ["gym", "workout", "fitness", "exercise", "lifting", "muscle"],
    "party": ["party", "fiesta", "celebration", "birthday"],
    "sleep": ["sleep", "sleepy", "nap", "bedtime", "lullaby", "insomnia", "dream"],
    "morning": ["morning", "breakfast", "sunrise", "wakeup"],
    "run": ["run", "running", "jog", "jogging", "marathon", "sprint"],
    "night": ["night", "midnight", "evening", "nocturnal"],
    "dance": ["dance", "dancing", "groove", "boogie", "disco"],
    "car": ["car", "driving", "drive", "roadtrip", "highway", "commute"],
    "train": ["train", "subway", "metro", "rail", "railway"],
    "relax": ["relax", "chill", "calm", "unwind", "mellow", "zen"],
    "club": ["club", "clubbing", "rave", "nightclub", "vip"],
}


@dataclass(frozen=True)
class KeywordTable:
    """Map from situation to its set of stemmed keywords.

    Invariant: within the covered situations the stem sets are pairwise
    disjoint, so a single stemmed token can vote for at most one situation.
    """

    stems: dict[Situation, frozenset[str]]

    def __post_init__(self) -> None:
        seen: dict[str, Situation] = {}
        for situation, stems in self.stems.items():
            if not stems:
                raise ValueError(f"situation {situation} has no keywords")
            for stem in stems:
                if stem in seen:
                    raise ValueError(
                        f"keyword stem {stem!r} is shared by {seen[stem]} and "
                        f"{situation}; stem sets must be disjoint"
                    )
                seen[stem] = situation

    def covers(self, subset: TaxonomySubset) -> bool:
        return all(s in self.stems for s in subset)

    def match(self, stemmed_tokens: list[str]) -> set[Situation]:
        tokens = set(stemmed_tokens)
        return {s for s, stems in self.stems.items() if tokens & stems}


def build_keyword_table(raw: dict[str, list[str]]) -> KeywordTable:
    stems = {
        Situation.from_tag(tag): frozenset(porter_stem(kw.lower()) for kw in kws)
        for tag, kws in raw.items()
    }
    return KeywordTable(stems)


def default_keyword_table() -> KeywordTable:
    return build_keyword_table(DEFAULT_KEYWORDS)


def load_keyword_table(path: str | Path) -> KeywordTable:
    with open(path, encoding="utf-8") as fh:
        return build_keyword_table(json.load(fh))


def match_situation(title: str, kw: KeywordTable) -> Situation | None:
    """Situation whose keywords hit the stemmed title; None if 0 or >1 hit.

    Ambiguous titles (keywords of two different situations) are discarded
    because situations are mutually exclusive classes.
    """
    matches = kw.match(stem_title(title))
    if len(matches) == 1:
        return next(iter(matches))
    return None
