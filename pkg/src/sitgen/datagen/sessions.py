"""Session segmentation: split per-user stream histories on listening gaps."""

from __future__ import annotations

from collections import defaultdict

from ..domain import DEFAULT_SESSION_GAP_MINUTES, Session, Stream


def segment_sessions(
    streams: list[Stream], gap_minutes: int = DEFAULT_SESSION_GAP_MINUTES
) -> list[Session]:
    """Split each user's time-sorted streams whenever a gap exceeds the limit.

    Gaps of exactly gap_minutes do not split (strict inequality). Every input
    stream lands in exactly one session. Sessions are ordered by user id and
    then chronologically.
    """
    per_user: dict[str, list[Stream]] = defaultdict(list)
    for s in streams:
        per_user[s.user].append(s)

    sessions: list[Session] = []
    limit = gap_minutes * 60
    for user in sorted(per_user):
        ordered = sorted(per_user[user], key=lambda s: s.device.local_timestamp)
        current = [ordered[0]]
        for prev, cur in zip(ordered, ordered[1:]):
            gap = (cur.device.local_timestamp - prev.device.local_timestamp).total_seconds()
            if gap > limit:
                sessions.append(Session(user, tuple(current), gap_minutes))
                current = [cur]
            else:
                current.append(cur)
        sessions.append(Session(user, tuple(current), gap_minutes))
    return sessions
