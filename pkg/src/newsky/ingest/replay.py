"""Deterministic replay source: UTF-8 JSONL, one event per line.

Line fields: cursor (int), kind ("post"|"repost"|"like"|"other"), actor,
created_at (RFC 3339), record (posts), subject (reposts/likes). Unknown
fields are ignored; unknown kinds decode as Other.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterator

from .. import timeutil
from .events import DecodeError, EventKind, FirehoseEvent, StrongRef

_KINDS = {
    "post": EventKind.POST,
    "repost": EventKind.REPOST,
    "like": EventKind.LIKE,
    "other": EventKind.OTHER,
}


def decode_replay_line(raw: str | bytes) -> FirehoseEvent:
    try:
        obj = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise DecodeError(f"invalid json: {exc}") from exc
    if not isinstance(obj, dict):
        raise DecodeError("replay line is not an object")

    cursor = obj.get("cursor")
    if not isinstance(cursor, int) or isinstance(cursor, bool):
        raise DecodeError("cursor must be an integer")
    actor = obj.get("actor")
    if not isinstance(actor, str) or not actor:
        raise DecodeError("actor must be a non-empty string")
    created_raw = obj.get("created_at")
    if not isinstance(created_raw, str):
        raise DecodeError("created_at must be a string")
    try:
        created_at = timeutil.parse_rfc3339(created_raw)
    except ValueError as exc:
        raise DecodeError(f"bad created_at {created_raw!r}") from exc

    kind_raw = obj.get("kind")
    if not isinstance(kind_raw, str):
        raise DecodeError("kind must be a string")
    kind = _KINDS.get(kind_raw, EventKind.OTHER)

    if kind is EventKind.POST:
        record = obj.get("record")
        if not isinstance(record, dict):
            raise DecodeError("post line without record object")
        return FirehoseEvent(cursor=cursor, actor_id=actor, kind=kind,
                             created_at=created_at, record=record)
    if kind in (EventKind.REPOST, EventKind.LIKE):
        subject = obj.get("subject")
        if not isinstance(subject, dict):
            raise DecodeError(f"{kind_raw} line without subject object")
        uri, cid = subject.get("uri"), subject.get("cid")
        if not isinstance(uri, str) or not isinstance(cid, str):
            raise DecodeError("subject requires uri and cid strings")
        return FirehoseEvent(cursor=cursor, actor_id=actor, kind=kind,
                             created_at=created_at,
                             subject_ref=StrongRef(target_uri=uri, target_cid=cid))
    return FirehoseEvent(cursor=cursor, actor_id=actor, kind=EventKind.OTHER,
                         created_at=created_at)


class ReplayTransport:
    """Reads raw frames (lines) from a replay file. Fully deterministic:
    the same file and resume cursor always produce the same sequence."""

    endless = False

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def frames(self, resume_cursor: int | None) -> Iterator[str]:
        # resume filtering happens in the driver after decode, so corrupted
        # frames are counted consistently regardless of the resume point
        del resume_cursor
        with self.path.open("r", encoding="utf-8") as handle:
            for line in handle:
                if line.strip():
                    yield line

    def decode(self, raw: str) -> FirehoseEvent:
        return decode_replay_line(raw)
