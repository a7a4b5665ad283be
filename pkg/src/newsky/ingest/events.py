"""Decoded stream event types shared by every transport."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class DecodeError(Exception):
    """A structurally invalid frame; the reader skips it and counts it."""


class EventKind(enum.Enum):
    POST = "post"
    REPOST = "repost"
    LIKE = "like"
    OTHER = "other"


@dataclass(frozen=True)
class StrongRef:
    """Pointer to an original record: AT-URI plus content hash."""

    target_uri: str
    target_cid: str

    def __post_init__(self) -> None:
        if not _valid_at_uri(self.target_uri):
            raise DecodeError(f"invalid strong-ref uri: {self.target_uri!r}")


def _valid_at_uri(uri: str) -> bool:
    if not uri.startswith("at://"):
        return False
    parts = uri[5:].split("/")
    return len(parts) == 3 and all(parts)


@dataclass(frozen=True)
class FirehoseEvent:
    """One decoded firehose event. Immutable after decode; safe to share
    across threads.

    Posts carry their raw record payload; reposts and likes carry a strong
    reference to the original record instead.
    """

    cursor: int
    actor_id: str
    kind: EventKind
    created_at: int  # epoch seconds, UTC
    record: dict | None = None
    subject_ref: StrongRef | None = None
    rkey: str | None = None

    def __post_init__(self) -> None:
        if self.kind is EventKind.POST and self.record is None:
            raise DecodeError("post event without record")
        if self.kind in (EventKind.REPOST, EventKind.LIKE) and self.subject_ref is None:
            raise DecodeError(f"{self.kind.value} event without subject ref")


@dataclass(frozen=True)
class CursorGap:
    """Server signalled history loss; surfaced to metrics, stream continues."""

    message: str = ""
