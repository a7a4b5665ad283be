"""RFC 3339 parsing/formatting and UTC bucket arithmetic (epoch seconds)."""

from __future__ import annotations

from datetime import datetime, timezone

HOUR = 3600
DAY = 86400


def parse_rfc3339(value: str) -> int:
    """Parse an RFC 3339 timestamp (or a bare date, taken as UTC midnight)
    to epoch seconds. Timestamps without an offset are treated as UTC."""
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def format_rfc3339(epoch: int) -> str:
    dt = datetime.fromtimestamp(epoch, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def floor_bucket(epoch: int, granularity: str) -> int:
    if granularity == "hour":
        return epoch - epoch % HOUR
    if granularity == "day":
        return epoch - epoch % DAY
    raise ValueError(f"unknown granularity {granularity!r}")


def bucket_step(granularity: str) -> int:
    if granularity == "hour":
        return HOUR
    if granularity == "day":
        return DAY
    raise ValueError(f"unknown granularity {granularity!r}")
