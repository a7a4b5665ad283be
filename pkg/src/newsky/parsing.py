"""Post-record parsing: URL extraction, domain normalization, hashtags.

This is the single normalization point in the codebase: every domain that
reaches the rating lookup or the store went through ``normalize_domain``.
"""

from __future__ import annotations

import ipaddress
import re
from dataclasses import dataclass, field
from urllib.parse import urlsplit

from . import psl
from .ingest.events import EventKind, FirehoseEvent

_HASHTAG_RE = re.compile(r"#(\w{1,100})", re.UNICODE)
_HOST_LABEL_RE = re.compile(r"^[\w-]+$", re.UNICODE)


class UnparseableUrl(ValueError):
    """Raised when a string has no usable host."""


@dataclass(frozen=True)
class ParsedPost:
    post_uri: str
    actor_id: str
    created_at: int
    urls: list[tuple[str, str]] = field(default_factory=list)  # (raw, domain)
    hashtags: list[str] = field(default_factory=list)
    lang: str | None = None


def normalize_domain(raw_url: str) -> str:
    """Reduce a URL to its lowercase registrable domain.

    Strips scheme, port, path, userinfo and a single leading "www.";
    IP-literal hosts are returned verbatim. Raises UnparseableUrl when no
    valid host can be extracted.
    """
    text = (raw_url or "").strip()
    if not text:
        raise UnparseableUrl(raw_url)
    try:
        parts = urlsplit(text)
        if not parts.netloc:
            # a scheme with no authority (mailto:, data:) has no host
            if parts.scheme or "://" in text:
                raise UnparseableUrl(raw_url)
            parts = urlsplit("https://" + text)
        host = parts.hostname
    except UnparseableUrl:
        raise
    except ValueError as exc:
        raise UnparseableUrl(raw_url) from exc
    if not host:
        raise UnparseableUrl(raw_url)
    host = host.rstrip(".").lower()
    if not host:
        raise UnparseableUrl(raw_url)
    try:
        ipaddress.ip_address(host)
        return host
    except ValueError:
        pass
    if host.startswith("www.") and "." in host[4:]:
        # never strip down to a bare suffix (www.com is a registrable domain)
        host = host[4:]
    labels = host.split(".")
    if any(not _HOST_LABEL_RE.match(label) for label in labels):
        raise UnparseableUrl(raw_url)
    return psl.registrable_domain(host)


def extract_hashtags(text: str) -> list[str]:
    return [m.group(1).casefold() for m in _HASHTAG_RE.finditer(text or "")]


def parse_record(record: dict) -> tuple[list[tuple[str, str]], list[str], str | None]:
    """Extract (urls, hashtags, lang) from a canonical post record.

    URLs are the union of facet links and embed URIs, deduplicated by raw
    URL; unparseable URLs are dropped. Hashtags come from both facet tags
    and "#token" matches in the text, case-folded and deduplicated.
    Missing record fields yield empty lists.
    """
    raw_urls: list[str] = []
    tags: list[str] = []
    for facet in record.get("facets") or []:
        if not isinstance(facet, dict):
            continue
        kind = facet.get("type")
        value = facet.get("value")
        if not isinstance(value, str):
            continue
        if kind == "link":
            raw_urls.append(value)
        elif kind == "tag":
            tags.append(value.lstrip("#").casefold())
    for uri in record.get("embed_uris") or []:
        if isinstance(uri, str):
            raw_urls.append(uri)

    urls: list[tuple[str, str]] = []
    seen_raw: set[str] = set()
    for raw in raw_urls:
        if raw in seen_raw:
            continue
        seen_raw.add(raw)
        try:
            urls.append((raw, normalize_domain(raw)))
        except UnparseableUrl:
            continue

    text = record.get("text")
    tags.extend(extract_hashtags(text if isinstance(text, str) else ""))
    hashtags: list[str] = []
    seen_tags: set[str] = set()
    for tag in tags:
        if tag and tag not in seen_tags:
            seen_tags.add(tag)
            hashtags.append(tag)

    lang = None
    langs = record.get("langs")
    if isinstance(langs, list) and langs and isinstance(langs[0], str):
        lang = langs[0].split("-")[0].lower() or None

    return urls, hashtags, lang


def parse_post(event: FirehoseEvent) -> ParsedPost:
    """Extract normalized link and hashtag observations from a Post event."""
    if event.kind is not EventKind.POST:
        raise ValueError(f"parse_post requires a Post event, got {event.kind}")
    urls, hashtags, lang = parse_record(event.record or {})
    return ParsedPost(
        post_uri=post_uri_for(event),
        actor_id=event.actor_id,
        created_at=event.created_at,
        urls=urls,
        hashtags=hashtags,
        lang=lang,
    )


def post_uri_for(event: FirehoseEvent) -> str:
    """AT-URI of a post event's record.

    Replay frames carry no record key, so the cursor doubles as one; live
    frames carry the real key in the commit op path (stored on the event).
    """
    rkey = event.rkey if event.rkey is not None else str(event.cursor)
    return f"at://{event.actor_id}/app.bsky.feed.post/{rkey}"


def actor_of_uri(uri: str) -> str | None:
    """Authority (DID) component of an at:// URI, or None."""
    if not uri.startswith("at://"):
        return None
    rest = uri[5:]
    authority = rest.split("/", 1)[0]
    return authority or None
