"""Live-frame envelope: binary header+body decoding and fixture encoding.

A live frame is two back-to-back CBOR items: a header map carrying the
operation and type tags, and a body map. Commit bodies hold repository ops
plus a block store mapping content ids to record payloads; create-ops on the
post/repost/like collections become events, everything else decodes to an
Other event. Info frames signal cursor gaps.

The encoder half exists so tests and operators can build deterministic
golden fixtures without a relay.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

from .. import timeutil
from . import cbor
from .events import CursorGap, DecodeError, EventKind, FirehoseEvent, StrongRef

POST_COLLECTION = "app.bsky.feed.post"
REPOST_COLLECTION = "app.bsky.feed.repost"
LIKE_COLLECTION = "app.bsky.feed.like"

_KIND_BY_COLLECTION = {
    POST_COLLECTION: EventKind.POST,
    REPOST_COLLECTION: EventKind.REPOST,
    LIKE_COLLECTION: EventKind.LIKE,
}


def decode_live_frame(raw: bytes) -> FirehoseEvent | CursorGap:
    try:
        header, body = cbor.decode_pair(raw)
    except DecodeError:
        raise
    except Exception as exc:  # struct errors etc.
        raise DecodeError(f"bad frame: {exc}") from exc
    if not isinstance(header, dict) or not isinstance(body, dict):
        raise DecodeError("frame header/body must be maps")
    if header.get("op") != 1:
        raise DecodeError(f"unexpected frame op {header.get('op')!r}")
    frame_type = header.get("t")
    if frame_type == "#info":
        return CursorGap(message=str(body.get("message", "")))
    if frame_type == "#commit":
        return _decode_commit(body)
    if frame_type in ("#identity", "#account"):
        return _other_event(body)
    raise DecodeError(f"unknown frame type {frame_type!r}")


def _require(body: dict, key: str, types: type | tuple) -> Any:
    value = body.get(key)
    if not isinstance(value, types):
        raise DecodeError(f"commit body missing/invalid {key!r}")
    return value


def _other_event(body: dict) -> FirehoseEvent:
    seq = _require(body, "seq", int)
    did = _require(body, "did", str) if "did" in body else _require(body, "repo", str)
    when = _parse_time(body.get("time"))
    return FirehoseEvent(cursor=seq, actor_id=did, kind=EventKind.OTHER, created_at=when)


def _parse_time(value: Any) -> int:
    if not isinstance(value, str):
        raise DecodeError("missing frame time")
    try:
        return timeutil.parse_rfc3339(value)
    except ValueError as exc:
        raise DecodeError(f"bad timestamp {value!r}") from exc


def _decode_commit(body: dict) -> FirehoseEvent:
    seq = _require(body, "seq", int)
    if isinstance(seq, bool):
        raise DecodeError("seq must be an integer")
    repo = _require(body, "repo", str)
    received_at = _parse_time(body.get("time"))
    ops = _require(body, "ops", list)
    blocks = body.get("blocks") or {}
    if not isinstance(blocks, dict):
        raise DecodeError("blocks must be a map")

    for op in ops:
        if not isinstance(op, dict) or op.get("action") != "create":
            continue
        path = op.get("path")
        if not isinstance(path, str) or "/" not in path:
            continue
        collection, rkey = path.split("/", 1)
        kind = _KIND_BY_COLLECTION.get(collection)
        if kind is None:
            continue
        record = blocks.get(op.get("cid"))
        if not isinstance(record, dict):
            raise DecodeError(f"create op {path!r} without record block")
        created_at = received_at
        if isinstance(record.get("createdAt"), str):
            try:
                created_at = timeutil.parse_rfc3339(record["createdAt"])
            except ValueError:
                pass
        if kind is EventKind.POST:
            return FirehoseEvent(
                cursor=seq,
                actor_id=repo,
                kind=kind,
                created_at=created_at,
                record=normalize_post_record(record),
                rkey=rkey,
            )
        subject = record.get("subject")
        if not isinstance(subject, dict):
            raise DecodeError(f"{kind.value} record without subject")
        uri, cid = subject.get("uri"), subject.get("cid")
        if not isinstance(uri, str) or not isinstance(cid, str):
            raise DecodeError(f"{kind.value} subject missing uri/cid")
        return FirehoseEvent(
            cursor=seq,
            actor_id=repo,
            kind=kind,
            created_at=created_at,
            subject_ref=StrongRef(target_uri=uri, target_cid=cid),
            rkey=rkey,
        )

    # commit without relevant create ops (deletes, other collections, ...)
    return FirehoseEvent(cursor=seq, actor_id=repo, kind=EventKind.OTHER, created_at=received_at)


def normalize_post_record(record: dict) -> dict:
    """Map an on-wire post record to the canonical record shape the parser
    consumes: {text, langs, facets: [{type, value}], embed_uris}."""
    facets: list[dict] = []
    for facet in record.get("facets") or []:
        if not isinstance(facet, dict):
            continue
        for feature in facet.get("features") or []:
            if not isinstance(feature, dict):
                continue
            ftype = feature.get("$type", "")
            if ftype.endswith("#link") and isinstance(feature.get("uri"), str):
                facets.append({"type": "link", "value": feature["uri"]})
            elif ftype.endswith("#tag") and isinstance(feature.get("tag"), str):
                facets.append({"type": "tag", "value": feature["tag"]})
    embed_uris: list[str] = []
    embed = record.get("embed")
    if isinstance(embed, dict):
        external = embed.get("external")
        if isinstance(external, dict) and isinstance(external.get("uri"), str):
            embed_uris.append(external["uri"])
    return {
        "text": record.get("text") if isinstance(record.get("text"), str) else "",
        "langs": [l for l in record.get("langs") or [] if isinstance(l, str)],
        "facets": facets,
        "embed_uris": embed_uris,
    }


# --- fixture encoding -------------------------------------------------------


def synth_cid(record: dict) -> str:
    digest = hashlib.sha256(json.dumps(record, sort_keys=True).encode()).hexdigest()
    return "bafy" + digest[:40]


def encode_frame(header: dict, body: dict) -> bytes:
    return cbor.encode(header) + cbor.encode(body)


def _commit_frame(seq: int, repo: str, time: str, path: str, record: dict) -> bytes:
    cid = synth_cid(record)
    body = {
        "seq": seq,
        "repo": repo,
        "time": time,
        "ops": [{"action": "create", "path": path, "cid": cid}],
        "blocks": {cid: record},
    }
    return encode_frame({"op": 1, "t": "#commit"}, body)


def build_post_frame(
    seq: int,
    repo: str,
    rkey: str,
    time: str,
    text: str = "",
    langs: list[str] | None = None,
    links: list[str] | None = None,
    tags: list[str] | None = None,
    embed_uri: str | None = None,
    created_at: str | None = None,
) -> bytes:
    record: dict[str, Any] = {
        "$type": POST_COLLECTION,
        "text": text,
        "createdAt": created_at or time,
    }
    if langs:
        record["langs"] = langs
    features = [
        {"$type": "app.bsky.richtext.facet#link", "uri": uri} for uri in links or []
    ] + [{"$type": "app.bsky.richtext.facet#tag", "tag": tag} for tag in tags or []]
    if features:
        record["facets"] = [{"features": [f]} for f in features]
    if embed_uri:
        record["embed"] = {
            "$type": "app.bsky.embed.external",
            "external": {"uri": embed_uri, "title": "", "description": ""},
        }
    return _commit_frame(seq, repo, time, f"{POST_COLLECTION}/{rkey}", record)


def build_engagement_frame(
    kind: str,
    seq: int,
    repo: str,
    rkey: str,
    time: str,
    subject_uri: str,
    subject_cid: str,
    created_at: str | None = None,
) -> bytes:
    collection = LIKE_COLLECTION if kind == "like" else REPOST_COLLECTION
    record = {
        "$type": collection,
        "subject": {"uri": subject_uri, "cid": subject_cid},
        "createdAt": created_at or time,
    }
    return _commit_frame(seq, repo, time, f"{collection}/{rkey}", record)


def build_info_frame(name: str = "OutdatedCursor", message: str = "") -> bytes:
    return encode_frame({"op": 1, "t": "#info"}, {"name": name, "message": message})


def build_identity_frame(seq: int, did: str, time: str) -> bytes:
    return encode_frame({"op": 1, "t": "#identity"}, {"seq": seq, "did": did, "time": time})
