"""Replay line decoding: field validation, unknown-field tolerance, and
the documented error cases."""

import json

import pytest

from conftest import engagement_line, other_line, post_line
from newsky.ingest.events import DecodeError, EventKind
from newsky.ingest.replay import decode_replay_line


def test_post_line_decodes():
    line = post_line(5, actor="did:plc:a", created_at="2024-06-01T00:00:00Z",
                     links=["https://x.test/1"], tags=["go"], text="hi #go")
    event = decode_replay_line(line)
    assert event.kind is EventKind.POST
    assert event.cursor == 5
    assert event.actor_id == "did:plc:a"
    assert event.created_at == 1717200000
    assert event.record["facets"][0] == {"type": "link", "value": "https://x.test/1"}


def test_engagement_lines_decode():
    for kind, enum in (("repost", EventKind.REPOST), ("like", EventKind.LIKE)):
        event = decode_replay_line(
            engagement_line(kind, 9, "at://did:plc:a/app.bsky.feed.post/5", cid="bafyz"))
        assert event.kind is enum
        assert event.subject_ref.target_uri == "at://did:plc:a/app.bsky.feed.post/5"
        assert event.subject_ref.target_cid == "bafyz"


def test_unknown_kind_decodes_as_other():
    raw = json.dumps({"cursor": 1, "kind": "handle-change", "actor": "did:plc:a",
                      "created_at": "2024-06-01T00:00:00Z"})
    assert decode_replay_line(raw).kind is EventKind.OTHER
    assert decode_replay_line(other_line(2)).kind is EventKind.OTHER


def test_unknown_fields_ignored():
    obj = json.loads(post_line(1))
    obj["extra"] = {"nested": True}
    obj["record"]["surprise"] = 1
    event = decode_replay_line(json.dumps(obj))
    assert event.cursor == 1


def test_bytes_input_accepted():
    event = decode_replay_line(post_line(3).encode("utf-8"))
    assert event.cursor == 3


@pytest.mark.parametrize("raw", [
    "not json at all",
    "[1, 2, 3]",
    '{"kind": "post"}',
    '{"cursor": "7", "kind": "post", "actor": "a", "created_at": "2024-06-01T00:00:00Z"}',
    '{"cursor": true, "kind": "post", "actor": "a", "created_at": "2024-06-01T00:00:00Z"}',
    '{"cursor": 1, "kind": "post", "actor": "", "created_at": "2024-06-01T00:00:00Z"}',
    '{"cursor": 1, "kind": "post", "actor": "a", "created_at": "June first"}',
    '{"cursor": 1, "kind": "post", "actor": "a", "created_at": "2024-06-01T00:00:00Z"}',
    '{"cursor": 1, "kind": "repost", "actor": "a", "created_at": "2024-06-01T00:00:00Z"}',
    '{"cursor": 1, "kind": "like", "actor": "a", "created_at": "2024-06-01T00:00:00Z",'
    ' "subject": {"uri": "at://x/y/z"}}',
    '{"cursor": 1, "kind": "like", "actor": "a", "created_at": "2024-06-01T00:00:00Z",'
    ' "subject": {"uri": "http://not-at-uri", "cid": "c"}}',
])
def test_invalid_lines_raise_decode_error(raw):
    with pytest.raises(DecodeError):
        decode_replay_line(raw)


def test_strong_ref_uri_shape_enforced():
    # an at:// uri must be authority/collection/rkey, all non-empty
    for uri in ("at://onlyauthority", "at://a/b", "at://a//c", "at://a/b/c/d"):
        raw = engagement_line("like", 1, uri)
        with pytest.raises(DecodeError):
            decode_replay_line(raw)
