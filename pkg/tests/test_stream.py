"""Stream driver: exactly-once delivery across reconnect schedules,
strictly ascending cursors, decode-error robustness, backoff bounds and
bounded-queue behavior."""

import random
import threading
import time

import pytest

from conftest import engagement_line, other_line, post_line, write_replay
from newsky.ingest.events import CursorGap, DecodeError, EventKind, FirehoseEvent
from newsky.ingest.live import ConnectFailed, TransportDisconnected
from newsky.ingest.stream import (
    EventStream,
    LiveSource,
    ReconnectPolicy,
    ReplaySource,
    connect,
    transport_for,
)

FAST = ReconnectPolicy(base=0.0001, cap=0.001, rng=random.Random(0))


def make_event(cursor: int) -> FirehoseEvent:
    return FirehoseEvent(cursor=cursor, actor_id="did:plc:x",
                         kind=EventKind.OTHER, created_at=1717200000 + cursor)


class ScriptedTransport:
    """Serves scripted sessions of frames; a session may end with an
    exception. Ignores resume_cursor on purpose: re-serving everything is
    the worst case the driver's dedup must absorb."""

    def __init__(self, sessions, endless=False, fail_connects=0):
        self.sessions = list(sessions)
        self.endless = endless
        self.fail_connects = fail_connects
        self.connects = 0

    def frames(self, resume_cursor):
        self.connects += 1
        if self.fail_connects >= self.connects:
            raise ConnectFailed("scripted connect failure")
        if not self.sessions:
            if self.endless:
                raise TransportDisconnected("out of script")
            return
        frames, failure = self.sessions.pop(0)
        yield from frames
        if failure is not None:
            raise failure

    def decode(self, raw):
        if raw == "bad":
            raise DecodeError("scripted bad frame")
        if raw == "gap":
            return CursorGap("scripted gap")
        return make_event(raw)


def drain(stream):
    with stream:
        return [event.cursor for event in stream]


def test_replay_file_delivers_all_events(tmp_path):
    path = write_replay(tmp_path / "r.jsonl", [
        post_line(1, links=["https://a.test/1"]),
        engagement_line("like", 2, "at://did:plc:a/app.bsky.feed.post/1"),
        other_line(3),
        post_line(5),
    ])
    with connect(ReplaySource(path)) as stream:
        cursors = [event.cursor for event in stream]
        assert cursors == [1, 2, 3, 5]
        assert stream.metrics.events_delivered == 4
        assert stream.metrics.decode_errors == 0
        assert stream.resumable_cursor == 5


def test_resume_cursor_filters_strictly_after(tmp_path):
    path = write_replay(tmp_path / "r.jsonl", [other_line(c) for c in (1, 2, 3, 4, 5)])
    with connect(ReplaySource(path, resume_cursor=3)) as stream:
        assert [event.cursor for event in stream] == [4, 5]
    assert connect(ReplaySource(path, resume_cursor=5)).metrics.events_delivered == 0


def test_corrupted_line_counted_and_skipped(tmp_path):
    lines = [other_line(c) for c in (1, 2, 3, 4, 5)]
    lines[2] = '{"cursor": oops'
    path = write_replay(tmp_path / "r.jsonl", lines)
    with connect(ReplaySource(path)) as stream:
        cursors = [event.cursor for event in stream]
        assert cursors == [1, 2, 4, 5]
        assert stream.metrics.events_delivered == 4
        assert stream.metrics.decode_errors == 1


def test_missing_replay_file_is_connect_failed(tmp_path):
    with pytest.raises(ConnectFailed):
        transport_for(ReplaySource(tmp_path / "nope.jsonl"))


def test_live_source_gets_live_transport():
    transport = transport_for(LiveSource("wss://relay.test/xrpc/sub"))
    assert transport.endless is True


def test_duplicate_cursors_dropped():
    transport = ScriptedTransport([([1, 2, 3, 2, 3, 4], None)])
    stream = EventStream(transport, resume_cursor=None, queue_size=100, policy=FAST)
    assert drain(stream) == [1, 2, 3, 4]
    assert stream.metrics.duplicates_dropped == 2


def test_cursor_gap_counted_stream_continues():
    transport = ScriptedTransport([([1, "gap", 2], None)])
    stream = EventStream(transport, resume_cursor=None, queue_size=100, policy=FAST)
    assert drain(stream) == [1, 2]
    assert stream.metrics.cursor_gaps == 1


def test_reconnect_resumes_exactly_once():
    # each session re-serves from scratch; dedup must absorb the overlap
    transport = ScriptedTransport([
        ([1, 2, 3], TransportDisconnected("drop 1")),
        ([1, 2, 3, 4, 5], TransportDisconnected("drop 2")),
        ([4, 5, 6, 7], None),
    ])
    stream = EventStream(transport, resume_cursor=None, queue_size=100, policy=FAST)
    assert drain(stream) == [1, 2, 3, 4, 5, 6, 7]
    assert stream.metrics.reconnects == 2
    assert stream.metrics.duplicates_dropped == 5


def test_first_connect_failure_surfaces():
    transport = ScriptedTransport([([1], None)], fail_connects=1)
    stream = EventStream(transport, resume_cursor=None, queue_size=10, policy=FAST)
    with pytest.raises(ConnectFailed):
        list(stream)
    stream.close()


def test_connect_failure_after_first_session_retries():
    transport = ScriptedTransport([
        ([1, 2], TransportDisconnected("drop")),
        # next connect attempt fails once (scripted via empty session + raise)
        ([], ConnectFailed("flaky open")),
        ([3, 4], None),
    ])
    stream = EventStream(transport, resume_cursor=None, queue_size=10, policy=FAST)
    assert drain(stream) == [1, 2, 3, 4]
    assert stream.metrics.reconnects == 2


def test_endless_transport_clean_close_reconnects():
    transport = ScriptedTransport([([1, 2], None), ([3], None)], endless=True)
    stream = EventStream(transport, resume_cursor=None, queue_size=10, policy=FAST)
    got = []
    with stream:
        for event in stream:
            got.append(event.cursor)
            if event.cursor == 3:
                break
    assert got == [1, 2, 3]
    assert stream.metrics.reconnects >= 1


def test_exactly_once_over_random_schedules():
    # any disconnect/overlap schedule must deliver 1..n exactly once, ascending
    rng = random.Random(1234)
    for trial in range(30):
        n = rng.randrange(1, 60)
        cursors = list(range(1, n + 1))
        sessions = []
        served = 0
        while served < n:
            end = rng.randrange(served, n + 1)
            start = rng.randrange(0, served + 1)  # re-serve overlap
            if end == served and rng.random() < 0.5:
                sessions.append(([], TransportDisconnected("noop session")))
                continue
            sessions.append((cursors[start:end], TransportDisconnected("drop")))
            served = max(served, end)
        sessions.append((cursors, None))  # final full re-serve, clean EOF
        transport = ScriptedTransport(sessions)
        policy = ReconnectPolicy(base=0.0001, cap=0.001, rng=random.Random(trial))
        stream = EventStream(transport, resume_cursor=None, queue_size=1000, policy=policy)
        assert drain(stream) == cursors, f"trial {trial}"


def test_backoff_delay_bounds():
    policy = ReconnectPolicy(base=1.0, cap=60.0, rng=random.Random(99))
    for attempt in range(25):
        raw = min(60.0, 1.0 * (2 ** min(attempt, 16)))
        for _ in range(50):
            delay = policy.delay(attempt)
            assert raw * 0.5 <= delay <= raw
    # cap reached by attempt 6: 2^6 = 64 > 60
    assert all(policy.delay(20) <= 60.0 for _ in range(100))


def test_backoff_is_jittered():
    policy = ReconnectPolicy(base=1.0, cap=60.0, rng=random.Random(7))
    delays = {policy.delay(0) for _ in range(20)}
    assert len(delays) > 1


def test_bounded_queue_blocks_instead_of_dropping():
    n = 500
    transport = ScriptedTransport([(list(range(1, n + 1)), None)])
    stream = EventStream(transport, resume_cursor=None, queue_size=8, policy=FAST)
    time.sleep(0.2)  # reader should be parked on the full queue, not dropping
    assert stream._queue.qsize() <= 8
    assert drain(stream) == list(range(1, n + 1))


def test_close_unblocks_parked_reader():
    transport = ScriptedTransport([(list(range(1, 1000)), None)])
    stream = EventStream(transport, resume_cursor=None, queue_size=2, policy=FAST)
    time.sleep(0.1)
    stream.close()
    assert not stream._thread.is_alive()


def test_close_wakes_blocked_consumer():
    transport = ScriptedTransport([], endless=True)  # nothing to serve
    stream = EventStream(transport, resume_cursor=None, queue_size=4,
                         policy=ReconnectPolicy(base=0.01, cap=0.02,
                                                rng=random.Random(0)))
    result = []

    def consume():
        result.extend(event.cursor for event in stream)

    thread = threading.Thread(target=consume)
    thread.start()
    time.sleep(0.2)
    stream.close()
    thread.join(timeout=5)
    assert not thread.is_alive()
    assert result == []
