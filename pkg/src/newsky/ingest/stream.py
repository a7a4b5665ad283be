"""Stream driver: one reader thread owns the transport, decodes frames and
hands events over a bounded queue. Guarantees exactly-once, strictly
ascending cursor delivery across any reconnect schedule."""

from __future__ import annotations

import logging
import queue
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Protocol, Union

from .events import CursorGap, DecodeError, FirehoseEvent
from .live import ConnectFailed, LiveTransport, TransportDisconnected
from .replay import ReplayTransport

log = logging.getLogger(__name__)

DEFAULT_QUEUE_SIZE = 10_000


@dataclass(frozen=True)
class ReplaySource:
    path: Union[str, Path]
    resume_cursor: Optional[int] = None


@dataclass(frozen=True)
class LiveSource:
    endpoint: str
    resume_cursor: Optional[int] = None


StreamSource = Union[ReplaySource, LiveSource]


@dataclass
class IngestMetrics:
    events_delivered: int = 0
    decode_errors: int = 0
    cursor_gaps: int = 0
    reconnects: int = 0
    duplicates_dropped: int = 0
    last_cursor: Optional[int] = None


@dataclass
class ReconnectPolicy:
    base: float = 1.0
    cap: float = 60.0
    rng: random.Random = field(default_factory=random.Random)

    def delay(self, attempt: int) -> float:
        raw = min(self.cap, self.base * (2 ** min(attempt, 16)))
        return raw * self.rng.uniform(0.5, 1.0)


class Transport(Protocol):
    endless: bool

    def frames(self, resume_cursor: Optional[int]) -> Iterator:
        ...

    def decode(self, raw) -> Union[FirehoseEvent, CursorGap]:
        ...


class EventStream:
    """Iterator over delivered events, fed by the reader thread."""

    _DONE = object()

    def __init__(self, transport: Transport, resume_cursor: Optional[int],
                 queue_size: int, policy: ReconnectPolicy):
        self.metrics = IngestMetrics()
        self._queue: queue.Queue = queue.Queue(maxsize=queue_size)
        self._stop = threading.Event()
        self._transport = transport
        self._policy = policy
        self._last_cursor = resume_cursor
        self._failure: Optional[BaseException] = None
        self._thread = threading.Thread(target=self._run, name="firehose-reader", daemon=True)
        self._thread.start()

    # reader side -------------------------------------------------------

    def _run(self) -> None:
        attempt = 0
        connected_once = False
        try:
            while not self._stop.is_set():
                try:
                    for raw in self._transport.frames(self._last_cursor):
                        connected_once = True
                        attempt = 0
                        self._handle_frame(raw)
                        if self._stop.is_set():
                            return
                except ConnectFailed:
                    # only the very first open is fatal; later attempts back off
                    if not connected_once:
                        raise
                    self.metrics.reconnects += 1
                    delay = self._policy.delay(attempt)
                    attempt += 1
                    if self._sleep(delay):
                        return
                    continue
                except TransportDisconnected as exc:
                    self.metrics.reconnects += 1
                    delay = self._policy.delay(attempt)
                    attempt += 1
                    log.warning("transport dropped (%s); reconnecting in %.1fs", exc, delay)
                    if self._sleep(delay):
                        return
                    continue
                if not self._transport.endless:
                    return
                # endless transport closed cleanly: treat as disconnect
                self.metrics.reconnects += 1
                if self._sleep(self._policy.delay(attempt)):
                    return
                attempt += 1
        except BaseException as exc:  # surfaced to the consumer
            self._failure = exc
        finally:
            self._put(self._DONE)

    def _handle_frame(self, raw) -> None:
        try:
            decoded = self._transport.decode(raw)
        except DecodeError as exc:
            self.metrics.decode_errors += 1
            log.debug("skipping undecodable frame: %s", exc)
            return
        if isinstance(decoded, CursorGap):
            self.metrics.cursor_gaps += 1
            log.warning("server signalled history loss: %s", decoded.message)
            return
        if self._last_cursor is not None and decoded.cursor <= self._last_cursor:
            self.metrics.duplicates_dropped += 1
            return
        self._last_cursor = decoded.cursor
        self._put(decoded)

    def _put(self, item) -> None:
        # bounded queue: blocks (pausing the transport) instead of dropping
        while True:
            try:
                self._queue.put(item, timeout=0.2)
                return
            except queue.Full:
                if self._stop.is_set():
                    return

    def _sleep(self, seconds: float) -> bool:
        return self._stop.wait(seconds)

    # consumer side ------------------------------------------------------

    def __iter__(self) -> Iterator[FirehoseEvent]:
        return self

    def __next__(self) -> FirehoseEvent:
        while True:
            try:
                # timed get keeps the consumer responsive to close() and,
                # in a main thread, to interrupts
                item = self._queue.get(timeout=0.5)
            except queue.Empty:
                if self._stop.is_set():
                    raise StopIteration from None
                continue
            if item is self._DONE:
                if self._failure is not None:
                    raise self._failure
                raise StopIteration
            self.metrics.events_delivered += 1
            self.metrics.last_cursor = item.cursor
            return item

    def close(self) -> None:
        self._stop.set()
        try:
            while True:
                self._queue.get_nowait()
        except queue.Empty:
            pass
        self._thread.join(timeout=5)

    def __enter__(self) -> "EventStream":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    @property
    def resumable_cursor(self) -> Optional[int]:
        """Cursor of the last event handed to the consumer; safe resume point."""
        return self.metrics.last_cursor


def transport_for(source: StreamSource) -> Transport:
    if isinstance(source, ReplaySource):
        path = Path(source.path)
        if not path.is_file():
            raise ConnectFailed(f"replay file not readable: {path}")
        return ReplayTransport(path)
    return LiveTransport(source.endpoint)


def connect(source: StreamSource, *, queue_size: int = DEFAULT_QUEUE_SIZE,
            policy: Optional[ReconnectPolicy] = None,
            transport: Optional[Transport] = None) -> EventStream:
    """Open a source and return the event stream.

    Events arrive in strictly ascending cursor order, starting strictly
    after the source's resume cursor; a cursor is never delivered twice,
    across any number of reconnects.
    """
    if transport is None:
        transport = transport_for(source)
    return EventStream(
        transport=transport,
        resume_cursor=source.resume_cursor,
        queue_size=queue_size,
        policy=policy or ReconnectPolicy(),
    )
