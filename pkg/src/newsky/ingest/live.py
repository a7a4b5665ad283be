"""Live websocket transport for the firehose endpoint."""

from __future__ import annotations

from typing import Iterator
from urllib.parse import urlencode, urlsplit, urlunsplit

from websockets.exceptions import ConnectionClosed, InvalidHandshake
from websockets.sync.client import connect as ws_connect

from .events import CursorGap, DecodeError, FirehoseEvent
from .wire import decode_live_frame


class TransportDisconnected(Exception):
    """Transport dropped mid-stream; the driver reconnects with backoff."""


class ConnectFailed(Exception):
    """Transport could not be opened at all."""


class LiveTransport:
    endless = True

    def __init__(self, endpoint: str, connect_timeout: float = 10.0):
        self.endpoint = endpoint
        self.connect_timeout = connect_timeout

    def _url(self, resume_cursor: int | None) -> str:
        if resume_cursor is None:
            return self.endpoint
        scheme, netloc, path, query, fragment = urlsplit(self.endpoint)
        extra = urlencode({"cursor": resume_cursor})
        query = f"{query}&{extra}" if query else extra
        return urlunsplit((scheme, netloc, path, query, fragment))

    def frames(self, resume_cursor: int | None) -> Iterator[bytes]:
        try:
            conn = ws_connect(self._url(resume_cursor), open_timeout=self.connect_timeout)
        except (OSError, InvalidHandshake, TimeoutError) as exc:
            raise ConnectFailed(f"cannot reach {self.endpoint}: {exc}") from exc
        try:
            while True:
                try:
                    message = conn.recv()
                except ConnectionClosed as exc:
                    raise TransportDisconnected(str(exc)) from exc
                if isinstance(message, str):
                    message = message.encode("utf-8")
                yield message
        finally:
            conn.close()

    def decode(self, raw: bytes) -> FirehoseEvent | CursorGap:
        if not isinstance(raw, (bytes, bytearray)):
            raise DecodeError("live frames must be binary")
        return decode_live_frame(bytes(raw))
