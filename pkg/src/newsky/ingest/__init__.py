from .events import DecodeError, EventKind, FirehoseEvent, StrongRef
from .stream import ConnectFailed, IngestMetrics, LiveSource, ReplaySource, connect

__all__ = [
    "ConnectFailed",
    "DecodeError",
    "EventKind",
    "FirehoseEvent",
    "IngestMetrics",
    "LiveSource",
    "ReplaySource",
    "StrongRef",
    "connect",
]
