"""Minimal CBOR codec for the live-frame envelope.

Supports the subset the wire format uses: definite-length ints, byte/text
strings, arrays, text-keyed maps, false/true/null and float64. Indefinite
lengths and tags are rejected; decoding validates exact byte consumption.
"""

from __future__ import annotations

import struct
from typing import Any

from .events import DecodeError


def encode(value: Any) -> bytes:
    out = bytearray()
    _encode_into(out, value)
    return bytes(out)


def _head(out: bytearray, major: int, arg: int) -> None:
    if arg < 24:
        out.append((major << 5) | arg)
    elif arg < 0x100:
        out.append((major << 5) | 24)
        out.append(arg)
    elif arg < 0x10000:
        out.append((major << 5) | 25)
        out += struct.pack(">H", arg)
    elif arg < 0x100000000:
        out.append((major << 5) | 26)
        out += struct.pack(">I", arg)
    else:
        out.append((major << 5) | 27)
        out += struct.pack(">Q", arg)


def _encode_into(out: bytearray, value: Any) -> None:
    if value is False:
        out.append(0xF4)
    elif value is True:
        out.append(0xF5)
    elif value is None:
        out.append(0xF6)
    elif isinstance(value, int):
        if value >= 0:
            _head(out, 0, value)
        else:
            _head(out, 1, -1 - value)
    elif isinstance(value, float):
        out.append(0xFB)
        out += struct.pack(">d", value)
    elif isinstance(value, bytes):
        _head(out, 2, len(value))
        out += value
    elif isinstance(value, str):
        encoded = value.encode("utf-8")
        _head(out, 3, len(encoded))
        out += encoded
    elif isinstance(value, (list, tuple)):
        _head(out, 4, len(value))
        for item in value:
            _encode_into(out, item)
    elif isinstance(value, dict):
        _head(out, 5, len(value))
        for key, item in value.items():
            if not isinstance(key, str):
                raise TypeError(f"map keys must be text, got {type(key).__name__}")
            _encode_into(out, key)
            _encode_into(out, item)
    else:
        raise TypeError(f"cannot encode {type(value).__name__}")


class _Reader:
    def __init__(self, data: bytes, offset: int = 0):
        self.data = data
        self.pos = offset

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise DecodeError("truncated frame")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def byte(self) -> int:
        return self.take(1)[0]


def _read_arg(reader: _Reader, info: int) -> int:
    if info < 24:
        return info
    if info == 24:
        return reader.byte()
    if info == 25:
        return struct.unpack(">H", reader.take(2))[0]
    if info == 26:
        return struct.unpack(">I", reader.take(4))[0]
    if info == 27:
        return struct.unpack(">Q", reader.take(8))[0]
    raise DecodeError(f"unsupported length encoding {info}")


def _decode_item(reader: _Reader, depth: int = 0) -> Any:
    if depth > 32:
        raise DecodeError("nesting too deep")
    initial = reader.byte()
    major, info = initial >> 5, initial & 0x1F
    if major == 0:
        return _read_arg(reader, info)
    if major == 1:
        return -1 - _read_arg(reader, info)
    if major == 2:
        return reader.take(_read_arg(reader, info))
    if major == 3:
        raw = reader.take(_read_arg(reader, info))
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DecodeError("invalid utf-8 in text string") from exc
    if major == 4:
        return [_decode_item(reader, depth + 1) for _ in range(_read_arg(reader, info))]
    if major == 5:
        result: dict[str, Any] = {}
        for _ in range(_read_arg(reader, info)):
            key = _decode_item(reader, depth + 1)
            if not isinstance(key, str):
                raise DecodeError("non-text map key")
            result[key] = _decode_item(reader, depth + 1)
        return result
    if major == 7:
        if info == 20:
            return False
        if info == 21:
            return True
        if info == 22:
            return None
        if info == 27:
            return struct.unpack(">d", reader.take(8))[0]
        raise DecodeError(f"unsupported simple value {info}")
    raise DecodeError(f"unsupported major type {major}")


def decode(data: bytes) -> Any:
    """Decode a single CBOR item occupying the whole buffer."""
    reader = _Reader(data)
    value = _decode_item(reader)
    if reader.pos != len(data):
        raise DecodeError("trailing bytes after item")
    return value


def decode_pair(data: bytes) -> tuple[Any, Any]:
    """Decode two back-to-back CBOR items (frame header + body)."""
    reader = _Reader(data)
    first = _decode_item(reader)
    second = _decode_item(reader)
    if reader.pos != len(data):
        raise DecodeError("trailing bytes after frame body")
    return first, second
