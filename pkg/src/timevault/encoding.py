"""Canonical deterministic byte encoding for call data and content bodies.

Three shapes cover everything the simulator serialises: unsigned integers
(32-byte big-endian), byte strings, and heterogeneous lists. The encoding is
length-prefixed and self-describing so decode(encode(x)) == x.
"""
from __future__ import annotations

from .errors import SerializationError

Value = int | bytes | list


def encode(value: Value) -> bytes:
    if isinstance(value, bool):
        raise SerializationError("booleans are not part of the wire format")
    if isinstance(value, int):
        if value < 0 or value >= 1 << 256:
            raise SerializationError(f"integer out of range: {value}")
        return b"I" + value.to_bytes(32, "big")
    if isinstance(value, bytes):
        if len(value) >= 1 << 32:
            raise SerializationError("byte string too long")
        return b"B" + len(value).to_bytes(4, "big") + value
    if isinstance(value, (list, tuple)):
        body = b"".join(encode(item) for item in value)
        return b"L" + len(value).to_bytes(4, "big") + body
    raise SerializationError(f"cannot encode {type(value).__name__}")


def _decode_at(data: bytes, pos: int) -> tuple[Value, int]:
    if pos >= len(data):
        raise SerializationError("truncated input")
    tag = data[pos:pos + 1]
    pos += 1
    if tag == b"I":
        if pos + 32 > len(data):
            raise SerializationError("truncated integer")
        return int.from_bytes(data[pos:pos + 32], "big"), pos + 32
    if tag == b"B":
        if pos + 4 > len(data):
            raise SerializationError("truncated length")
        n = int.from_bytes(data[pos:pos + 4], "big")
        pos += 4
        if pos + n > len(data):
            raise SerializationError("truncated byte string")
        return data[pos:pos + n], pos + n
    if tag == b"L":
        if pos + 4 > len(data):
            raise SerializationError("truncated count")
        count = int.from_bytes(data[pos:pos + 4], "big")
        pos += 4
        items = []
        for _ in range(count):
            item, pos = _decode_at(data, pos)
            items.append(item)
        return items, pos
    raise SerializationError(f"unknown tag {tag!r}")


def decode(data: bytes) -> Value:
    value, pos = _decode_at(data, 0)
    if pos != len(data):
        raise SerializationError("trailing bytes after value")
    return value
