"""Canonical tag-length-value serialization.

Every signed or encrypted structure is an ordered sequence of fields, each
framed as a 1-byte tag, a 4-byte big-endian length and the payload bytes.
"""
import struct
from enum import IntEnum
from typing import Iterable, List, Sequence, Tuple

from .exceptions.crypto_exceptions import MalformedEncoding

_HEADER = struct.Struct(">BI")


class Tag(IntEnum):
    """Field tags used across all canonical records."""

    # primitives / composites
    PARTY = 0x01
    PUBLIC_KEY = 0x02
    SIGNATURE = 0x03
    IDENTITY = 0x04
    KIND = 0x05
    PAYLOAD = 0x06
    SUBMITTER = 0x07
    HANDLE = 0x08
    INDEX = 0x09
    FLAG = 0x0A
    KEY = 0x0B
    PURPOSE = 0x0C
    VERDICT = 0x0D

    # block header
    PREV_HASH = 0x10
    MERKLE_ROOT = 0x11
    HEIGHT = 0x12
    TIMESTAMP = 0x13
    SEQUENCER = 0x14

    # onion layers
    DIRECTIVE_FROM = 0x20
    DIRECTIVE_TO = 0x21
    INNER_LAYER = 0x22
    INNER_MESSAGE = 0x23
    MESSAGE_PAYLOAD = 0x24

    # evidence
    CONTENT = 0x30
    PACKET = 0x31
    PREV_EVIDENCE = 0x32
    INNER_SIGNER = 0x33
    INNER_SIGNATURE = 0x34
    OUTER_SIGNER = 0x35
    OUTER_SIGNATURE = 0x36
    CIPHERTEXT = 0x37
    PREV_HANDLE = 0x38
    REBUTTAL_HANDLE = 0x39
    REBUTTAL_KEY = 0x3A


def encode_fields(fields: Iterable[Tuple[int, bytes]]) -> bytes:
    """Serialize an ordered list of (tag, payload) fields.

    Args:
        fields (Iterable[Tuple[int, bytes]]): Fields in canonical order

    Returns:
        bytes: Concatenated framed fields
    """
    parts: List[bytes] = []
    for tag, payload in fields:
        parts.append(_HEADER.pack(int(tag), len(payload)))
        parts.append(payload)
    return b"".join(parts)


def decode_fields(data: bytes) -> List[Tuple[int, bytes]]:
    """Parse framed fields back into (tag, payload) pairs.

    Args:
        data (bytes): Canonical bytes

    Returns:
        List[Tuple[int, bytes]]: Fields in encoded order

    Raises:
        MalformedEncoding: On truncated headers or payloads
    """
    fields: List[Tuple[int, bytes]] = []
    view = memoryview(data)
    offset = 0
    while offset < len(view):
        if len(view) - offset < _HEADER.size:
            raise MalformedEncoding(f"Truncated field header at offset {offset}")
        tag, length = _HEADER.unpack_from(view, offset)
        offset += _HEADER.size
        if len(view) - offset < length:
            raise MalformedEncoding(f"Field 0x{tag:02x} declares {length} bytes, {len(view) - offset} left")
        fields.append((tag, bytes(view[offset:offset + length])))
        offset += length
    return fields


def expect_fields(data: bytes, tags: Sequence[int]) -> List[bytes]:
    """Decode a record whose tags must match exactly and in order.

    Args:
        data (bytes): Canonical bytes
        tags (Sequence[int]): Expected tags

    Returns:
        List[bytes]: Payloads in tag order

    Raises:
        MalformedEncoding: If the tag sequence differs
    """
    fields = decode_fields(data)
    found = [tag for tag, _ in fields]
    if found != [int(t) for t in tags]:
        raise MalformedEncoding(f"Unexpected field layout {[hex(t) for t in found]}")
    return [payload for _, payload in fields]


def encode_int(value: int, width: int = 8) -> bytes:
    """Encode a non-negative integer as fixed-width big-endian bytes."""
    return value.to_bytes(width, "big", signed=False)


def decode_int(data: bytes) -> int:
    return int.from_bytes(data, "big", signed=False)


def encode_text(value: str) -> bytes:
    return value.encode("utf-8")


def decode_text(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedEncoding(f"Invalid UTF-8 field: {exc}") from exc
