"""Canonical byte encoding.

One wire format for everything that gets hashed, signed, or persisted:
integers are 8-byte big-endian unsigned, strings and byte fields are
length-prefixed with a 4-byte big-endian length, lists are prefixed with a
4-byte element count.  Field order is fixed per record type, so the same
logical value always produces the same bytes.
"""

import struct

from .errors import DecodeError

U32 = struct.Struct(">I")
U64 = struct.Struct(">Q")

MAX_FIELD_LEN = 16 * 1024 * 1024  # refuse absurd length prefixes when decoding


def encode_u64(value: int) -> bytes:
    if value < 0:
        raise ValueError("u64 fields are unsigned")
    return U64.pack(value)


def encode_bytes(value: bytes) -> bytes:
    return U32.pack(len(value)) + value


def encode_str(value: str) -> bytes:
    return encode_bytes(value.encode("utf-8"))


def encode_list(items, encode_item) -> bytes:
    out = [U32.pack(len(items))]
    out.extend(encode_item(item) for item in items)
    return b"".join(out)


class Reader:
    """Sequential decoder over one byte buffer, bounds-checked throughout."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.data):
            raise DecodeError(f"short read: need {n} bytes at offset {self.pos}")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return U32.unpack(self.take(4))[0]

    def u64(self) -> int:
        return U64.unpack(self.take(8))[0]

    def bytes_field(self) -> bytes:
        n = self.u32()
        if n > MAX_FIELD_LEN:
            raise DecodeError(f"field length {n} exceeds limit")
        return self.take(n)

    def str_field(self) -> str:
        raw = self.bytes_field()
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DecodeError("invalid utf-8 in string field") from exc

    def list_field(self, decode_item) -> list:
        n = self.u32()
        if n > MAX_FIELD_LEN:
            raise DecodeError(f"list count {n} exceeds limit")
        return [decode_item(self) for _ in range(n)]

    def expect_end(self):
        if self.pos != len(self.data):
            raise DecodeError(f"{len(self.data) - self.pos} trailing bytes")
