"""Definite-length BER TLV decoding, just enough for the GOOSE APDU."""

from __future__ import annotations

from dataclasses import dataclass

UNIVERSAL, APPLICATION, CONTEXT, PRIVATE = range(4)
MAX_LENGTH_OCTETS = 4


class BerError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class BerTlv:
    """One decoded element.

    ``tag`` is the identifier octets as an integer (``0x80``, ``0x61``,
    ``0x9f21`` ...); ``value`` covers exactly ``length`` content bytes.
    """

    tag: int
    tag_class: int
    constructed: bool
    number: int
    value: bytes
    offset: int
    header_len: int

    @property
    def length(self) -> int:
        return len(self.value)

    @property
    def end(self) -> int:
        return self.offset + self.header_len + len(self.value)


def _read_tlv(buf: bytes, pos: int, limit: int) -> BerTlv:
    start = pos
    if pos >= limit:
        raise BerError("missing identifier octet")
    first = buf[pos]
    pos += 1
    tag = first
    number = first & 0x1F
    if number == 0x1F:
        number = 0
        while True:
            if pos >= limit:
                raise BerError("truncated high tag number")
            b = buf[pos]
            pos += 1
            tag = (tag << 8) | b
            number = (number << 7) | (b & 0x7F)
            if not b & 0x80:
                break
            if pos - start > 5:
                raise BerError("tag number too large")
    if pos >= limit:
        raise BerError("missing length octet")
    lb = buf[pos]
    pos += 1
    if lb < 0x80:
        length = lb
    elif lb == 0x80:
        raise BerError("indefinite length form")
    else:
        count = lb & 0x7F
        if count > MAX_LENGTH_OCTETS:
            raise BerError("length field too wide")
        if pos + count > limit:
            raise BerError("truncated length field")
        length = int.from_bytes(buf[pos : pos + count], "big")
        pos += count
    if pos + length > limit:
        raise BerError(f"length {length} overruns input")
    return BerTlv(tag, first >> 6, bool(first & 0x20), number, bytes(buf[pos : pos + length]), start, pos - start)


def ber_parse(payload: bytes | memoryview) -> list[BerTlv]:
    """Decode a run of top-level TLVs spanning all of ``payload``.

    >>> [(t.tag, t.value) for t in ber_parse(bytes([0x80, 0x01, 0x05]))]
    [(128, b'\\x05')]
    """
    buf = bytes(payload)
    if not buf:
        raise BerError("empty input")
    out = []
    pos = 0
    while pos < len(buf):
        tlv = _read_tlv(buf, pos, len(buf))
        out.append(tlv)
        pos = tlv.end
    return out


def ber_first(payload: bytes | memoryview) -> BerTlv:
    """Decode one TLV at the start of ``payload``; trailing bytes are allowed."""
    buf = bytes(payload)
    return _read_tlv(buf, 0, len(buf))


def decode_integer(value: bytes) -> int:
    if not value:
        raise BerError("empty INTEGER")
    return int.from_bytes(value, "big", signed=True)


def decode_unsigned(value: bytes) -> int:
    n = decode_integer(value)
    if n < 0:
        raise BerError("negative value for unsigned field")
    return n


def decode_boolean(value: bytes) -> bool:
    if len(value) != 1:
        raise BerError("BOOLEAN must be one octet")
    return value[0] != 0


def decode_string(value: bytes) -> str:
    try:
        return value.decode("ascii")
    except UnicodeDecodeError:
        raise BerError("non-ASCII VisibleString") from None
