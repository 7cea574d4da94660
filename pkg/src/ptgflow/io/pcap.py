"""Classic libpcap capture files: microsecond and nanosecond variants in
either byte order. pcapng is not supported."""

from __future__ import annotations

import struct
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO

MAGIC_US = 0xA1B2C3D4
MAGIC_NS = 0xA1B23C4D
LINKTYPE_NULL = 0
LINKTYPE_ETHERNET = 1
LINKTYPE_PPP = 9
LINKTYPE_RAW = 101
LINKTYPE_LINUX_SLL = 113
DEFAULT_SNAPLEN = 262144

_GLOBAL = "IHHiIII"
_RECORD = "IIII"


class PcapError(Exception):
    pass


class BadMagic(PcapError):
    pass


@dataclass(frozen=True, slots=True)
class CaptureRecord:
    ts: float
    link_type: int
    data: bytes
    orig_len: int

    @property
    def caplen(self) -> int:
        return len(self.data)


@dataclass(frozen=True, slots=True)
class TruncatedRecord:
    """Yielded in place of a record the file ends in the middle of, or whose
    header is inconsistent. ``offset`` is the record header position."""

    offset: int
    reason: str


def _sniff(head: bytes) -> tuple[str, bool]:
    if len(head) < 4:
        raise BadMagic("file too short for a pcap header")
    for order in ("<", ">"):
        magic = struct.unpack(order + "I", head[:4])[0]
        if magic == MAGIC_US:
            return order, False
        if magic == MAGIC_NS:
            return order, True
    raise BadMagic(f"unrecognised magic {head[:4].hex()}")


class PcapReader:
    """Iterates :class:`CaptureRecord` (or :class:`TruncatedRecord`) in file order.

    The global header is checked on construction, so a bad file fails before
    iteration starts.
    """

    def __init__(self, source: str | Path | BinaryIO):
        if isinstance(source, (str, Path)):
            self._fh: BinaryIO = open(source, "rb")
            self._owned = True
        else:
            self._fh = source
            self._owned = False
        head = self._fh.read(24)
        try:
            self.byte_order, self.nanosecond = _sniff(head)
            if len(head) < 24:
                raise BadMagic("truncated global header")
        except BadMagic:
            self.close()
            raise
        _, self.version_major, self.version_minor, _, _, self.snaplen, self.link_type = struct.unpack(
            self.byte_order + _GLOBAL, head
        )
        self._rec = struct.Struct(self.byte_order + _RECORD)
        self._scale = 1e-9 if self.nanosecond else 1e-6

    def __iter__(self) -> Iterator[CaptureRecord | TruncatedRecord]:
        fh, rec, scale, link = self._fh, self._rec, self._scale, self.link_type
        offset = 24
        try:
            while True:
                hdr = fh.read(16)
                if not hdr:
                    return
                if len(hdr) < 16:
                    yield TruncatedRecord(offset, "truncated record header")
                    return
                sec, frac, incl, orig = rec.unpack(hdr)
                data = fh.read(incl)
                if len(data) < incl:
                    yield TruncatedRecord(offset, f"record claims {incl} bytes, {len(data)} remain")
                    return
                offset += 16 + incl
                if incl > orig:
                    yield TruncatedRecord(offset - 16 - incl, "captured length exceeds original length")
                    continue
                yield CaptureRecord(sec + frac * scale, link, data, orig)
        finally:
            self.close()

    def close(self) -> None:
        if self._owned:
            self._fh.close()

    def __enter__(self) -> PcapReader:
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_pcap(path: str | Path | BinaryIO) -> PcapReader:
    return PcapReader(path)


def write_pcap(
    path: str | Path,
    packets: Iterable[tuple[float, bytes]],
    link_type: int = LINKTYPE_ETHERNET,
    nanosecond: bool = False,
    byte_order: str = "<",
    snaplen: int = DEFAULT_SNAPLEN,
) -> int:
    """Write ``(timestamp, frame)`` pairs; returns the packet count."""
    if byte_order not in "<>" or len(byte_order) != 1:
        raise ValueError("byte_order must be '<' or '>'")
    magic = MAGIC_NS if nanosecond else MAGIC_US
    units = 10**9 if nanosecond else 10**6
    rec = struct.Struct(byte_order + _RECORD)
    count = 0
    with open(path, "wb") as fh:
        fh.write(struct.pack(byte_order + _GLOBAL, magic, 2, 4, 0, 0, snaplen, link_type))
        for ts, frame in packets:
            sec = int(ts)
            frac = round((ts - sec) * units)
            if frac >= units:
                sec, frac = sec + 1, frac - units
            fh.write(rec.pack(sec, frac, len(frame), len(frame)))
            fh.write(frame)
            count += 1
    return count
