"""Link-layer and encapsulation analyzers.

All multi-byte fields are big-endian except the NULL/loopback family word,
which is written in the capturing host's byte order.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from typing import Any

from ptgflow.engine.analyzer import Analyzer, Forward, Malformed, PacketContext, Terminal

ETHERTYPE_IPV4 = 0x0800
ETHERTYPE_IPV6 = 0x86DD
ETHERTYPE_TEB = 0x6558  # transparent Ethernet bridging
ETHERNET_II_MIN = 0x0600  # IEEE 802.3: smaller values are lengths

_U16 = struct.Struct("!H")
_U32 = struct.Struct("!I")
_ARP = struct.Struct("!HHBBH6s4s6s4s")


def format_mac(raw: bytes | None) -> str | None:
    if raw is None:
        return None
    return ":".join(f"{b:02x}" for b in raw)


def format_ipv4(raw: bytes) -> str:
    return "{}.{}.{}.{}".format(*raw)


class FrameClass(enum.Enum):
    ETHERNET_II = "EthernetII"
    NOVELL_RAW = "NovellRaw8023"
    LLC = "Llc8022"
    SNAP = "Snap8022"


def classify_frame(type_or_length: int, first_two: bytes) -> FrameClass:
    """Total over every (type/length, leading payload bytes) combination."""
    if type_or_length >= ETHERNET_II_MIN:
        return FrameClass.ETHERNET_II
    if first_two == b"\xff\xff":
        return FrameClass.NOVELL_RAW
    if first_two == b"\xaa\xaa":
        return FrameClass.SNAP
    return FrameClass.LLC


@dataclass(frozen=True, slots=True)
class EthernetHeader:
    dst: bytes
    src: bytes
    type_or_length: int
    frame_class: FrameClass


class EthernetAnalyzer(Analyzer):
    name = "ETHERNET"
    HEADER = 14
    SNAP_HEADER = 8  # DSAP, SSAP, control, OUI(3), type(2)

    def __init__(self) -> None:
        super().__init__()
        self.novell_id: int | None = None
        self.llc_id: int | None = None

    def configure(self, options: dict[str, Any]) -> None:
        self.novell_id = options.get("novell_id")
        self.llc_id = options.get("llc_id")

    def analyze(self, ctx: PacketContext, data: memoryview):
        if len(data) < 14:
            return Malformed("truncated ethernet header")
        raw = data[:14].tobytes()
        ctx.l2_dst = raw[:6]
        ctx.l2_src = raw[6:12]
        tl = (raw[12] << 8) | raw[13]
        if tl >= ETHERNET_II_MIN:
            return Forward(tl, 14, EthernetHeader(ctx.l2_dst, ctx.l2_src, tl, FrameClass.ETHERNET_II))
        cls = classify_frame(tl, data[14:16].tobytes())
        info = EthernetHeader(ctx.l2_dst, ctx.l2_src, tl, cls)
        end = min(len(data), 14 + tl)
        if cls is FrameClass.SNAP:
            if end < 14 + self.SNAP_HEADER:
                return Malformed("truncated SNAP header")
            inner = _U16.unpack_from(data, 20)[0]
            return Forward(inner, 22, info, end)
        child = self.novell_id if cls is FrameClass.NOVELL_RAW else self.llc_id
        if child is None or end == 14:
            return Terminal(14, info)
        return Forward(child, 14, info, end)


@dataclass(frozen=True, slots=True)
class VlanTag:
    pcp: int
    dei: int
    vid: int
    ether_type: int

    @classmethod
    def from_tci(cls, tci: int, ether_type: int) -> VlanTag:
        return cls(tci >> 13, (tci >> 12) & 1, tci & 0x0FFF, ether_type)


class VlanAnalyzer(Analyzer):
    name = "VLAN"

    def analyze(self, ctx: PacketContext, data: memoryview):
        if len(data) < 4:
            return Malformed("truncated VLAN tag")
        tci = (data[0] << 8) | data[1]
        et = (data[2] << 8) | data[3]
        return Forward(et, 4, VlanTag.from_tci(tci, et))


@dataclass(frozen=True, slots=True)
class MplsEntry:
    label: int
    tc: int
    bos: int
    ttl: int

    @classmethod
    def decode(cls, word: int) -> MplsEntry:
        return cls(word >> 12, (word >> 9) & 7, (word >> 8) & 1, word & 0xFF)


class MplsAnalyzer(Analyzer):
    """Label stack walker; the payload protocol is guessed from its first nibble."""

    name = "MPLS"

    def __init__(self) -> None:
        super().__init__()
        self.default_child = ETHERTYPE_TEB

    def configure(self, options: dict[str, Any]) -> None:
        self.default_child = int(options.get("default_child", ETHERTYPE_TEB))

    def analyze(self, ctx: PacketContext, data: memoryview):
        entries = []
        off = 0
        n = len(data)
        while True:
            if off + 4 > n:
                return Malformed("label stack without bottom-of-stack")
            entry = MplsEntry.decode(_U32.unpack_from(data, off)[0])
            entries.append(entry)
            off += 4
            if entry.bos:
                break
        nibble = data[off] >> 4 if off < n else -1
        if nibble == 4:
            nxt = ETHERTYPE_IPV4
        elif nibble == 6:
            nxt = ETHERTYPE_IPV6
        else:
            nxt = self.default_child
        return Forward(nxt, off, tuple(entries))


@dataclass(frozen=True, slots=True)
class ArpMessage:
    op: int
    sha: str
    spa: str
    tha: str
    tpa: str


class ArpAnalyzer(Analyzer):
    name = "ARP"
    LENGTH = 28

    def analyze(self, ctx: PacketContext, data: memoryview):
        if len(data) < self.LENGTH:
            return Malformed("truncated ARP message")
        htype, ptype, hlen, plen, op, sha, spa, tha, tpa = _ARP.unpack_from(data)
        if htype != 1 or ptype != ETHERTYPE_IPV4 or hlen != 6 or plen != 4:
            return Malformed("not an IPv4-over-Ethernet ARP message")
        msg = ArpMessage(op, format_mac(sha), format_ipv4(spa), format_mac(tha), format_ipv4(tpa))
        ctx.emit("arp_message", op=op, sha=msg.sha, spa=msg.spa, tha=msg.tha, tpa=msg.tpa)
        return Terminal(self.LENGTH, msg)


@dataclass(frozen=True, slots=True)
class PppoeSession:
    code: int
    session_id: int
    length: int
    protocol: int


class PppoeAnalyzer(Analyzer):
    """PPPoE session stage: 6-byte header plus the PPP protocol field."""

    name = "PPPOE"

    def analyze(self, ctx: PacketContext, data: memoryview):
        if len(data) < 8:
            return Malformed("truncated PPPoE header")
        if data[0] != 0x11:
            return Malformed("unsupported PPPoE version/type")
        session, length, proto = struct.unpack_from("!HHH", data, 2)
        if length < 2 or 6 + length > len(data):
            return Malformed("PPPoE length exceeds frame")
        return Forward(proto, 8, PppoeSession(data[1], session, length, proto), 6 + length)


class PppAnalyzer(Analyzer):
    name = "PPP"

    def analyze(self, ctx: PacketContext, data: memoryview):
        off = 2 if data[:2] == b"\xff\x03" else 0
        if off >= len(data):
            return Malformed("truncated PPP header")
        # An odd first byte means the protocol field was compressed to one byte.
        if data[off] & 1:
            return Forward(data[off], off + 1, data[off])
        if off + 2 > len(data):
            return Malformed("truncated PPP header")
        proto = _U16.unpack_from(data, off)[0]
        return Forward(proto, off + 2, proto)


@dataclass(frozen=True, slots=True)
class SllHeader:
    packet_type: int
    arphrd: int
    address: bytes
    protocol: int


class LinuxSllAnalyzer(Analyzer):
    name = "LINUXSLL"

    def analyze(self, ctx: PacketContext, data: memoryview):
        if len(data) < 16:
            return Malformed("truncated cooked-capture header")
        ptype, arphrd, alen = struct.unpack_from("!HHH", data)
        proto = _U16.unpack_from(data, 14)[0]
        addr = data[6 : 6 + min(alen, 8)].tobytes()
        ctx.l2_src = addr
        return Forward(proto, 16, SllHeader(ptype, arphrd, addr, proto))


class NullAnalyzer(Analyzer):
    """BSD loopback: a 4-byte address family in host byte order."""

    name = "NULL"

    def analyze(self, ctx: PacketContext, data: memoryview):
        if len(data) < 4:
            return Malformed("truncated loopback header")
        family = struct.unpack_from("<I", data)[0]
        if family > 0xFFFF:
            family = _U32.unpack_from(data)[0]
        return Forward(family, 4, family)


class SkipAnalyzer(Analyzer):
    """Drops a fixed number of bytes and hands the rest to its one child."""

    name = "SKIP"
    CHILD_ID = 0

    def __init__(self) -> None:
        super().__init__()
        self.bytes = 4

    def configure(self, options: dict[str, Any]) -> None:
        n = int(options.get("bytes", self.bytes))
        if n < 1:
            raise ValueError("skip.bytes must be at least 1")
        self.bytes = n

    def analyze(self, ctx: PacketContext, data: memoryview):
        if len(data) < self.bytes:
            return Malformed(f"fewer than {self.bytes} bytes to skip")
        return Forward(self.CHILD_ID, self.bytes)
