"""Network-layer analyzers (IPv4/IPv6, GRE) and the transport leaves."""

from __future__ import annotations

import struct
from dataclasses import dataclass

from ptgflow.engine.analyzer import Analyzer, Forward, Malformed, PacketContext, Terminal

from .link import format_ipv4

IPPROTO_TCP = 6
IPPROTO_UDP = 17
IPPROTO_NONE = 59
IPV6_HOP_BY_HOP = 0
IPV6_ROUTING = 43
IPV6_FRAGMENT = 44
IPV6_DEST_OPTS = 60
IPV6_MAX_EXTENSIONS = 8

_V4 = struct.Struct("!BBHHHBBH4s4s")
_TCP = struct.Struct("!HHIIBB")
_UDP = struct.Struct("!HHHH")


@dataclass(frozen=True, slots=True)
class Ipv4Header:
    header_len: int
    total_len: int
    ident: int
    frag_offset: int
    more_fragments: bool
    ttl: int
    protocol: int
    src: str
    dst: str


@dataclass(frozen=True, slots=True)
class Ipv6Header:
    payload_len: int
    hop_limit: int
    extensions: tuple[tuple[int, int], ...]  # (header type, length in bytes)
    next_header: int
    src: bytes
    dst: bytes


class IpAnalyzer(Analyzer):
    """One analyzer for both IP versions, selected by the version nibble.

    Non-first IPv4/IPv6 fragments carry no upper-layer header and end the
    walk. The IPv4 total length (or IPv6 payload length) bounds the payload
    handed on, which strips Ethernet trailer padding.
    """

    name = "IP"

    def analyze(self, ctx: PacketContext, data: memoryview):
        if not len(data):
            return Malformed("empty IP packet")
        version = data[0] >> 4
        if version == 4:
            return self._v4(data)
        if version == 6:
            return self._v6(data)
        return Malformed(f"unsupported IP version {version}")

    @staticmethod
    def _v4(data: memoryview):
        n = len(data)
        if n < 20:
            return Malformed("truncated IPv4 header")
        vihl, _tos, total, ident, frag, ttl, proto, _csum, src, dst = _V4.unpack_from(data)
        hl = (vihl & 0x0F) * 4
        if hl < 20:
            return Malformed("IPv4 IHL below 5")
        if hl > n:
            return Malformed("truncated IPv4 options")
        if total < hl or total > n:
            return Malformed("IPv4 total length inconsistent with capture")
        offset = frag & 0x1FFF
        info = Ipv4Header(hl, total, ident, offset * 8, bool(frag & 0x2000), ttl, proto, format_ipv4(src), format_ipv4(dst))
        if offset:
            return Terminal(hl, info)
        return Forward(proto, hl, info, total)

    @staticmethod
    def _v6(data: memoryview):
        n = len(data)
        if n < 40:
            return Malformed("truncated IPv6 header")
        plen = (data[4] << 8) | data[5]
        end = 40 + plen
        if end > n:
            return Malformed("IPv6 payload length exceeds capture")
        nh = data[6]
        off = 40
        chain = []
        terminal = nh == IPPROTO_NONE
        while nh in (IPV6_HOP_BY_HOP, IPV6_ROUTING, IPV6_FRAGMENT, IPV6_DEST_OPTS):
            if len(chain) == IPV6_MAX_EXTENSIONS:
                return Malformed("IPv6 extension chain too long")
            if off + 8 > end:
                return Malformed("truncated IPv6 extension header")
            if nh == IPV6_FRAGMENT:
                size = 8
                if ((data[off + 2] << 8) | data[off + 3]) >> 3:
                    terminal = True
            else:
                size = (data[off + 1] + 1) * 8
                if off + size > end:
                    return Malformed("truncated IPv6 extension header")
            chain.append((nh, size))
            nh = data[off]
            off += size
        info = Ipv6Header(plen, data[7], tuple(chain), nh, data[8:24].tobytes(), data[24:40].tobytes())
        if terminal or nh == IPPROTO_NONE:
            return Terminal(off, info)
        return Forward(nh, off, info, end)


@dataclass(frozen=True, slots=True)
class GreHeader:
    flags: int
    protocol: int
    key: int | None
    sequence: int | None


class GreAnalyzer(Analyzer):
    """GRE version 0; the protocol type is an EtherType, so the graph loops
    back into the link-layer identifier space."""

    name = "GRE"
    CHECKSUM = 0x8000
    ROUTING = 0x4000
    KEY = 0x2000
    SEQUENCE = 0x1000

    def analyze(self, ctx: PacketContext, data: memoryview):
        if len(data) < 4:
            return Malformed("truncated GRE header")
        flags, proto = struct.unpack_from("!HH", data)
        if flags & 0x7:
            return Malformed("unsupported version")
        if flags & self.ROUTING:
            return Malformed("GRE source routing not supported")
        off = 4
        if flags & self.CHECKSUM:
            off += 4
        key = seq = None
        if flags & self.KEY:
            if off + 4 > len(data):
                return Malformed("truncated GRE key")
            key = struct.unpack_from("!I", data, off)[0]
            off += 4
        if flags & self.SEQUENCE:
            if off + 4 > len(data):
                return Malformed("truncated GRE sequence number")
            seq = struct.unpack_from("!I", data, off)[0]
            off += 4
        if off > len(data):
            return Malformed("truncated GRE checksum")
        return Forward(proto, off, GreHeader(flags, proto, key, seq))


@dataclass(frozen=True, slots=True)
class TcpSummary:
    src_port: int
    dst_port: int
    flags: int
    header_len: int
    payload_len: int


class TcpAnalyzer(Analyzer):
    name = "TCP"

    def analyze(self, ctx: PacketContext, data: memoryview):
        n = len(data)
        if n < 20:
            return Malformed("truncated TCP header")
        sport, dport, _seq, _ack, doff, flags = _TCP.unpack_from(data)
        hl = (doff >> 4) * 4
        if hl < 20 or hl > n:
            return Malformed("bad TCP data offset")
        ctx.emit("tcp_packet", src_port=sport, dst_port=dport, flags=flags, payload_len=n - hl)
        return Terminal(hl, TcpSummary(sport, dport, flags, hl, n - hl))


@dataclass(frozen=True, slots=True)
class UdpSummary:
    src_port: int
    dst_port: int
    length: int


class UdpAnalyzer(Analyzer):
    name = "UDP"

    def analyze(self, ctx: PacketContext, data: memoryview):
        if len(data) < 8:
            return Malformed("truncated UDP header")
        sport, dport, length, _csum = _UDP.unpack_from(data)
        if length < 8 or length > len(data):
            return Malformed("UDP length inconsistent with payload")
        ctx.emit("udp_packet", src_port=sport, dst_port=dport, length=length)
        return Terminal(8, UdpSummary(sport, dport, length))
