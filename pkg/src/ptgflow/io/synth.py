"""Synthetic Ethernet captures following the realistic traffic mix."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .pcap import LINKTYPE_ETHERNET, write_pcap
from .scenario import REALISTIC_MIX, realistic_kinds

_MACS = 64
_PAYLOAD_MAX = 64


def _ipv4(proto: int, payload: bytes, src: int, dst: int) -> bytes:
    return struct.pack("!BBHHHBBHII", 0x45, 0, 20 + len(payload), 0, 0x4000, 64, proto, 0, src, dst) + payload


def _tcp(sport: int, dport: int, payload: bytes) -> bytes:
    return struct.pack("!HHIIBBHHH", sport, dport, 1, 0, 5 << 4, 0x18, 8192, 0, 0) + payload


def _udp(sport: int, dport: int, payload: bytes) -> bytes:
    return struct.pack("!HHHH", sport, dport, 8 + len(payload), 0) + payload


def _arp(op: int, sha: bytes, spa: int, tpa: int) -> bytes:
    return struct.pack("!HHBBH6sI6sI", 1, 0x0800, 6, 4, op, sha, spa, b"\0" * 6, tpa)


def realistic_frames(pdu_count: int, seed: int = 0) -> list[bytes]:
    """Frames whose layer stacks follow the realistic mix, totalling at
    least ``pdu_count`` PDUs (layers) when walked by the default graph."""
    rng = np.random.default_rng([seed, 3])
    layouts = [ids for _, ids in REALISTIC_MIX]
    macs = [bytes([2, 0, 0, 0, i >> 8, i & 0xFF]) for i in range(_MACS)]
    frames = []
    total = 0
    while total < pdu_count:
        batch = max(1, (pdu_count - total) // 2)
        kinds = realistic_kinds(batch, rng).tolist()
        draws = rng.integers(0, 1 << 16, size=(batch, 6)).tolist()
        for k, (a, b, sport, dport, plen, host) in zip(kinds, draws):
            src, dst = macs[a % _MACS], macs[b % _MACS]
            payload = bytes(plen % _PAYLOAD_MAX)
            sip, dip = 0x0A000000 | host, 0x0A010000 | (host ^ 0x5A5A)
            layout = layouts[k]
            if layout == (1, 0x0806):
                frame = dst + src + b"\x08\x06" + _arp(1 + (a & 1), src, sip, dip)
            else:
                l4 = _tcp(sport, dport, payload) if layout[-1] == 6 else _udp(sport, dport, payload)
                ip = _ipv4(layout[-1], l4, sip, dip)
                if 0x8100 in layout:
                    frame = dst + src + b"\x81\x00" + struct.pack("!HH", b & 0x0FFF, 0x0800) + ip
                else:
                    frame = dst + src + b"\x08\x00" + ip
            frames.append(frame)
            total += len(layout)
            if total >= pdu_count:
                break
    return frames


def write_realistic_pcap(path: str | Path, pdu_count: int, seed: int = 0, start: float = 1.6e9) -> int:
    frames = realistic_frames(pdu_count, seed)
    return write_pcap(path, ((start + i * 1e-4, f) for i, f in enumerate(frames)), LINKTYPE_ETHERNET)
