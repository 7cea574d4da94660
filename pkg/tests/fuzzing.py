"""Seed inputs and a mutator for dissector fuzzing."""

from __future__ import annotations

import numpy as np

import encoders as enc

IP4_TCP = enc.ipv4(6, enc.tcp(payload=b"hello"))
IP4_UDP = enc.ipv4(17, enc.udp(payload=b"x" * 12))

SEEDS: dict[str, list[bytes]] = {
    "ETHERNET": [
        enc.ethernet(0x0800, IP4_TCP),
        enc.ethernet(40, b"\xaa\xaa\x03\0\0\0\x08\x00" + IP4_UDP),
        enc.ethernet(30, b"\xff\xff" + b"\0" * 28),
        enc.ethernet(30, b"\x42\x42\x03" + b"\0" * 27),
    ],
    "VLAN": [enc.vlan(0x0800, IP4_TCP, pcp=5, vid=100), enc.vlan(0x8100, enc.vlan(0x0806, enc.arp(1)))],
    "MPLS": [enc.mpls([16, 17], IP4_UDP), enc.mpls([3], enc.ethernet(0x0800, IP4_TCP))],
    "PPPOE": [enc.pppoe(0x21, IP4_TCP)],
    "PPP": [enc.ppp(0x21, IP4_TCP), enc.ppp(0x57, enc.ipv6(17, enc.udp()), address_control=False), b"\x21" + IP4_TCP],
    "ARP": [enc.arp(1), enc.arp(2)],
    "IP": [
        IP4_TCP,
        enc.ipv4(17, enc.udp(), options=b"\x01\x01\x01\x00"),
        enc.ipv4(6, b"\0" * 20, frag_offset=64),
        enc.ipv6(0, enc.ipv6_ext(44) + enc.ipv6_fragment(6) + enc.tcp()),
        enc.ipv6(60, enc.ipv6_ext(59)),
    ],
    "GRE": [enc.gre(0x0800, IP4_TCP, checksum=True, key=7, seq=9), enc.gre(0x6558, enc.ethernet(0x0806, enc.arp(1)))],
    "TCP": [enc.tcp(payload=b"GET /"), enc.tcp(options=b"\x02\x04\x05\xb4")],
    "UDP": [enc.udp(payload=b"abc")],
    "SKIP": [b"\0\0\0\0" + enc.ethernet(0x0800, IP4_TCP)],
    "LINUXSLL": [enc.linux_sll(0x0800, IP4_TCP), enc.linux_sll(0x8100, enc.vlan(0x0800, IP4_UDP))],
    "NULL": [enc.null_family(2, IP4_TCP), enc.null_family(30, enc.ipv6(17, enc.udp()), order=">")],
    "GOOSE": [enc.goose(st_num=3, sq_num=4), enc.goose(appid=0x3FFF, go_id=None, all_data=b"")],
    "PROFINET": [
        enc.dcp_set_name(7, "press-7")[14:],
        enc.dcp_set_response(7)[14:],
        enc.dcp_identify(8, "press-7")[14:],
        enc.dcp_identify(9, None)[14:],
        enc.dcp_identify_response(8, "press-7")[14:],
        b"\x80\x00" + b"\0" * 40,
    ],
}


def fuzz_inputs(seeds: list[bytes], count: int, rng: np.random.Generator, max_len: int = 96):
    """``count`` inputs: half random bytes, half seeds with flipped bytes and
    random truncation or extension."""
    raw = rng.bytes(count * max_len)
    lengths = rng.integers(0, max_len + 1, count)
    for i in range(count):
        if i % 2:
            yield raw[i * max_len : i * max_len + int(lengths[i])]
            continue
        buf = bytearray(seeds[i // 2 % len(seeds)])
        for _ in range(int(rng.integers(0, 5))):
            if buf:
                buf[int(rng.integers(0, len(buf)))] = int(rng.integers(0, 256))
        cut = int(rng.integers(0, 4))
        if cut == 0 and buf:
            buf = buf[: int(rng.integers(0, len(buf) + 1))]
        elif cut == 1:
            buf += raw[i * max_len : i * max_len + int(lengths[i]) // 4]
        yield bytes(buf)
