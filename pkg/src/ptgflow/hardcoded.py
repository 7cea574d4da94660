"""Baseline walk with the default protocol stack compiled in as if/elif chains.

It drives the same analyzer instances as an :class:`AnalyzerManager` built
from the shipped default configuration, so for that configuration both
produce identical layers, events and unknown-protocol records. Only the
next-analyzer selection differs.
"""

from __future__ import annotations

from collections.abc import Mapping
from typing import Any

from ptgflow.engine.analyzer import Analyzer, Forward, Layer, PacketContext, Terminal
from ptgflow.engine.manager import MALFORMED_EVENT, AnalyzerManager
from ptgflow.telemetry import UnknownProtocolLog

ROOT = "ROOT"


class HardCodedStack:
    def __init__(self, analyzers: Mapping[str, Analyzer], unknown_log: UnknownProtocolLog | None = None):
        a = analyzers.__getitem__
        self.ethernet = a("ETHERNET")
        self.vlan = a("VLAN")
        self.mpls = a("MPLS")
        self.pppoe = a("PPPOE")
        self.ppp = a("PPP")
        self.arp = a("ARP")
        self.ip = a("IP")
        self.gre = a("GRE")
        self.tcp = a("TCP")
        self.udp = a("UDP")
        self.skip = a("SKIP")
        self.linuxsll = a("LINUXSLL")
        self.null = a("NULL")
        self.goose = a("GOOSE")
        self.profinet = a("PROFINET")
        self.unknown_log = unknown_log

    @classmethod
    def from_manager(cls, manager: AnalyzerManager, unknown_log: UnknownProtocolLog | None = None) -> HardCodedStack:
        """Share ``manager``'s analyzer instances."""
        return cls({name: manager.analyzer(name) for name in manager.names}, unknown_log)

    @classmethod
    def from_config(cls, config: Any) -> HardCodedStack:
        """Fresh analyzer instances configured like ``config`` would configure them."""
        from ptgflow.analyzers import CATALOG

        analyzers = {}
        for name, kind in CATALOG.items():
            analyzers[name] = a = kind()
            a.configure(config.section(name))
        return cls(analyzers, UnknownProtocolLog(config.throttle))

    def _root(self, link_type: int):
        if link_type == 1:
            return self.ethernet
        if link_type == 101:
            return self.ip
        if link_type == 113:
            return self.linuxsll
        if link_type == 0:
            return self.null
        if link_type == 9:
            return self.ppp
        return None

    def _ethertype(self, i: int):
        # Shared by Ethernet and VLAN, whose tables are identical.
        if i == 0x0800 or i == 0x86DD:
            return self.ip
        if i == 0x8100 or i == 0x88A8 or i == 0x9100:
            return self.vlan
        if i == 0x0806 or i == 0x8035:
            return self.arp
        if i == 0x8847:
            return self.mpls
        if i == 0x8864:
            return self.pppoe
        if i == 0x88B8 or i == 0x88B9:
            return self.goose
        if i == 0x8892:
            return self.profinet
        return None

    def _next(self, current, i: int):
        if current is self.ip:
            if i == 6:
                return self.tcp
            if i == 17:
                return self.udp
            if i == 4 or i == 41:
                return self.ip
            if i == 47:
                return self.gre
            return None
        if current is self.ethernet or current is self.vlan:
            return self._ethertype(i)
        if current is self.mpls or current is self.gre:
            if i == 0x0800 or i == 0x86DD:
                return self.ip
            if i == 0x6558:
                return self.ethernet
            return None
        if current is self.pppoe or current is self.ppp:
            return self.ip if i == 0x0021 or i == 0x0057 else None
        if current is self.linuxsll:
            if i == 0x0800 or i == 0x86DD:
                return self.ip
            if i == 0x0806 or i == 0x8035:
                return self.arp
            return self.vlan if i == 0x8100 else None
        if current is self.null:
            return self.ip if i == 2 or i == 24 or i == 28 or i == 30 else None
        if current is self.skip:
            return self.ethernet if i == 0 else None
        return None

    def process_packet(self, ctx: PacketContext) -> PacketContext:
        view = memoryview(ctx.raw)
        analyzer = self._root(ctx.link_type)
        if analyzer is None:
            self._unknown(ctx, ROOT, ctx.link_type, view)
            return ctx
        start = 0
        end = len(ctx.raw)
        layers = ctx.layers
        while True:
            outcome = analyzer.analyze(ctx, view[start:end])
            kind = type(outcome)
            span = end - start
            if kind is Forward:
                hl = outcome.header_len
                stop = span if outcome.payload_end is None else outcome.payload_end
                if not 0 < hl <= stop <= span:
                    ctx.emit(MALFORMED_EVENT, analyzer=analyzer.name, reason=f"invalid forward span {hl}:{stop} of {span}")
                    return ctx
                layers.append(Layer(analyzer.name, start, start + hl, outcome.info))
                end = start + stop
                start += hl
                nxt = self._next(analyzer, outcome.next_id)
                if nxt is None:
                    self._unknown(ctx, analyzer.name, outcome.next_id, view[start:end])
                    return ctx
                analyzer = nxt
            elif kind is Terminal:
                hl = outcome.header_len
                if not 0 <= hl <= span:
                    ctx.emit(MALFORMED_EVENT, analyzer=analyzer.name, reason=f"invalid terminal length {hl} of {span}")
                    return ctx
                layers.append(Layer(analyzer.name, start, start + hl, outcome.info))
                return ctx
            else:
                ctx.emit(MALFORMED_EVENT, analyzer=analyzer.name, reason=outcome.reason)
                return ctx

    def _unknown(self, ctx: PacketContext, analyzer: str, ident: int, payload: memoryview) -> None:
        if self.unknown_log is None:
            return
        rec = self.unknown_log.make_record(ctx.capture_time, analyzer, ident, payload)
        if self.unknown_log.report(rec):
            ctx.failures.append(rec)

    def process(self, raw: bytes, link_type: int = 1, capture_time: float = 0.0) -> PacketContext:
        return self.process_packet(PacketContext(raw, link_type, capture_time))
