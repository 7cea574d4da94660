"""The analyzer manager: registry, transition tables and the per-packet walk."""

from __future__ import annotations

import logging
from typing import Any

from ptgflow.dispatch import DispatchStrategy, build_dispatcher
from ptgflow.telemetry import UnknownProtocolLog

from .analyzer import (
    NO_TRANSITIONS,
    ROOT,
    Analyzer,
    AnalyzerTag,
    Forward,
    Layer,
    PacketContext,
    Registration,
    Terminal,
)

log = logging.getLogger(__name__)

MALFORMED_EVENT = "packet_malformed"


class RegistryError(Exception):
    pass


class DuplicateName(RegistryError):
    pass


class UnknownAnalyzer(RegistryError):
    pass


class AnalyzerManager:
    """Registry of singleton analyzers plus the root dispatch table.

    Registrations are collected per parent and compiled into one dispatcher
    per analyzer the first time a packet is processed (or on :meth:`build`).
    The root table is keyed by the capture's link-layer type.
    """

    def __init__(
        self,
        strategy: DispatchStrategy | str = DispatchStrategy.DYNAMIC_ARRAY,
        unknown_log: UnknownProtocolLog | None = None,
    ):
        self.strategy = DispatchStrategy.parse(strategy)
        self.unknown_log = unknown_log
        self._analyzers: dict[str, Analyzer] = {}
        self._tags: list[AnalyzerTag] = []
        self._edges: dict[str, dict[int, str]] = {ROOT: {}}
        self._root: Any = NO_TRANSITIONS
        self._dirty = True

    # -- registry -----------------------------------------------------------

    def register_analyzer(self, analyzer: Analyzer) -> AnalyzerTag:
        name = analyzer.name
        if not name or name == ROOT:
            raise RegistryError(f"invalid analyzer name {name!r}")
        if name in self._analyzers:
            raise DuplicateName(f"analyzer {name} is already registered")
        tag = AnalyzerTag(name, len(self._tags))
        analyzer.tag = tag
        self._analyzers[name] = analyzer
        self._tags.append(tag)
        self._edges[name] = {}
        self._dirty = True
        return tag

    def register_transition(self, parent: str | Registration, identifier: int | None = None, child: str | None = None) -> None:
        if isinstance(parent, Registration):
            parent, identifier, child = parent.parent, parent.identifier, parent.child
        if parent != ROOT and parent not in self._analyzers:
            raise UnknownAnalyzer(f"unknown parent analyzer {parent}")
        if child not in self._analyzers:
            raise UnknownAnalyzer(f"unknown child analyzer {child}")
        self._edges[parent][int(identifier)] = child
        self._dirty = True

    def analyzer(self, name: str) -> Analyzer:
        try:
            return self._analyzers[name]
        except KeyError:
            raise UnknownAnalyzer(name) from None

    def __contains__(self, name: str) -> bool:
        return name in self._analyzers

    @property
    def tags(self) -> list[AnalyzerTag]:
        return list(self._tags)

    @property
    def names(self) -> list[str]:
        return [t.name for t in self._tags]

    def transitions(self, parent: str) -> dict[int, str]:
        """Current identifier -> child-name table of ``parent``."""
        return dict(self._edges[parent])

    def edges(self) -> set[tuple[str, int, str]]:
        return {(p, i, c) for p, table in self._edges.items() for i, c in table.items()}

    # -- compilation --------------------------------------------------------

    def build(self, strategy: DispatchStrategy | str | None = None) -> None:
        if strategy is not None:
            self.strategy = DispatchStrategy.parse(strategy)
        for name, analyzer in self._analyzers.items():
            analyzer.transitions = self._compile(self._edges[name])
        self._root = self._compile(self._edges[ROOT])
        self._dirty = False
        log.debug("built %d transition tables with %s", len(self._analyzers) + 1, self.strategy.value)

    def _compile(self, table: dict[int, str]) -> Any:
        if not table:
            return NO_TRANSITIONS
        pairs = [(ident, self._analyzers[child]) for ident, child in table.items()]
        return build_dispatcher(pairs, self.strategy)

    @property
    def root_table(self) -> Any:
        if self._dirty:
            self.build()
        return self._root

    # -- packet walk --------------------------------------------------------

    def process_packet(self, ctx: PacketContext) -> PacketContext:
        """Run ``ctx.raw`` through the transition graph.

        Each step hands the remaining bytes to the current analyzer.  The
        walk ends at a terminal layer, a malformed header, or an identifier
        the current analyzer has no transition for.  Every forwarding step
        must consume at least one byte, so a packet of ``n`` bytes takes at
        most ``n`` steps whatever the graph looks like.
        """
        if self._dirty:
            self.build()
        raw = ctx.raw
        view = memoryview(raw)
        analyzer = self._root.lookup(ctx.link_type)
        if analyzer is None:
            self._unknown(ctx, ROOT, ctx.link_type, view)
            return ctx
        start = 0
        end = len(raw)
        layers = ctx.layers
        while True:
            outcome = analyzer.analyze(ctx, view[start:end])
            kind = type(outcome)
            span = end - start
            if kind is Forward:
                hl = outcome.header_len
                stop = span if outcome.payload_end is None else outcome.payload_end
                if not 0 < hl <= stop <= span:
                    self._malformed(ctx, analyzer, f"invalid forward span {hl}:{stop} of {span}")
                    return ctx
                layers.append(Layer(analyzer.name, start, start + hl, outcome.info))
                end = start + stop
                start += hl
                nxt = analyzer.transitions.lookup(outcome.next_id)
                if nxt is None:
                    self._unknown(ctx, analyzer.name, outcome.next_id, view[start:end])
                    return ctx
                analyzer = nxt
            elif kind is Terminal:
                hl = outcome.header_len
                if not 0 <= hl <= span:
                    self._malformed(ctx, analyzer, f"invalid terminal length {hl} of {span}")
                    return ctx
                layers.append(Layer(analyzer.name, start, start + hl, outcome.info))
                return ctx
            else:
                self._malformed(ctx, analyzer, outcome.reason)
                return ctx

    def _malformed(self, ctx: PacketContext, analyzer: Analyzer, reason: str) -> None:
        ctx.emit(MALFORMED_EVENT, analyzer=analyzer.name, reason=reason)

    def _unknown(self, ctx: PacketContext, analyzer: str, ident: int, payload: memoryview) -> None:
        if self.unknown_log is None:
            return
        rec = self.unknown_log.make_record(ctx.capture_time, analyzer, ident, payload)
        if self.unknown_log.report(rec):
            ctx.failures.append(rec)

    def process(self, raw: bytes, link_type: int = 1, capture_time: float = 0.0) -> PacketContext:
        return self.process_packet(PacketContext(raw, link_type, capture_time))


def process_packet(manager: AnalyzerManager, ctx: PacketContext) -> PacketContext:
    return manager.process_packet(ctx)
