"""The analyzer contract and per-packet state."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, ClassVar, NamedTuple, Union


class Forward(NamedTuple):
    """Continue with the analyzer registered for ``next_id``.

    ``header_len`` bytes of the input belong to this layer; the payload is
    ``data[header_len:payload_end]`` (``payload_end`` defaults to the end of
    the input span).
    """

    next_id: int
    header_len: int
    info: Any = None
    payload_end: int | None = None


class Terminal(NamedTuple):
    header_len: int
    info: Any = None


class Malformed(NamedTuple):
    reason: str


AnalyzeOutcome = Union[Forward, Terminal, Malformed]


@dataclass(frozen=True)
class AnalyzerTag:
    name: str
    id: int


@dataclass(slots=True)
class Layer:
    analyzer: str
    start: int
    end: int
    info: Any = None


@dataclass(slots=True)
class Event:
    name: str
    ts: float
    fields: dict[str, Any]


class PacketContext:
    """Everything known about one packet while it walks the graph."""

    __slots__ = ("capture_time", "link_type", "raw", "layers", "events", "failures", "l2_src", "l2_dst")

    def __init__(self, raw: bytes, link_type: int = 1, capture_time: float = 0.0):
        self.capture_time = capture_time
        self.link_type = link_type
        self.raw = raw
        self.layers: list[Layer] = []
        self.events: list[Event] = []
        self.failures: list = []
        self.l2_src: bytes | None = None
        self.l2_dst: bytes | None = None

    def emit(self, name: str, /, **fields: Any) -> Event:
        ev = Event(name, self.capture_time, fields)
        self.events.append(ev)
        return ev

    @property
    def layer_names(self) -> list[str]:
        return [layer.analyzer for layer in self.layers]

    def __repr__(self) -> str:
        return f"<PacketContext {len(self.raw)}B layers={self.layer_names}>"


class _NoTransitions:
    """Stand-in table for analyzers without children."""

    __slots__ = ()

    def lookup(self, ident: int) -> None:
        return None


NO_TRANSITIONS = _NoTransitions()


class Analyzer:
    """Base class for packet-level analyzers.

    Subclasses set ``name`` and implement :meth:`analyze`, which receives the
    bytes of its layer onward and returns a :data:`AnalyzeOutcome`.  All
    per-packet state belongs in the :class:`PacketContext`; the instance is
    shared by every packet.
    """

    name: ClassVar[str] = ""

    def __init__(self) -> None:
        self.tag: AnalyzerTag | None = None
        self.transitions: Any = NO_TRANSITIONS

    def configure(self, options: dict[str, Any]) -> None:
        """Apply this analyzer's section of the configuration ``options``."""

    def analyze(self, ctx: PacketContext, data: memoryview) -> AnalyzeOutcome:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


@dataclass
class Registration:
    parent: str
    identifier: int
    child: str


ROOT = "ROOT"

