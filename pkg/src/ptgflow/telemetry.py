"""Unknown-protocol reporting with throttling, and the tab-separated log writers."""

from __future__ import annotations

import dataclasses
import enum
import threading
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path
from typing import Any

UNKNOWN_LOG_NAME = "unknown_protocols.log"
EVENTS_LOG_NAME = "events.log"
UNKNOWN_HEADER = ("ts", "analyzer", "protocol_id", "first_bytes")
EVENTS_HEADER = ("ts", "event", "args")


@dataclass(frozen=True)
class UnknownProtocolRecord:
    time: float
    analyzer: str
    identifier: int
    snap: bytes = b""


@dataclass(frozen=True)
class ThrottleConfig:
    threshold: int = 3
    sampling_rate: int = 100
    duration: float = 3600.0
    snap_bytes: int = 10

    def __post_init__(self) -> None:
        if self.threshold < 1:
            raise ValueError("threshold must be >= 1")
        if self.sampling_rate < 1:
            raise ValueError("sampling_rate must be >= 1")
        if self.duration <= 0:
            raise ValueError("duration must be > 0")
        if self.snap_bytes < 0:
            raise ValueError("snap_bytes must be >= 0")


@dataclass
class _KeyState:
    count: int = 0
    limited_since: float | None = None


class ThrottleState:
    """Per ``(analyzer, identifier)`` occurrence counters.

    The first ``threshold`` occurrences of a key are logged.  From then on
    only occurrences where ``(count - threshold) % sampling_rate == 0`` are,
    until capture time passes ``limited_since + duration``; the key then
    starts over from zero.
    """

    def __init__(self) -> None:
        self._keys: dict[tuple[str, int], _KeyState] = {}
        self._lock = threading.Lock()

    def report(self, rec: UnknownProtocolRecord, cfg: ThrottleConfig) -> bool:
        key = (rec.analyzer, rec.identifier)
        with self._lock:
            st = self._keys.get(key)
            if st is None:
                st = self._keys[key] = _KeyState()
            elif st.limited_since is not None and rec.time > st.limited_since + cfg.duration:
                st.count = 0
                st.limited_since = None
            st.count += 1
            if st.count <= cfg.threshold:
                if st.count == cfg.threshold:
                    st.limited_since = rec.time
                return True
            return (st.count - cfg.threshold) % cfg.sampling_rate == 0

    def count(self, analyzer: str, identifier: int) -> int:
        st = self._keys.get((analyzer, identifier))
        return st.count if st else 0

    def limited_since(self, analyzer: str, identifier: int) -> float | None:
        st = self._keys.get((analyzer, identifier))
        return st.limited_since if st else None


def report_unknown(state: ThrottleState, rec: UnknownProtocolRecord, cfg: ThrottleConfig) -> bool:
    return state.report(rec, cfg)


def expected_logged(n: int, threshold: int, sampling_rate: int) -> int:
    """Closed form for one key with ``n`` occurrences inside one window."""
    return min(n, threshold) + max(0, (n - threshold) // sampling_rate)


class UnknownProtocolLog:
    """Collects the records that survive throttling."""

    def __init__(self, cfg: ThrottleConfig | None = None):
        self.cfg = cfg or ThrottleConfig()
        self.state = ThrottleState()
        self.records: list[UnknownProtocolRecord] = []
        self.seen = 0

    def make_record(self, time: float, analyzer: str, identifier: int, payload: Any) -> UnknownProtocolRecord:
        return UnknownProtocolRecord(time, analyzer, identifier, bytes(payload[: self.cfg.snap_bytes]))

    def report(self, rec: UnknownProtocolRecord) -> bool:
        self.seen += 1
        if self.state.report(rec, self.cfg):
            self.records.append(rec)
            return True
        return False


def _tsv_line(fields: Iterable[str]) -> str:
    return "\t".join(fields) + "\n"


def format_unknown_record(rec: UnknownProtocolRecord) -> str:
    return _tsv_line((f"{rec.time:.6f}", rec.analyzer, f"{rec.identifier:#x}", rec.snap.hex()))


def write_unknown_log(records: Iterable[UnknownProtocolRecord], path: str | Path) -> Path:
    path = Path(path)
    if path.is_dir():
        path = path / UNKNOWN_LOG_NAME
    with path.open("w", encoding="utf-8") as fh:
        fh.write(_tsv_line(UNKNOWN_HEADER))
        for rec in records:
            fh.write(format_unknown_record(rec))
    return path


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def format_value(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "T" if value else "F"
    if isinstance(value, (bytes, bytearray, memoryview)):
        return bytes(value).hex()
    if isinstance(value, float):
        return f"{value:.6f}"
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(v) for v in value) if value else "(empty)"
    if isinstance(value, enum.Enum):
        return value.name
    return _escape(str(value))


def _flatten(prefix: str, value: Any, out: list[str]) -> None:
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        for f in dataclasses.fields(value):
            _flatten(f"{prefix}.{f.name}", getattr(value, f.name), out)
    elif isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}", v, out)
    else:
        out.append(f"{prefix}={format_value(value)}")


def format_event(ev: Any) -> str:
    args: list[str] = []
    for key, value in ev.fields.items():
        _flatten(key, value, args)
    return _tsv_line((f"{ev.ts:.6f}", ev.name, *args))


class EventLogWriter:
    """Streams events to ``events.log``; usable as a context manager."""

    def __init__(self, path: str | Path):
        path = Path(path)
        if path.is_dir():
            path = path / EVENTS_LOG_NAME
        self.path = path
        self._fh = path.open("w", encoding="utf-8")
        self._fh.write(_tsv_line(EVENTS_HEADER))
        self.count = 0

    def write(self, ev: Any) -> None:
        self._fh.write(format_event(ev))
        self.count += 1

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> EventLogWriter:
        return self

    def __exit__(self, *exc: Any) -> None:
        self.close()
