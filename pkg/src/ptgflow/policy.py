"""Detection policies consuming the event stream, and the alert log."""

from __future__ import annotations

import enum
import logging
import sys
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, TextIO

from ptgflow.analyzers.profinet import DcpService
from ptgflow.engine.analyzer import Event

log = logging.getLogger(__name__)

ALERTS_LOG_NAME = "alerts.log"
ALERTS_HEADER = ("ts", "kind", "detail")
U32_MAX = 0xFFFFFFFF
DEFAULT_ROLLOVER_WINDOW = 1000
DEFAULT_RENAME_WINDOW = 300.0
DEFAULT_PENDING_TIMEOUT = 30.0


class AlertKind(enum.Enum):
    STATE_NUMBER_JUMP = "StateNumberJump"
    RENAME_ATTACK = "RenameAttack"


@dataclass(frozen=True)
class Alert:
    time: float
    kind: AlertKind
    detail: str
    evidence: tuple[Event, ...]

    def __post_init__(self) -> None:
        if not self.evidence:
            raise ValueError("an alert needs at least one triggering event")


# -- GOOSE state-number poisoning ------------------------------------------


@dataclass
class GooseState:
    st_nums: dict[str, int] = field(default_factory=dict)
    rollover_window: int = DEFAULT_ROLLOVER_WINDOW

    def is_rollover(self, last: int, new: int) -> bool:
        return last >= U32_MAX - self.rollover_window and new <= self.rollover_window


def goose_poisoning_on_event(state: GooseState, ev: Event) -> Alert | None:
    """Flag a state number that skips ahead of the last one seen for its datSet.

    A publisher raises stNum by exactly one per state change, so a larger
    step means someone injected a message to win the receiver's sequence.
    """
    pdu = ev.fields["pdu"]
    ds, st = pdu.dat_set, pdu.st_num
    last = state.st_nums.get(ds)
    state.st_nums[ds] = st
    if last is None or st <= last + 1 or state.is_rollover(last, st):
        return None
    return Alert(ev.ts, AlertKind.STATE_NUMBER_JUMP, f"datSet {ds}: stNum {last} -> {st}", (ev,))


# -- DCP device renaming ---------------------------------------------------


@dataclass
class PendingRename:
    xid: int
    old_name: str | None
    new_name: str
    since: float
    request: Event


@dataclass
class RenameState:
    names: dict[str, str] = field(default_factory=dict)  # device MAC -> current name
    pending: dict[str, PendingRename] = field(default_factory=dict)
    retired: dict[str, tuple[float, str, list[Event]]] = field(default_factory=dict)  # name -> (when, device, evidence)
    window: float = DEFAULT_RENAME_WINDOW
    pending_timeout: float = DEFAULT_PENDING_TIMEOUT

    def learn(self, device: str | None, name: str | None) -> None:
        if device is None or not name:
            return
        self.names[device] = name
        self.retired.pop(name, None)


def dcp_rename_on_event(state: RenameState, ev: Event) -> Alert | None:
    """Correlate a confirmed rename with a later search for the old name.

    Device names are learned from Identify responses and from committed
    renames; a Set request opens a pending rename that only a successful
    response with the same xid from that device commits.
    """
    f = ev.fields
    service = f["service"]
    name = f.get("name")
    if ev.name == "dcp_request":
        if service is DcpService.SET and name:
            device = f["dst"]
            state.pending[device] = PendingRename(f["xid"], state.names.get(device), name, ev.ts, ev)
        elif service is DcpService.IDENTIFY and name in state.retired:
            when, device, evidence = state.retired[name]
            if ev.ts - when <= state.window:
                detail = f"identify for retired name {name!r} (device {device} renamed to {state.names.get(device)!r})"
                return Alert(ev.ts, AlertKind.RENAME_ATTACK, detail, (*evidence, ev))
        return None
    if ev.name != "dcp_response":
        return None
    device = f["src"]
    if service is DcpService.IDENTIFY and f.get("success"):
        state.learn(device, name)
        return None
    pending = state.pending.get(device)
    if service is not DcpService.SET or pending is None or pending.xid != f["xid"]:
        return None
    del state.pending[device]
    if not f.get("success") or ev.ts - pending.since > state.pending_timeout:
        return None
    old = pending.old_name
    state.learn(device, pending.new_name)
    if old and old != pending.new_name:
        state.retired[old] = (ev.ts, device, [pending.request, ev])
    return None


# -- wiring and output -----------------------------------------------------


class PolicyEngine:
    """Feeds events to the enabled detectors in arrival order."""

    def __init__(
        self,
        goose: bool = True,
        dcp: bool = True,
        rename_window: float = DEFAULT_RENAME_WINDOW,
        rollover_window: int = DEFAULT_ROLLOVER_WINDOW,
        sink: AlertSink | None = None,
    ):
        self.goose_state = GooseState(rollover_window=rollover_window) if goose else None
        self.rename_state = RenameState(window=rename_window) if dcp else None
        self.alerts: list[Alert] = []
        self.sink = sink

    @classmethod
    def from_config(cls, config: Any, sink: AlertSink | None = None) -> PolicyEngine:
        return cls(
            goose=bool(config.detect("goose")),
            dcp=bool(config.detect("dcp")),
            rename_window=float(config.detect("rename_window_secs", DEFAULT_RENAME_WINDOW)),
            rollover_window=int(config.detect("goose_rollover_window", DEFAULT_ROLLOVER_WINDOW)),
            sink=sink,
        )

    def feed(self, ev: Event) -> Alert | None:
        alert = None
        if ev.name == "goose_message":
            if self.goose_state is not None:
                alert = goose_poisoning_on_event(self.goose_state, ev)
        elif ev.name in ("dcp_request", "dcp_response"):
            if self.rename_state is not None:
                alert = dcp_rename_on_event(self.rename_state, ev)
        if alert is not None:
            self.alerts.append(alert)
            if self.sink is not None:
                self.sink.write(alert)
        return alert

    def feed_all(self, events: Iterable[Event]) -> list[Alert]:
        return [a for a in map(self.feed, events) if a is not None]


def format_alert(alert: Alert) -> str:
    detail = alert.detail.replace("\t", " ").replace("\n", " ")
    return f"{alert.time:.6f}\t{alert.kind.value}\t{detail}\n"


class AlertSink:
    """Writes ``alerts.log`` and mirrors each alert to standard error."""

    def __init__(self, path: str | Path, stderr: TextIO | None = sys.stderr):
        path = Path(path)
        if path.is_dir():
            path = path / ALERTS_LOG_NAME
        self.path = path
        self._fh = path.open("w", encoding="utf-8")
        self._fh.write("\t".join(ALERTS_HEADER) + "\n")
        self._stderr = stderr
        self.count = 0

    def write(self, alert: Alert) -> None:
        line = format_alert(alert)
        self._fh.write(line)
        if self._stderr is not None:
            self._stderr.write(f"ALERT {line}")
        self.count += 1

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> AlertSink:
        return self

    def __exit__(self, *exc: Any) -> None:
        self.close()


def write_alerts(alerts: Iterable[Alert], path: str | Path) -> Path:
    with AlertSink(path, stderr=None) as sink:
        for a in alerts:
            sink.write(a)
    return sink.path
