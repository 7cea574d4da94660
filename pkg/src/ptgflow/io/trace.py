"""CSV layer traces: one packet per line, one decimal identifier per layer."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path

from ptgflow.engine.config import ParseError

MAX_IDENTIFIER = 0xFFFFFFFF


@dataclass
class LayerTrace:
    packets: list[list[int]] = field(default_factory=list)

    def __post_init__(self) -> None:
        for i, pkt in enumerate(self.packets):
            if not pkt:
                raise ValueError(f"packet {i} has no layers")

    def __len__(self) -> int:
        return len(self.packets)

    @property
    def pdu_count(self) -> int:
        return sum(map(len, self.packets))

    def flat(self) -> list[int]:
        return [ident for pkt in self.packets for ident in pkt]


def parse_layer_trace(lines: Iterable[str]) -> LayerTrace:
    packets = []
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        ids = []
        for col, cell in enumerate(line.split(","), 1):
            cell = cell.strip()
            if not (cell.isascii() and cell.isdigit()):
                raise ParseError(f"not a decimal identifier: {cell!r}", line=lineno, field=f"column {col}")
            ident = int(cell)
            if ident > MAX_IDENTIFIER:
                raise ParseError(f"identifier {ident} exceeds 32 bits", line=lineno, field=f"column {col}")
            ids.append(ident)
        packets.append(ids)
    return LayerTrace(packets)


def read_layer_trace(path: str | Path) -> LayerTrace:
    with open(path, encoding="utf-8") as fh:
        return parse_layer_trace(fh)


def write_layer_trace(trace: LayerTrace, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pkt in trace.packets:
            fh.write(",".join(map(str, pkt)) + "\n")
