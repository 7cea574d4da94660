"""Timing of identifier lookups over a layer trace."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from ptgflow.io.trace import LayerTrace

    from .base import Dispatcher


class EmptyTrace(ValueError):
    pass


@dataclass(frozen=True)
class DispatchTiming:
    total_ns: int
    lookups: int
    hits: int
    misses: int

    @property
    def mean_ns(self) -> float:
        return self.total_ns / self.lookups

    @property
    def total_s(self) -> float:
        return self.total_ns / 1e9


def measure_dispatch(d: Dispatcher, trace: LayerTrace | list[int]) -> DispatchTiming:
    """Look up every PDU identifier of ``trace`` in order and time the pass.

    Hits are counted inside the timed loop so that every result is consumed.
    """
    ids = trace if isinstance(trace, list) else trace.flat()
    if not ids:
        raise EmptyTrace("trace contains no identifiers")
    lookup = d.lookup
    hits = 0
    start = time.perf_counter_ns()
    for ref in map(lookup, ids):
        if ref is not None:
            hits += 1
    elapsed = time.perf_counter_ns() - start
    return DispatchTiming(total_ns=elapsed, lookups=len(ids), hits=hits, misses=len(ids) - hits)
