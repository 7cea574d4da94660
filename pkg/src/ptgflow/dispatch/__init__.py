"""Interchangeable identifier -> analyzer lookup structures."""

from __future__ import annotations

import time
from typing import Any

from .arrays import STATIC_ID_SPACE, DynamicArrayDispatcher, StaticArrayDispatcher
from .base import (
    DispatchError,
    Dispatcher,
    DispatchStrategy,
    DuplicateIdentifier,
    EmptyMapping,
    HashConstructionFailed,
    IdentifierMapping,
    IdentifierOutOfRange,
    as_mapping,
    linear_scan,
    linear_scan_indices,
    linear_scan_sweep,
)
from .hashing import (
    CuckooHashDispatcher,
    PerfectHashDispatcher,
    SeparateChainingDispatcher,
    UniversalHashDispatcher,
)
from .measure import DispatchTiming, EmptyTrace, measure_dispatch
from .switch import HardCodedSwitchDispatcher, generate_switch_source
from .trees import ArrayTreeDispatcher, TreeMapDispatcher

_IMPLEMENTATIONS: dict[DispatchStrategy, type[Dispatcher]] = {
    DispatchStrategy.STATIC_ARRAY: StaticArrayDispatcher,
    DispatchStrategy.DYNAMIC_ARRAY: DynamicArrayDispatcher,
    DispatchStrategy.TREE_MAP: TreeMapDispatcher,
    DispatchStrategy.ARRAY_TREE: ArrayTreeDispatcher,
    DispatchStrategy.SEPARATE_CHAINING: SeparateChainingDispatcher,
    DispatchStrategy.CUCKOO_HASH: CuckooHashDispatcher,
    DispatchStrategy.UNIVERSAL_HASH: UniversalHashDispatcher,
    DispatchStrategy.PERFECT_HASH: PerfectHashDispatcher,
    DispatchStrategy.HARD_CODED_SWITCH: HardCodedSwitchDispatcher,
}

_SEEDED = {DispatchStrategy.CUCKOO_HASH, DispatchStrategy.UNIVERSAL_HASH}

ALL_STRATEGIES = tuple(DispatchStrategy)


def build_dispatcher(mapping: Any, strategy: DispatchStrategy | str, seed: int = 0, **options: Any) -> Dispatcher:
    """Build a dispatcher for ``mapping`` and record its construction time.

    ``mapping`` may be an :class:`IdentifierMapping`, a dict or an iterable of
    ``(identifier, ref)`` pairs; duplicate identifiers raise
    :class:`DuplicateIdentifier`.
    """
    strategy = DispatchStrategy.parse(strategy)
    mapping = as_mapping(mapping)
    cls = _IMPLEMENTATIONS[strategy]
    if strategy in _SEEDED:
        options.setdefault("seed", seed)
    start = time.perf_counter_ns()
    d = cls(mapping, **options)
    d.build_ns = time.perf_counter_ns() - start
    return d


def lookup(d: Dispatcher, ident: int) -> Any | None:
    return d.lookup(ident)


__all__ = [
    "ALL_STRATEGIES",
    "STATIC_ID_SPACE",
    "ArrayTreeDispatcher",
    "CuckooHashDispatcher",
    "DispatchError",
    "DispatchStrategy",
    "DispatchTiming",
    "Dispatcher",
    "DuplicateIdentifier",
    "DynamicArrayDispatcher",
    "EmptyMapping",
    "EmptyTrace",
    "HardCodedSwitchDispatcher",
    "HashConstructionFailed",
    "IdentifierMapping",
    "IdentifierOutOfRange",
    "PerfectHashDispatcher",
    "SeparateChainingDispatcher",
    "StaticArrayDispatcher",
    "TreeMapDispatcher",
    "UniversalHashDispatcher",
    "build_dispatcher",
    "generate_switch_source",
    "linear_scan",
    "linear_scan_indices",
    "linear_scan_sweep",
    "lookup",
    "measure_dispatch",
]
