"""Identifier mappings, the dispatcher contract and the linear-scan oracle."""

from __future__ import annotations

import enum
from collections.abc import Hashable, Iterable, Mapping
from typing import Any

import numpy as np

#: Identifiers are unsigned 32-bit values.
MAX_IDENTIFIER = 0xFFFFFFFF
#: Size of one analyzer reference slot on a 64-bit platform.
REF_SIZE = 8
#: Size of one stored identifier.
KEY_SIZE = 4
#: Size of a child pointer in node-based structures.
PTR_SIZE = 8


class DispatchError(Exception):
    """Base class for dispatcher construction errors."""


class DuplicateIdentifier(DispatchError):
    def __init__(self, identifier: int):
        super().__init__(f"duplicate identifier {identifier:#x}")
        self.identifier = identifier


class HashConstructionFailed(DispatchError):
    pass


class IdentifierOutOfRange(DispatchError):
    pass


class EmptyMapping(DispatchError):
    pass


class DispatchStrategy(enum.Enum):
    STATIC_ARRAY = "StaticArray"
    DYNAMIC_ARRAY = "DynamicArray"
    TREE_MAP = "TreeMap"
    ARRAY_TREE = "ArrayTree"
    SEPARATE_CHAINING = "SeparateChaining"
    CUCKOO_HASH = "CuckooHash"
    UNIVERSAL_HASH = "UniversalHash"
    PERFECT_HASH = "PerfectHash"
    HARD_CODED_SWITCH = "HardCodedSwitch"

    @classmethod
    def parse(cls, name: str | DispatchStrategy) -> DispatchStrategy:
        if isinstance(name, cls):
            return name
        key = str(name).replace("_", "").replace("-", "").lower()
        for member in cls:
            if member.value.lower() == key:
                return member
        raise ValueError(f"unknown dispatch strategy {name!r}")


class IdentifierMapping(Mapping):
    """Immutable identifier -> analyzer reference table.

    Duplicates are rejected, so this is built from pairs rather than a dict
    (a dict would silently keep the last value).

    >>> m = IdentifierMapping([(0x0800, "IP"), (0x0806, "ARP")])
    >>> m[0x0806]
    'ARP'
    """

    __slots__ = ("_entries", "_table", "_refs", "_ref_index")

    def __init__(self, pairs: Iterable[tuple[int, Any]] | Mapping[int, Any]):
        if isinstance(pairs, Mapping):
            pairs = pairs.items()
        entries: list[tuple[int, Any]] = []
        table: dict[int, Any] = {}
        for ident, ref in pairs:
            ident = int(ident)
            if not 0 <= ident <= MAX_IDENTIFIER:
                raise IdentifierOutOfRange(f"identifier {ident} outside 32-bit range")
            if ident in table:
                raise DuplicateIdentifier(ident)
            table[ident] = ref
            entries.append((ident, ref))
        self._entries = tuple(entries)
        self._table = table
        # Distinct references in first-seen order; bulk lookups return
        # indices into this tuple.
        refs: list[Any] = []
        index: dict[int, int] = {}
        for _, ref in entries:
            if id(ref) not in index:
                index[id(ref)] = len(refs)
                refs.append(ref)
        self._refs = tuple(refs)
        self._ref_index = index

    def __getitem__(self, ident: int) -> Any:
        return self._table[ident]

    def __iter__(self):
        return (ident for ident, _ in self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __repr__(self) -> str:
        return f"IdentifierMapping({len(self)} entries)"

    @property
    def entries(self) -> tuple[tuple[int, Any], ...]:
        return self._entries

    @property
    def refs(self) -> tuple[Any, ...]:
        return self._refs

    def ref_index(self, ref: Any) -> int:
        return self._ref_index[id(ref)]

    def sorted_entries(self) -> list[tuple[int, Any]]:
        return sorted(self._entries, key=lambda e: e[0])


def linear_scan(mapping: IdentifierMapping, ident: int) -> Any | None:
    """Reference answer: scan every entry of ``mapping``."""
    for key, ref in mapping.entries:
        if key == ident:
            return ref
    return None


def linear_scan_indices(mapping: IdentifierMapping, ids: np.ndarray) -> np.ndarray:
    """Bulk form of :func:`linear_scan` returning indices into ``mapping.refs``."""
    ids = np.asarray(ids, dtype=np.int64)
    out = np.full(ids.shape, -1, dtype=np.int64)
    for key, ref in mapping.entries:
        out[ids == key] = mapping.ref_index(ref)
    return out


def linear_scan_sweep(mapping: IdentifierMapping, lo: int, hi: int) -> np.ndarray:
    """:func:`linear_scan` answers for every identifier in ``[lo, hi)``.

    Walks the entries once and scatters each one into its position; every
    other position is absent.
    """
    out = np.full(hi - lo, -1, dtype=np.int64)
    for key, ref in mapping.entries:
        if lo <= key < hi:
            out[key - lo] = mapping.ref_index(ref)
    return out


class Dispatcher:
    """Common surface of every lookup structure.

    Subclasses fill ``storage_bytes`` during construction; ``build_ns`` is set
    by :func:`ptgflow.dispatch.build_dispatcher`.
    """

    strategy: DispatchStrategy

    def __init__(self, mapping: IdentifierMapping):
        if len(mapping) == 0:
            raise EmptyMapping("cannot build a dispatcher from an empty mapping")
        self.mapping = mapping
        self.build_ns = 0
        self.storage_bytes = 0

    def lookup(self, ident: int) -> Any | None:
        raise NotImplementedError

    def lookup_indices(self, ids: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """Vectorised lookup over the same internal layout.

        Returns indices into ``self.mapping.refs`` (``-1`` for absent ids).
        ``out`` may supply a reusable int64 result buffer of the same shape.
        """
        raise NotImplementedError

    @staticmethod
    def _run_kernel(kernel, ids: np.ndarray, out: np.ndarray | None, *tables: Any) -> np.ndarray:
        ids = np.ascontiguousarray(ids, dtype=np.int64)
        if out is None:
            out = np.empty(ids.shape, dtype=np.int64)
        elif out.shape != ids.shape or out.dtype != np.int64 or not out.flags.c_contiguous:
            raise ValueError("out must be a contiguous int64 array shaped like ids")
        kernel(ids.ravel(), *tables, out.reshape(-1))
        return out

    def _index_array(self, refs: list[Any]) -> np.ndarray:
        """Translate a list of stored references (or ``None``) to ref indices."""
        ref_index = self.mapping.ref_index
        return np.fromiter(
            (-1 if r is None else ref_index(r) for r in refs), dtype=np.int64, count=len(refs)
        )

    def lookup_many(self, ids: Iterable[int]) -> list[Any | None]:
        refs = self.mapping.refs + (None,)
        idx = self.lookup_indices(np.fromiter(ids, dtype=np.int64))
        return [refs[i] for i in idx.tolist()]

    @property
    def stats(self) -> dict[str, Hashable]:
        return {
            "strategy": self.strategy.value,
            "entries": len(self.mapping),
            "build_ns": self.build_ns,
            "storage_bytes": self.storage_bytes,
        }

    def __repr__(self) -> str:
        return f"<{type(self).__name__} entries={len(self.mapping)} bytes={self.storage_bytes}>"


def as_mapping(mapping: IdentifierMapping | Mapping[int, Any] | Iterable[tuple[int, Any]]) -> IdentifierMapping:
    if isinstance(mapping, IdentifierMapping):
        return mapping
    return IdentifierMapping(mapping)
