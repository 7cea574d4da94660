"""Direct-indexed array dispatchers."""

from __future__ import annotations

from functools import cached_property
from typing import Any

import numpy as np

from ._kernels import dense_kernel
from .base import REF_SIZE, Dispatcher, DispatchStrategy, IdentifierMapping, IdentifierOutOfRange

STATIC_ID_SPACE = 1 << 16
# Spans beyond this would allocate gigabytes for a sparse 32-bit mapping.
MAX_DYNAMIC_SPAN = 1 << 24


class StaticArrayDispatcher(Dispatcher):
    """One slot per identifier of the 16-bit space."""

    strategy = DispatchStrategy.STATIC_ARRAY

    def __init__(self, mapping: IdentifierMapping, id_space: int = STATIC_ID_SPACE):
        super().__init__(mapping)
        if id_space > STATIC_ID_SPACE:
            raise IdentifierOutOfRange("static arrays are limited to 16-bit identifiers")
        slots: list[Any] = [None] * id_space
        for ident, ref in mapping.entries:
            if ident >= id_space:
                raise IdentifierOutOfRange(
                    f"identifier {ident:#x} does not fit a static array of {id_space} slots"
                )
            slots[ident] = ref
        self._slots = slots
        self._size = id_space
        self.storage_bytes = id_space * REF_SIZE

    @property
    def slot_count(self) -> int:
        return self._size

    def lookup(self, ident: int) -> Any | None:
        if 0 <= ident < self._size:
            return self._slots[ident]
        return None

    @cached_property
    def _bulk(self) -> np.ndarray:
        index = np.full(self._size, -1, dtype=np.int64)
        for ident, ref in self.mapping.entries:
            index[ident] = self.mapping.ref_index(ref)
        return index

    def lookup_indices(self, ids: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        return self._run_kernel(dense_kernel, ids, out, 0, self._bulk)


class DynamicArrayDispatcher(Dispatcher):
    """Array covering only ``min(id)..max(id)``."""

    strategy = DispatchStrategy.DYNAMIC_ARRAY

    def __init__(self, mapping: IdentifierMapping):
        super().__init__(mapping)
        keys = [ident for ident, _ in mapping.entries]
        lo, hi = min(keys), max(keys)
        size = hi - lo + 1
        if size > MAX_DYNAMIC_SPAN:
            raise IdentifierOutOfRange(
                f"identifier span {size} exceeds the dynamic array limit of {MAX_DYNAMIC_SPAN}"
            )
        slots: list[Any] = [None] * size
        for ident, ref in mapping.entries:
            slots[ident - lo] = ref
        self._lo = lo
        self._size = size
        self._slots = slots
        self.storage_bytes = size * REF_SIZE + 2 * 8

    @property
    def offset(self) -> int:
        return self._lo

    @property
    def slot_count(self) -> int:
        return self._size

    def lookup(self, ident: int) -> Any | None:
        i = ident - self._lo
        if 0 <= i < self._size:
            return self._slots[i]
        return None

    @cached_property
    def _bulk(self) -> np.ndarray:
        index = np.full(self._size, -1, dtype=np.int64)
        for ident, ref in self.mapping.entries:
            index[ident - self._lo] = self.mapping.ref_index(ref)
        return index

    def lookup_indices(self, ids: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        return self._run_kernel(dense_kernel, ids, out, self._lo, self._bulk)
