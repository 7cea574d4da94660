"""Hash-based dispatchers: separate chaining, cuckoo, universal and perfect hashing."""

from __future__ import annotations

import math
import random
from typing import Any

import numpy as np

from ._kernels import chaining_kernel, cuckoo_kernel, perfect_kernel, universal_kernel
from .base import (
    KEY_SIZE,
    PTR_SIZE,
    REF_SIZE,
    Dispatcher,
    DispatchStrategy,
    HashConstructionFailed,
    IdentifierMapping,
)

M32 = 0xFFFFFFFF
GOLDEN32 = 0x9E3779B9

CUCKOO_MAX_KICKS = 500
UNIVERSAL_MAX_ATTEMPTS = 1_000_000
# Table size is 2**(ceil(log2 n) + UNIVERSAL_EXTRA_BITS).
UNIVERSAL_EXTRA_BITS = 2
PERFECT_MAX_DISPLACEMENT = 1_000_000


def fmix32(h: int) -> int:
    """MurmurHash3 32-bit finaliser."""
    h ^= h >> 16
    h = (h * 0x85EBCA6B) & M32
    h ^= h >> 13
    h = (h * 0xC2B2AE35) & M32
    h ^= h >> 16
    return h


def reduce32(h: int, n: int) -> int:
    """Map a 32-bit hash onto ``range(n)`` by multiply-and-shift, which
    avoids the division a modulo would cost."""
    return (h * n) >> 32


def _next_prime(n: int) -> int:
    n = max(n, 2)
    while True:
        if all(n % p for p in range(2, math.isqrt(n) + 1)):
            return n
        n += 1


class SeparateChainingDispatcher(Dispatcher):
    """Prime-sized bucket array, each bucket a list of (key, ref) pairs."""

    strategy = DispatchStrategy.SEPARATE_CHAINING

    def __init__(self, mapping: IdentifierMapping, max_load: float = 1.0):
        super().__init__(mapping)
        nbuckets = _next_prime(math.ceil(len(mapping) / max_load))
        buckets: list[list[tuple[int, Any]]] = [[] for _ in range(nbuckets)]
        for ident, ref in mapping.entries:
            buckets[reduce32(fmix32(ident), nbuckets)].append((ident, ref))
        self._buckets = [tuple(b) for b in buckets]
        self._nbuckets = nbuckets
        self.storage_bytes = nbuckets * PTR_SIZE + len(mapping) * (KEY_SIZE + REF_SIZE + PTR_SIZE)

    @property
    def bucket_count(self) -> int:
        return self._nbuckets

    def lookup(self, ident: int) -> Any | None:
        for key, ref in self._buckets[reduce32(fmix32(ident), self._nbuckets)]:
            if key == ident:
                return ref
        return None

    def lookup_indices(self, ids: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        lengths = np.array([len(b) for b in self._buckets], dtype=np.int64)
        starts = np.concatenate(([0], np.cumsum(lengths)[:-1])).astype(np.int64)
        longest = int(lengths.max())
        keys = np.array([k for b in self._buckets for k, _ in b] + [-1] * longest, dtype=np.int64)
        vals = self._index_array([r for b in self._buckets for _, r in b] + [None] * longest)
        return self._run_kernel(chaining_kernel, ids, out, self._nbuckets, longest, starts, lengths, keys, vals)



class CuckooHashDispatcher(Dispatcher):
    """Two tables, two seeded hash functions, one slot per bucket."""

    strategy = DispatchStrategy.CUCKOO_HASH

    def __init__(self, mapping: IdentifierMapping, seed: int = 0, max_kicks: int = CUCKOO_MAX_KICKS):
        super().__init__(mapping)
        rng = random.Random(seed)
        size = 1 << max(1, math.ceil(math.log2(len(mapping))))
        self.rehashes = 0
        while True:
            s1, s2 = rng.getrandbits(32), rng.getrandbits(32)
            placed = self._try_build(mapping, size, s1, s2, max_kicks)
            if placed is not None:
                break
            self.rehashes += 1
            # Grow after repeated failures at this size.
            if self.rehashes % 8 == 0:
                size <<= 1
        self._k1, self._v1, self._k2, self._v2 = placed
        self._s1, self._s2 = s1, s2
        self._mask = size - 1
        self.storage_bytes = 2 * size * (KEY_SIZE + REF_SIZE)

    @staticmethod
    def _try_build(mapping, size, s1, s2, max_kicks):
        mask = size - 1
        k1, v1 = [-1] * size, [None] * size
        k2, v2 = [-1] * size, [None] * size
        for ident, ref in mapping.entries:
            key, val = ident, ref
            for _ in range(max_kicks):
                i = fmix32(key ^ s1) & mask
                if k1[i] == -1:
                    k1[i], v1[i] = key, val
                    break
                k1[i], key = key, k1[i]
                v1[i], val = val, v1[i]
                j = fmix32(key ^ s2) & mask
                if k2[j] == -1:
                    k2[j], v2[j] = key, val
                    break
                k2[j], key = key, k2[j]
                v2[j], val = val, v2[j]
            else:
                return None
        return k1, v1, k2, v2

    def lookup(self, ident: int) -> Any | None:
        i = fmix32(ident ^ self._s1) & self._mask
        if self._k1[i] == ident:
            return self._v1[i]
        j = fmix32(ident ^ self._s2) & self._mask
        if self._k2[j] == ident:
            return self._v2[j]
        return None

    def lookup_indices(self, ids: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        return self._run_kernel(
            cuckoo_kernel,
            ids,
            out,
            self._mask,
            self._s1,
            np.array(self._k1, dtype=np.int64),
            self._index_array(self._v1),
            self._s2,
            np.array(self._k2, dtype=np.int64),
            self._index_array(self._v2),
        )



class UniversalHashDispatcher(Dispatcher):
    """Collision-free multiply-shift hash found by random search.

    ``h(x) = ((a * x) mod 2**32) >> (32 - bits)`` with odd ``a``; a fresh
    ``a`` is drawn until no two identifiers share a slot.
    """

    strategy = DispatchStrategy.UNIVERSAL_HASH

    def __init__(
        self,
        mapping: IdentifierMapping,
        seed: int = 0,
        max_attempts: int = UNIVERSAL_MAX_ATTEMPTS,
        extra_bits: int = UNIVERSAL_EXTRA_BITS,
    ):
        super().__init__(mapping)
        bits = min(32, max(0, math.ceil(math.log2(len(mapping)))) + extra_bits)
        shift = 32 - bits
        size = 1 << bits
        keys = [ident for ident, _ in mapping.entries]
        rng = random.Random(seed)
        for attempt in range(1, max_attempts + 1):
            a = rng.getrandbits(32) | 1
            taken = set()
            for x in keys:
                h = ((a * x) & M32) >> shift
                if h in taken:
                    break
                taken.add(h)
            else:
                break
        else:
            raise HashConstructionFailed(
                f"no collision-free multiplier for {len(keys)} ids in {max_attempts} attempts"
            )
        self.attempts = attempt
        table_keys = [-1] * size
        table_refs: list[Any] = [None] * size
        for ident, ref in mapping.entries:
            h = ((a * ident) & M32) >> shift
            table_keys[h] = ident
            table_refs[h] = ref
        self._a = a
        self._shift = shift
        self._keys = table_keys
        self._refs = table_refs
        self.storage_bytes = size * (KEY_SIZE + REF_SIZE) + 16

    @property
    def multiplier(self) -> int:
        return self._a

    @property
    def table_size(self) -> int:
        return len(self._keys)

    def slot_of(self, ident: int) -> int:
        return ((self._a * ident) & M32) >> self._shift

    def lookup(self, ident: int) -> Any | None:
        h = ((self._a * ident) & M32) >> self._shift
        if self._keys[h] == ident:
            return self._refs[h]
        return None

    def lookup_indices(self, ids: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        keys = np.array(self._keys, dtype=np.int64)
        vals = self._index_array(self._refs)
        return self._run_kernel(universal_kernel, ids, out, self._a, self._shift, keys, vals)



class PerfectHashDispatcher(Dispatcher):
    """Minimal perfect hash via hash-and-displace.

    Identifiers are first spread over ``n`` buckets; buckets are placed
    largest-first by searching a displacement seed that sends all their
    members to free slots.  Singleton buckets take remaining free slots
    directly (stored as negative entries).
    """

    strategy = DispatchStrategy.PERFECT_HASH

    def __init__(self, mapping: IdentifierMapping, max_displacement: int = PERFECT_MAX_DISPLACEMENT):
        super().__init__(mapping)
        n = len(mapping)
        buckets: list[list[tuple[int, Any]]] = [[] for _ in range(n)]
        for ident, ref in mapping.entries:
            buckets[reduce32(fmix32(ident), n)].append((ident, ref))
        order = sorted(range(n), key=lambda b: -len(buckets[b]))

        g = [0] * n
        keys = [-1] * n
        refs: list[Any] = [None] * n
        pos = 0
        while pos < n and len(buckets[order[pos]]) > 1:
            b = order[pos]
            for d in range(1, max_displacement + 1):
                seed = (d * GOLDEN32) & M32
                slots = [reduce32(fmix32(ident ^ seed), n) for ident, _ in buckets[b]]
                if len(set(slots)) == len(slots) and all(keys[s] == -1 for s in slots):
                    break
            else:
                raise HashConstructionFailed(f"bucket {b} could not be displaced")
            g[b] = seed
            for s, (ident, ref) in zip(slots, buckets[b]):
                keys[s], refs[s] = ident, ref
            pos += 1

        free = [s for s in range(n) if keys[s] == -1]
        while pos < n and buckets[order[pos]]:
            b = order[pos]
            s = free.pop()
            (ident, ref), = buckets[b]
            keys[s], refs[s] = ident, ref
            g[b] = -s - 1
            pos += 1

        self._n = n
        self._g = g
        self._keys = keys
        self._refs = refs
        self.storage_bytes = n * 4 + n * (KEY_SIZE + REF_SIZE)

    def slot_of(self, ident: int) -> int:
        d = self._g[reduce32(fmix32(ident), self._n)]
        return -d - 1 if d < 0 else reduce32(fmix32(ident ^ d), self._n)

    def lookup(self, ident: int) -> Any | None:
        d = self._g[reduce32(fmix32(ident), self._n)]
        slot = -d - 1 if d < 0 else reduce32(fmix32(ident ^ d), self._n)
        if self._keys[slot] == ident:
            return self._refs[slot]
        return None

    def lookup_indices(self, ids: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        g = np.array(self._g, dtype=np.int64)
        keys = np.array(self._keys, dtype=np.int64)
        vals = self._index_array(self._refs)
        return self._run_kernel(perfect_kernel, ids, out, g, keys, vals)
