"""Compiled bulk-lookup loops, one per strategy.

Each kernel replays the scalar lookup of its strategy over flattened copies
of the dispatcher's tables; results are indices into ``mapping.refs`` or -1.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_M32 = np.uint64(0xFFFFFFFF)
_C1 = np.uint64(0x85EBCA6B)
_C2 = np.uint64(0xC2B2AE35)
_S16 = np.uint64(16)
_S13 = np.uint64(13)
_S32 = np.uint64(32)


@njit(cache=True, inline="always")
def _fmix(h):
    h ^= h >> _S16
    h = (h * _C1) & _M32
    h ^= h >> _S13
    h = (h * _C2) & _M32
    h ^= h >> _S16
    return h


@njit(cache=True, inline="always")
def _reduce(h, n):
    return (h * n) >> _S32


@njit(cache=True)
def dense_kernel(ids, lo, table, out):
    size = table.size
    for i in range(ids.size):
        rel = ids[i] - lo
        out[i] = table[rel] if 0 <= rel < size else -1


@njit(cache=True)
def tree_kernel(ids, keys, left, right, vals, out):
    for i in range(ids.size):
        x = ids[i]
        node = 0 if keys.size else -1
        r = -1
        while node >= 0:
            k = keys[node]
            if x < k:
                node = left[node]
            elif x > k:
                node = right[node]
            else:
                r = vals[node]
                break
        out[i] = r


@njit(cache=True)
def array_tree_kernel(ids, lo, hi, left, right, base, flat, out):
    for i in range(ids.size):
        x = ids[i]
        node = 0
        r = -1
        while node >= 0:
            if x < lo[node]:
                node = left[node]
            elif x > hi[node]:
                node = right[node]
            else:
                r = flat[base[node] + x - lo[node]]
                break
        out[i] = r


@njit(cache=True)
def chaining_kernel(ids, nbuckets, longest, starts, lengths, keys, vals, out):
    # Every probe runs ``longest`` steps so the loop count never depends on
    # the bucket; ``keys`` carries ``longest`` trailing -1 sentinels and the
    # j < lengths[b] test keeps a neighbouring bucket's keys from matching.
    nb = np.uint64(nbuckets)
    for i in range(ids.size):
        x = ids[i]
        r = -1
        if 0 <= x <= 0xFFFFFFFF:
            b = _reduce(_fmix(np.uint64(x)), nb)
            s = np.uint32(starts[b])
            n = lengths[b]
            for j in range(longest):
                if keys[s + j] == x and j < n:
                    r = vals[s + j]
        out[i] = r


@njit(cache=True)
def cuckoo_kernel(ids, mask, s1, k1, v1, s2, k2, v2, out):
    m = np.uint64(mask)
    a = np.uint64(s1)
    b = np.uint64(s2)
    for i in range(ids.size):
        x = ids[i]
        r = -1
        if 0 <= x <= 0xFFFFFFFF:
            u = np.uint64(x)
            p = np.int64(_fmix(u ^ a) & m)
            if k1[p] == x:
                r = v1[p]
            else:
                q = np.int64(_fmix(u ^ b) & m)
                if k2[q] == x:
                    r = v2[q]
        out[i] = r


@njit(cache=True)
def universal_kernel(ids, a, shift, keys, vals, out):
    mult = np.uint64(a)
    sh = np.uint64(shift)
    for i in range(ids.size):
        x = ids[i]
        r = -1
        if 0 <= x <= 0xFFFFFFFF:
            h = np.int64(((mult * np.uint64(x)) & _M32) >> sh)
            if keys[h] == x:
                r = vals[h]
        out[i] = r


@njit(cache=True)
def perfect_kernel(ids, g, keys, vals, out):
    n = np.uint64(g.size)
    for i in range(ids.size):
        x = ids[i]
        r = -1
        if 0 <= x <= 0xFFFFFFFF:
            u = np.uint64(x)
            d = g[_reduce(_fmix(u), n)]
            if d < 0:
                slot = np.uint64(-d - 1)
            else:
                slot = _reduce(_fmix(u ^ np.uint64(d)), n)
            if keys[slot] == x:
                r = vals[slot]
        out[i] = r


@njit(cache=True)
def decision_kernel(ids, pivot, below, above, case_start, case_len, case_ids, case_refs, out):
    # Inner nodes have case_len == -1; leaves list their cases.
    for i in range(ids.size):
        x = ids[i]
        node = np.uint32(0)
        n = case_len[node]
        while n < 0:
            node = np.uint32(below[node]) if x < pivot[node] else np.uint32(above[node])
            n = case_len[node]
        r = -1
        s = np.uint32(case_start[node])
        for j in range(n):
            if case_ids[s + j] == x:
                r = case_refs[s + j]
        out[i] = r
