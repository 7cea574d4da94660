"""Ordered-tree dispatchers: a red/black tree map and a tree of dense arrays."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ._kernels import array_tree_kernel, tree_kernel
from .base import KEY_SIZE, PTR_SIZE, REF_SIZE, Dispatcher, DispatchStrategy, IdentifierMapping

# Identifiers closer than this share one array node.
ARRAY_TREE_MAX_GAP = 16

_RED = True
_BLACK = False


class _Node:
    __slots__ = ("key", "value", "left", "right", "color")

    def __init__(self, key: int, value: Any):
        self.key = key
        self.value = value
        self.left: _Node | None = None
        self.right: _Node | None = None
        self.color = _RED


def _is_red(node: _Node | None) -> bool:
    return node is not None and node.color is _RED


def _rotate_left(h: _Node) -> _Node:
    x = h.right
    h.right = x.left
    x.left = h
    x.color = h.color
    h.color = _RED
    return x


def _rotate_right(h: _Node) -> _Node:
    x = h.left
    h.left = x.right
    x.right = h
    x.color = h.color
    h.color = _RED
    return x


def _flip_colors(h: _Node) -> None:
    h.color = not h.color
    h.left.color = not h.left.color
    h.right.color = not h.right.color


def _insert(h: _Node | None, key: int, value: Any) -> _Node:
    # Left-leaning red/black insertion (Sedgewick 2008).
    if h is None:
        return _Node(key, value)
    if key < h.key:
        h.left = _insert(h.left, key, value)
    elif key > h.key:
        h.right = _insert(h.right, key, value)
    else:
        h.value = value
    if _is_red(h.right) and not _is_red(h.left):
        h = _rotate_left(h)
    if _is_red(h.left) and _is_red(h.left.left):
        h = _rotate_right(h)
    if _is_red(h.left) and _is_red(h.right):
        _flip_colors(h)
    return h


def _flatten(root: Any) -> tuple[list[Any], dict[int, int]]:
    """Breadth-first node list plus an id(node) -> position map."""
    order: list[Any] = []
    pos: dict[int, int] = {}
    queue = deque([root] if root is not None else [])
    while queue:
        node = queue.popleft()
        pos[id(node)] = len(order)
        order.append(node)
        for child in (node.left, node.right):
            if child is not None:
                queue.append(child)
    return order, pos


class TreeMapDispatcher(Dispatcher):
    """Red/black search tree keyed by identifier."""

    strategy = DispatchStrategy.TREE_MAP

    def __init__(self, mapping: IdentifierMapping):
        super().__init__(mapping)
        root = None
        for ident, ref in mapping.entries:
            root = _insert(root, ident, ref)
            root.color = _BLACK
        self._root = root
        # key + ref + three pointers (std::map keeps a parent link) + colour word
        self.storage_bytes = len(mapping) * (KEY_SIZE + REF_SIZE + 3 * PTR_SIZE + 4)

    def lookup(self, ident: int) -> Any | None:
        node = self._root
        while node is not None:
            key = node.key
            if ident < key:
                node = node.left
            elif ident > key:
                node = node.right
            else:
                return node.value
        return None

    def height(self) -> int:
        def depth(n: _Node | None) -> int:
            return 0 if n is None else 1 + max(depth(n.left), depth(n.right))

        return depth(self._root)

    def black_height_ok(self) -> bool:
        """True when every root-to-leaf path has the same number of black nodes
        and no red node has a red child."""

        def check(n: _Node | None) -> int:
            if n is None:
                return 1
            if _is_red(n) and (_is_red(n.left) or _is_red(n.right)):
                return -1
            lh, rh = check(n.left), check(n.right)
            if lh < 0 or rh < 0 or lh != rh:
                return -1
            return lh + (0 if _is_red(n) else 1)

        return not _is_red(self._root) and check(self._root) > 0

    def lookup_indices(self, ids: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        nodes, pos = _flatten(self._root)
        keys = np.array([n.key for n in nodes], dtype=np.int64)
        left = np.array([pos[id(n.left)] if n.left is not None else -1 for n in nodes], dtype=np.int64)
        right = np.array([pos[id(n.right)] if n.right is not None else -1 for n in nodes], dtype=np.int64)
        vals = self._index_array([n.value for n in nodes])
        return self._run_kernel(tree_kernel, ids, out, keys, left, right, vals)


@dataclass(slots=True)
class _ArrayNode:
    lo: int
    hi: int
    slots: list = field(repr=False)
    left: _ArrayNode | None = None
    right: _ArrayNode | None = None


def group_identifiers(idents: list[int], max_gap: int = ARRAY_TREE_MAX_GAP) -> list[tuple[int, int]]:
    """Split sorted identifiers into ``(lo, hi)`` runs whose neighbours are at
    most ``max_gap`` apart.

    >>> group_identifiers([1, 2, 10, 40, 41])
    [(1, 10), (40, 41)]
    """
    runs: list[tuple[int, int]] = []
    for ident in idents:
        if runs and ident - runs[-1][1] <= max_gap:
            runs[-1] = (runs[-1][0], ident)
        else:
            runs.append((ident, ident))
    return runs


class ArrayTreeDispatcher(Dispatcher):
    """Balanced search tree whose nodes are dense arrays over identifier runs."""

    strategy = DispatchStrategy.ARRAY_TREE

    def __init__(self, mapping: IdentifierMapping, max_gap: int = ARRAY_TREE_MAX_GAP):
        super().__init__(mapping)
        table = dict(mapping.entries)
        runs = group_identifiers(sorted(table), max_gap)
        leaves = []
        for lo, hi in runs:
            slots = [table.get(i) for i in range(lo, hi + 1)]
            leaves.append(_ArrayNode(lo, hi, slots))

        def balance(items: list[_ArrayNode]) -> _ArrayNode | None:
            if not items:
                return None
            mid = len(items) // 2
            node = items[mid]
            node.left = balance(items[:mid])
            node.right = balance(items[mid + 1 :])
            return node

        self._root = balance(leaves)
        self.node_count = len(leaves)
        slot_total = sum(len(n.slots) for n in leaves)
        self.storage_bytes = len(leaves) * (2 * KEY_SIZE + 3 * PTR_SIZE) + slot_total * REF_SIZE

    def lookup(self, ident: int) -> Any | None:
        node = self._root
        while node is not None:
            if ident < node.lo:
                node = node.left
            elif ident > node.hi:
                node = node.right
            else:
                return node.slots[ident - node.lo]
        return None

    def lookup_indices(self, ids: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        nodes, pos = _flatten(self._root)
        lo = np.array([n.lo for n in nodes], dtype=np.int64)
        hi = np.array([n.hi for n in nodes], dtype=np.int64)
        left = np.array([pos[id(n.left)] if n.left is not None else -1 for n in nodes], dtype=np.int64)
        right = np.array([pos[id(n.right)] if n.right is not None else -1 for n in nodes], dtype=np.int64)
        base = np.cumsum([0] + [len(n.slots) for n in nodes])[:-1].astype(np.int64)
        flat = self._index_array([r for n in nodes for r in n.slots])
        return self._run_kernel(array_tree_kernel, ids, out, lo, hi, left, right, base, flat)
