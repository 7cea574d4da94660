"""Generated if/else dispatch, the stand-in for a compiler-lowered ``switch``.

The generator lowers a mapping to a balanced comparison tree (what C
compilers emit for sparse switches) and then to Python source, which is
compiled into a plain function with the references bound as globals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Union

import numpy as np

from ._kernels import decision_kernel
from .base import Dispatcher, DispatchStrategy, IdentifierMapping

# Case runs at or below this size become a chain of equality tests.
LEAF_CASES = 3
# Rough machine-code size of one compare-and-branch.
BYTES_PER_CASE = 16


@dataclass(frozen=True)
class _Leaf:
    cases: tuple[tuple[int, int], ...]  # (identifier, ref index)


@dataclass(frozen=True)
class _Split:
    pivot: int
    below: "_DecisionNode"
    at_or_above: "_DecisionNode"


_DecisionNode = Union[_Leaf, _Split]


def decision_tree(cases: list[tuple[int, int]]) -> _DecisionNode:
    """Lower sorted ``(identifier, ref index)`` cases to a comparison tree."""
    if len(cases) <= LEAF_CASES:
        return _Leaf(tuple(cases))
    mid = len(cases) // 2
    return _Split(cases[mid][0], decision_tree(cases[:mid]), decision_tree(cases[mid:]))


def _emit(node: _DecisionNode, depth: int, lines: list[str]) -> None:
    pad = "    " * depth
    if isinstance(node, _Leaf):
        for ident, ref in node.cases:
            lines.append(f"{pad}if ident == {ident:#x}:")
            lines.append(f"{pad}    return r{ref}")
        lines.append(f"{pad}return None")
        return
    lines.append(f"{pad}if ident < {node.pivot:#x}:")
    _emit(node.below, depth + 1, lines)
    _emit(node.at_or_above, depth, lines)


def generate_switch_source(mapping: IdentifierMapping, name: str = "dispatch") -> str:
    """Python source for a function ``name(ident)`` hard-coding ``mapping``.

    References appear as globals ``r0, r1, ...`` indexing ``mapping.refs``.
    """
    cases = [(ident, mapping.ref_index(ref)) for ident, ref in mapping.sorted_entries()]
    lines = [f"def {name}(ident):"]
    _emit(decision_tree(cases), 1, lines)
    return "\n".join(lines) + "\n"


def compile_switch(mapping: IdentifierMapping, name: str = "dispatch") -> Callable[[int], Any]:
    source = generate_switch_source(mapping, name)
    namespace: dict[str, Any] = {f"r{i}": ref for i, ref in enumerate(mapping.refs)}
    code = compile(source, f"<switch:{name}>", "exec")
    exec(code, namespace)
    return namespace[name]


def _flatten_tree(root: _DecisionNode) -> tuple[np.ndarray, ...]:
    pivot, below, above, case_start, case_len = [], [], [], [], []
    case_ids: list[int] = []
    case_refs: list[int] = []

    def visit(node: _DecisionNode) -> int:
        me = len(pivot)
        pivot.append(0)
        below.append(-1)
        above.append(-1)
        case_start.append(0)
        case_len.append(-1)
        if isinstance(node, _Leaf):
            case_start[me] = len(case_ids)
            case_len[me] = len(node.cases)
            for ident, ref in node.cases:
                case_ids.append(ident)
                case_refs.append(ref)
        else:
            pivot[me] = node.pivot
            below[me] = visit(node.below)
            above[me] = visit(node.at_or_above)
        return me

    visit(root)
    return tuple(np.array(a, dtype=np.int64) for a in (pivot, below, above, case_start, case_len, case_ids, case_refs))


class HardCodedSwitchDispatcher(Dispatcher):
    strategy = DispatchStrategy.HARD_CODED_SWITCH

    def __init__(self, mapping: IdentifierMapping):
        super().__init__(mapping)
        self.source = generate_switch_source(mapping)
        # Bound as an instance attribute so calls skip method binding, as a
        # compiled-in switch would.
        self.lookup = compile_switch(mapping)
        self.storage_bytes = len(mapping) * BYTES_PER_CASE
        self._tables: tuple[np.ndarray, ...] | None = None

    def lookup_indices(self, ids: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        if self._tables is None:
            cases = [(ident, self.mapping.ref_index(ref)) for ident, ref in self.mapping.sorted_entries()]
            self._tables = _flatten_tree(decision_tree(cases))
        return self._run_kernel(decision_kernel, ids, out, *self._tables)
