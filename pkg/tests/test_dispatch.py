from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptgflow.dispatch import (
    ALL_STRATEGIES,
    ArrayTreeDispatcher,
    DispatchStrategy,
    DuplicateIdentifier,
    EmptyMapping,
    EmptyTrace,
    HashConstructionFailed,
    IdentifierMapping,
    IdentifierOutOfRange,
    UniversalHashDispatcher,
    build_dispatcher,
    generate_switch_source,
    linear_scan,
    linear_scan_indices,
    measure_dispatch,
)
from ptgflow.dispatch.trees import group_identifiers
from ptgflow.io.scenario import fragmented_mapping, randomized_trace

S = DispatchStrategy
LISTING = {0x0800: "IP", 0x0806: "ARP", 0x8100: "VLAN", 0x86DD: "IP"}


def brute(pairs, ident):
    """Independent oracle: last entry with a matching key (keys are unique)."""
    hit = [ref for key, ref in pairs if key == ident]
    return hit[0] if hit else None


mappings16 = st.dictionaries(st.integers(0, 0xFFFF), st.sampled_from("ABCDEFG"), min_size=1, max_size=60)
mappings32 = st.dictionaries(st.integers(0, 0xFFFFFFFF), st.sampled_from("ABCDEFG"), min_size=1, max_size=40)


@pytest.mark.parametrize("strategy", ALL_STRATEGIES, ids=lambda s: s.value)
def test_listing_mapping(strategy):
    d = build_dispatcher(LISTING, strategy)
    assert d.lookup(0x0800) == "IP"
    assert d.lookup(0x86DD) == "IP"
    assert d.lookup(0x4242) is None
    assert d.build_ns > 0 and d.storage_bytes > 0


@pytest.mark.parametrize("strategy", ALL_STRATEGIES, ids=lambda s: s.value)
def test_duplicates_and_empty_rejected(strategy):
    with pytest.raises(DuplicateIdentifier):
        build_dispatcher([(0x0800, "IP"), (0x0800, "ARP")], strategy)
    with pytest.raises(EmptyMapping):
        build_dispatcher({}, strategy)


@pytest.mark.parametrize("strategy", ALL_STRATEGIES, ids=lambda s: s.value)
@settings(max_examples=60, deadline=None)
@given(m=mappings16, probes=st.lists(st.integers(-5, 0x1_0005), max_size=50))
def test_scalar_and_bulk_agree_with_oracle(strategy, m, probes):
    pairs = list(m.items())
    d = build_dispatcher(pairs, strategy, seed=3)
    probes = probes + [k for k, _ in pairs]
    assert [d.lookup(x) for x in probes] == [brute(pairs, x) for x in probes]
    idx = d.lookup_indices(np.array(probes))
    refs = d.mapping.refs
    assert [None if i < 0 else refs[i] for i in idx] == [brute(pairs, x) for x in probes]


@pytest.mark.parametrize("strategy", [s for s in ALL_STRATEGIES if s is not S.STATIC_ARRAY], ids=lambda s: s.value)
@settings(max_examples=40, deadline=None)
@given(m=mappings32, probes=st.lists(st.integers(0, 0xFFFFFFFF), max_size=30))
def test_wide_identifiers(strategy, m, probes):
    pairs = list(m.items())
    try:
        d = build_dispatcher(pairs, strategy)
    except IdentifierOutOfRange:
        assert strategy is S.DYNAMIC_ARRAY  # span cap
        return
    probes = probes + [k for k, _ in pairs]
    assert [d.lookup(x) for x in probes] == [brute(pairs, x) for x in probes]


def test_linear_scan_helpers():
    m = IdentifierMapping(LISTING)
    assert linear_scan(m, 0x0806) == "ARP"
    assert linear_scan(m, 1) is None
    got = linear_scan_indices(m, np.array([0x0800, 7, 0x86DD]))
    assert list(got) == [m.ref_index("IP"), -1, m.ref_index("IP")]


def test_full_sweep_sample():
    rng = np.random.default_rng(1)
    sweep = np.arange(1 << 16)
    for trial in range(40):
        ids = rng.choice(1 << 16, int(rng.integers(1, 80)), replace=False)
        m = IdentifierMapping([(int(x), f"r{int(x) % 5}") for x in ids])
        want = linear_scan_indices(m, sweep)
        for s in ALL_STRATEGIES:
            assert np.array_equal(build_dispatcher(m, s, seed=trial).lookup_indices(sweep), want), s


def test_lookup_indices_out_buffer():
    d = build_dispatcher(LISTING, S.TREE_MAP)
    ids = np.array([0x0800, 1, 0x8100])
    out = np.empty(3, dtype=np.int64)
    assert d.lookup_indices(ids, out) is out
    with pytest.raises(ValueError):
        d.lookup_indices(ids, np.empty(2, dtype=np.int64))
    with pytest.raises(ValueError):
        d.lookup_indices(ids, np.empty(3, dtype=np.int32))


def test_static_array_layout():
    d = build_dispatcher({5: "X"}, S.STATIC_ARRAY)
    assert d.slot_count == 65536
    assert d.storage_bytes == 65536 * 8
    assert sum(d.lookup(i) is not None for i in range(65536)) == 1
    with pytest.raises(IdentifierOutOfRange):
        build_dispatcher({0x10000: "X"}, S.STATIC_ARRAY)


def test_dynamic_array_trimmed():
    d = build_dispatcher({0x0800: "IP", 0x0806: "ARP"}, S.DYNAMIC_ARRAY)
    assert (d.offset, d.slot_count) == (0x0800, 7)


@settings(max_examples=100, deadline=None)
@given(m=mappings16)
def test_dynamic_array_span(m):
    d = build_dispatcher(m, S.DYNAMIC_ARRAY)
    assert d.slot_count == max(m) - min(m) + 1


@settings(max_examples=100, deadline=None)
@given(m=mappings32, seed=st.integers(0, 1000))
def test_universal_and_perfect_are_collision_free(m, seed):
    for s in (S.UNIVERSAL_HASH, S.PERFECT_HASH):
        d = build_dispatcher(m, s, seed=seed)
        slots = [d.slot_of(k) for k in m]
        assert len(set(slots)) == len(slots)
    assert build_dispatcher(m, S.PERFECT_HASH).storage_bytes > 0


def test_universal_multiplier_and_table():
    d = build_dispatcher({i * 7: i for i in range(100)}, S.UNIVERSAL_HASH, seed=1)
    assert d.multiplier % 2 == 1
    assert d.table_size == 2 ** (math.ceil(math.log2(100)) + 2)


def test_universal_budget_exhaustion():
    with pytest.raises(HashConstructionFailed):
        UniversalHashDispatcher(IdentifierMapping({i: i for i in range(64)}), max_attempts=1, extra_bits=0)


@pytest.mark.parametrize("strategy", ALL_STRATEGIES, ids=lambda s: s.value)
def test_determinism(strategy):
    m = fragmented_mapping(5)
    a = build_dispatcher(m, strategy, seed=9)
    b = build_dispatcher(m, strategy, seed=9)
    sweep = np.arange(1 << 16)
    assert np.array_equal(a.lookup_indices(sweep), b.lookup_indices(sweep))
    assert a.storage_bytes == b.storage_bytes
    if strategy is S.UNIVERSAL_HASH:
        assert a.multiplier == b.multiplier


def test_tree_map_balanced():
    d = build_dispatcher({i: i for i in range(1000)}, S.TREE_MAP)
    assert d.black_height_ok()
    assert d.height() <= 2 * math.log2(1001)


def test_array_tree_grouping():
    assert group_identifiers([1, 2, 10, 40, 41]) == [(1, 10), (40, 41)]
    assert group_identifiers([0, 16, 33]) == [(0, 16), (33, 33)]
    d = ArrayTreeDispatcher(IdentifierMapping({0x0800: "IP", 0x0806: "ARP", 0x86DD: "IP6"}))
    assert d.node_count == 2


def test_cuckoo_rehash_counter():
    d = build_dispatcher({i: i for i in range(500)}, S.CUCKOO_HASH, seed=2)
    assert d.rehashes >= 0
    assert all(d.lookup(i) == i for i in range(500))


def test_switch_source_is_python():
    src = generate_switch_source(IdentifierMapping(LISTING))
    assert src.startswith("def dispatch(ident):")
    compile(src, "<t>", "exec")


def test_strategy_parse():
    assert DispatchStrategy.parse("dynamic_array") is S.DYNAMIC_ARRAY
    assert DispatchStrategy.parse("HardCodedSwitch") is S.HARD_CODED_SWITCH
    with pytest.raises(ValueError):
        DispatchStrategy.parse("bloom")


def test_measure_counts_every_lookup():
    d = build_dispatcher(LISTING, S.DYNAMIC_ARRAY)
    t = measure_dispatch(d, [1, 0x0800, 0x0806] * 3)
    assert (t.lookups, t.hits, t.misses) == (9, 6, 3)
    assert t.total_ns >= 0 and t.mean_ns == t.total_ns / 9
    with pytest.raises(EmptyTrace):
        measure_dispatch(d, [])


def test_randomized_miss_count_is_binomial():
    m = fragmented_mapping(0)
    trace = randomized_trace(300_000, seed=4)
    t = measure_dispatch(build_dispatcher(m, S.DYNAMIC_ARRAY), trace)
    covered = sum(1 for k in m if 1 <= k <= 10_000) / 10_000
    n = t.lookups
    mean = (1 - covered) * n
    sigma = math.sqrt(n * covered * (1 - covered))
    assert abs(t.misses - mean) <= 3 * sigma
