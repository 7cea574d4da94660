from __future__ import annotations

import io
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

import encoders as enc
from ptgflow.engine import ParseError, build_manager, load_config
from ptgflow.io import (
    BadMagic,
    BenchScenario,
    CaptureRecord,
    LayerTrace,
    TruncatedRecord,
    concise_mapping,
    fragmented_mapping,
    generate_scenario,
    parse_layer_trace,
    randomized_trace,
    read_layer_trace,
    read_pcap,
    realistic_trace,
    write_layer_trace,
    write_pcap,
)
from ptgflow.io.scenario import REALISTIC_MIX
from ptgflow.io.synth import realistic_frames

# -- pcap ---------------------------------------------------------------------


@pytest.mark.parametrize("order", "<>")
@pytest.mark.parametrize("nanosecond", [False, True])
def test_pcap_variants(order, nanosecond):
    frac = 250_000_000 if nanosecond else 250_000
    raw = enc.pcap_bytes([(10, frac, b"abc"), (11, 0, b"")], link_type=113, order=order, nanosecond=nanosecond)
    reader = read_pcap(io.BytesIO(raw))
    assert reader.nanosecond is nanosecond and reader.link_type == 113
    recs = list(reader)
    assert recs == [CaptureRecord(10.25, 113, b"abc", 3), CaptureRecord(11.0, 113, b"", 0)]


@pytest.mark.parametrize("raw", [b"", b"\xd4\xc3", b"\0" * 24, enc.pcap_bytes([])[:20]])
def test_bad_headers(raw):
    with pytest.raises(BadMagic):
        read_pcap(io.BytesIO(raw))


def test_truncated_records():
    good = enc.pcap_bytes([(1, 0, b"abcd")])
    recs = list(read_pcap(io.BytesIO(good[:-2])))
    assert recs == [TruncatedRecord(24, "record claims 4 bytes, 2 remain")]
    recs = list(read_pcap(io.BytesIO(good + b"\0" * 5)))
    assert type(recs[0]) is CaptureRecord and type(recs[1]) is TruncatedRecord
    bogus = enc.pcap_bytes([]) + struct.pack("<IIII", 0, 0, 4, 2) + b"wxyz" + struct.pack("<IIII", 0, 0, 1, 1) + b"q"
    recs = list(read_pcap(io.BytesIO(bogus)))
    assert type(recs[0]) is TruncatedRecord and recs[1].data == b"q"


@settings(max_examples=1000, deadline=None)
@given(
    frames=st.lists(st.tuples(st.integers(0, 2**31), st.integers(0, 999_999), st.binary(max_size=40)), max_size=5),
    order=st.sampled_from("<>"),
    nanosecond=st.booleans(),
)
def test_write_read_round_trip(tmp_path_factory, frames, order, nanosecond):
    path = tmp_path_factory.getbasetemp() / "rt.pcap"
    packets = [(sec + us * 1e-6, data) for sec, us, data in frames]
    assert write_pcap(path, packets, nanosecond=nanosecond, byte_order=order) == len(frames)
    got = list(read_pcap(path))
    assert [r.data for r in got] == [d for _, d in packets]
    for r, (sec, us, _) in zip(got, frames):
        assert abs(r.ts - (sec + us * 1e-6)) < 2e-6


def test_write_pcap_rejects_order(tmp_path):
    with pytest.raises(ValueError):
        write_pcap(tmp_path / "x.pcap", [], byte_order="!")


# -- layer traces -------------------------------------------------------------


def test_parse_layer_trace():
    t = parse_layer_trace(["1,2048,6\n", "\n", "1,2048,17\n"])
    assert t.packets == [[1, 2048, 6], [1, 2048, 17]] and t.pdu_count == 6
    with pytest.raises(ParseError) as info:
        parse_layer_trace(["1,abc"])
    assert info.value.line == 1
    with pytest.raises(ParseError):
        parse_layer_trace(["5", "1,-2"])
    with pytest.raises(ParseError):
        parse_layer_trace([str(1 << 32)])
    with pytest.raises(ValueError):
        LayerTrace([[]])


@given(packets=st.lists(st.lists(st.integers(0, 0xFFFFFFFF), min_size=1, max_size=5), max_size=20))
@settings(deadline=None)
def test_trace_file_round_trip(tmp_path_factory, packets):
    path = tmp_path_factory.getbasetemp() / "t.csv"
    write_layer_trace(LayerTrace(packets), path)
    assert read_layer_trace(path).packets == packets


# -- scenarios ----------------------------------------------------------------


def test_scenarios_deterministic():
    s = BenchScenario("fragmented", "randomized", 3000, seed=7)
    a, b = generate_scenario(s), generate_scenario(s)
    assert list(a[0]) == list(b[0]) and a[1].packets == b[1].packets
    assert randomized_trace(3000, 8).packets != a[1].packets


def test_randomized_shape():
    assert randomized_trace(9).packets and [len(p) for p in randomized_trace(9).packets] == [3, 3, 3]
    assert randomized_trace(10).pdu_count == 9
    flat = randomized_trace(3000).flat()
    assert min(flat) >= 1 and max(flat) <= 10_000


def test_fragmented_extends_concise():
    concise = set(concise_mapping())
    frag = fragmented_mapping(0)
    assert len(frag) == len(concise) + 100
    assert concise <= set(frag)
    assert list(fragmented_mapping(1)) != list(frag)


@pytest.mark.parametrize("n", [0, 2, 3, 1000, 12345])
def test_equal_pdu_totals(n):
    assert realistic_trace(n).pdu_count == randomized_trace(n).pdu_count == n - n % 3


def test_randomized_uniform():
    flat = np.array(randomized_trace(1_000_000, seed=0).flat())
    counts = np.bincount(flat, minlength=10_001)[1:]
    assert stats.chisquare(counts).pvalue > 0.01


def test_realistic_mix_composition():
    t = realistic_trace(300_000)
    layouts = {ids: share for share, ids in REALISTIC_MIX}
    seen = [tuple(p) for p in t.packets[:-1]]
    assert set(seen) <= set(layouts)
    for ids, share in layouts.items():
        assert abs(seen.count(ids) / len(seen) - share) < 0.01


def test_realistic_frames_walk_default_graph():
    m = build_manager(load_config())
    frames = realistic_frames(3000)
    layers = [len(m.process(f).layers) for f in frames]
    assert sum(layers) >= 3000
    assert set(layers) <= {len(ids) for _, ids in REALISTIC_MIX}
