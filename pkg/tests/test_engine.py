from __future__ import annotations

import json
from importlib import resources

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import encoders as enc
from ptgflow.analyzers import CATALOG
from ptgflow.analyzers.link import EthernetAnalyzer
from ptgflow.dispatch import ALL_STRATEGIES
from ptgflow.engine import (
    MALFORMED_EVENT,
    Analyzer,
    AnalyzerManager,
    DuplicateName,
    Forward,
    Malformed,
    ParseError,
    Registration,
    Terminal,
    UnknownAnalyzer,
    build_manager,
    load_config,
    parse_config,
)
from ptgflow.engine.config import parse_identifier
from ptgflow.telemetry import UnknownProtocolLog

UDP4 = enc.ipv4(17, enc.udp(payload=b"hi"))


def default_raw() -> dict:
    return json.loads(resources.files("ptgflow.engine").joinpath("default.json").read_text())


@pytest.fixture(scope="module")
def manager():
    return build_manager(load_config())


class Stub(Analyzer):
    def __init__(self, name, consume=1, next_id=None):
        super().__init__()
        self.name = name
        self.consume = consume
        self.next_id = next_id

    def analyze(self, ctx, data):
        if self.next_id is None:
            return Terminal(min(self.consume, len(data)))
        if len(data) < self.consume:
            return Malformed("short")
        return Forward(self.next_id, self.consume)


# -- registry ----------------------------------------------------------------


def test_dense_tags_and_duplicates():
    m = AnalyzerManager()
    assert m.register_analyzer(Stub("ETHERNET")).id == 0
    assert m.register_analyzer(Stub("VLAN")).id == 1
    with pytest.raises(DuplicateName):
        m.register_analyzer(Stub("ETHERNET"))
    assert [t.name for t in m.tags] == ["ETHERNET", "VLAN"]


def test_transition_needs_known_analyzers():
    m = AnalyzerManager()
    m.register_analyzer(Stub("A"))
    with pytest.raises(UnknownAnalyzer):
        m.register_transition("A", 1, "NOPE")
    with pytest.raises(UnknownAnalyzer):
        m.register_transition("NOPE", 1, "A")
    m.register_transition("ROOT", 1, "A")
    m.register_transition(Registration("A", 1, "A"))  # self loop
    assert ("A", 1, "A") in m.edges()


def test_last_registration_wins():
    m = AnalyzerManager()
    for n in ("P", "X", "Y"):
        m.register_analyzer(Stub(n, next_id=None if n != "P" else 5))
    m.register_transition("ROOT", 1, "P")
    m.register_transition("P", 5, "X")
    m.register_transition("P", 5, "Y")
    assert m.transitions("P") == {5: "Y"}
    assert m.process(b"\0\0").layer_names == ["P", "Y"]


def test_default_registry_contents(manager):
    wanted = {"ETHERNET", "VLAN", "MPLS", "PPPOE", "PPP", "ARP", "IP", "GRE", "SKIP", "GOOSE", "PROFINET"}
    assert wanted <= set(manager.names)
    edges = manager.edges()
    assert ("ETHERNET", 0x8847, "MPLS") in edges
    assert ("ETHERNET", 0x88B8, "GOOSE") in edges
    assert ("VLAN", 0x8100, "VLAN") in edges
    assert ("ETHERNET", 0x0800, "IP") in edges


def test_single_instantiation(manager):
    a = manager.analyzer("IP")
    manager.process(enc.ethernet(0x0800, UDP4))
    assert manager.analyzer("IP") is a
    assert manager.analyzer("ETHERNET").transitions.lookup(0x0800) is a


# -- configuration -----------------------------------------------------------


def test_identifier_parsing():
    assert parse_identifier("0x8847") == 0x8847
    assert parse_identifier("2048") == 2048
    assert parse_identifier(17) == 17
    for bad in (True, -1, 1 << 32, "0xZZ", 1.5):
        with pytest.raises(ParseError):
            parse_identifier(bad)


def test_config_errors_carry_position():
    with pytest.raises(ParseError) as info:
        parse_config('{\n  "enabled": [\n  "IP",\n}')
    assert info.value.line is not None
    raw = default_raw()
    raw["registrations"].append({"parent": "ETHERNET", "id": 1, "child": "NOPE"})
    with pytest.raises(UnknownAnalyzer):
        parse_config(json.dumps(raw))
    raw = default_raw()
    raw["options"]["skip"] = {"bytes": 0}
    with pytest.raises(ParseError):
        parse_config(json.dumps(raw))
    with pytest.raises(ParseError):
        parse_config('{"surprise": 1}')


def test_disabled_child_rejected():
    raw = default_raw()
    raw["enabled"].remove("GOOSE")
    with pytest.raises(UnknownAnalyzer):
        parse_config(json.dumps(raw))


def test_only_ethernet_and_arp():
    raw = {
        "enabled": ["ETHERNET", "ARP"],
        "registrations": [
            {"parent": "ROOT", "id": 1, "child": "ETHERNET"},
            {"parent": "ETHERNET", "id": "0x0806", "child": "ARP"},
        ],
    }
    m = build_manager(parse_config(json.dumps(raw)))
    ctx = m.process(enc.ethernet(0x0800, UDP4))
    assert ctx.layer_names == ["ETHERNET"]
    assert [(r.analyzer, r.identifier) for r in ctx.failures] == [("ETHERNET", 0x0800)]
    assert m.process(enc.ethernet(0x0806, enc.arp(1))).layer_names == ["ETHERNET", "ARP"]
    assert "IP" not in m


def test_dotted_options_and_dispatcher_choice():
    raw = default_raw()
    raw["options"] = {"skip.bytes": 2, "unknown.threshold": 9}
    raw["dispatcher"] = "TreeMap"
    cfg = parse_config(json.dumps(raw))
    assert cfg.section("skip")["bytes"] == 2
    assert cfg.throttle.threshold == 9
    m = build_manager(cfg)
    assert m.strategy.value == "TreeMap"


# -- walk --------------------------------------------------------------------


def test_qinq(manager):
    frame = enc.ethernet(0x88A8, enc.vlan(0x8100, enc.vlan(0x0800, UDP4, vid=2), vid=1))
    ctx = manager.process(frame)
    assert ctx.layer_names == ["ETHERNET", "VLAN", "VLAN", "IP", "UDP"]
    spans = [(layer.start, layer.end) for layer in ctx.layers]
    assert spans == [(0, 14), (14, 18), (18, 22), (22, 42), (42, 50)]


def test_unknown_ethertype(manager):
    log = UnknownProtocolLog()
    m = build_manager(load_config())
    m.unknown_log = log
    ctx = m.process(enc.ethernet(0x9999, b"\xde\xad"))
    assert ctx.layer_names == ["ETHERNET"]
    assert [(r.analyzer, r.identifier, r.snap) for r in ctx.failures] == [("ETHERNET", 0x9999, b"\xde\xad")]


def test_unknown_link_type(manager):
    ctx = manager.process(b"\0" * 20, link_type=4242)
    assert ctx.layers == [] and ctx.failures[0].analyzer == "ROOT"


def test_truncated_after_vlan(manager):
    ctx = manager.process(enc.ethernet(0x8100, enc.vlan(0x0800)))
    assert ctx.layer_names == ["ETHERNET", "VLAN"]
    assert [e.name for e in ctx.events] == [MALFORMED_EVENT]
    assert ctx.events[0].fields["analyzer"] == "IP"


def test_non_consuming_forward_is_malformed():
    m = AnalyzerManager()
    m.register_analyzer(Stub("Z", consume=0, next_id=1))
    m.register_transition("ROOT", 1, "Z")
    m.register_transition("Z", 1, "Z")
    ctx = m.process(b"abc")
    assert ctx.layers == [] and ctx.events[0].name == MALFORMED_EVENT


@settings(max_examples=200, deadline=None)
@given(raw=st.binary(min_size=1, max_size=64), consume=st.integers(1, 3))
def test_cyclic_graph_terminates(raw, consume):
    m = AnalyzerManager()
    m.register_analyzer(Stub("LOOP", consume=consume, next_id=7))
    m.register_transition("ROOT", 1, "LOOP")
    m.register_transition("LOOP", 7, "LOOP")
    ctx = m.process(raw)
    assert len(ctx.layers) <= len(raw)
    assert len(ctx.layers) == len(raw) // consume


@pytest.mark.parametrize("strategy", ALL_STRATEGIES, ids=lambda s: s.value)
def test_walk_independent_of_strategy(strategy):
    m = build_manager(load_config(), strategy)
    frame = enc.ethernet(0x8847, enc.mpls([5, 6], enc.ethernet(0x0800, enc.ipv4(6, enc.tcp()))))
    assert m.process(frame).layer_names == ["ETHERNET", "MPLS", "ETHERNET", "IP", "TCP"]


def test_layers_increase(manager):
    frame = enc.ethernet(0x8864, enc.pppoe(0x21, enc.ipv4(47, enc.gre(0x0800, UDP4, key=3))))
    ctx = manager.process(frame)
    assert ctx.layer_names == ["ETHERNET", "PPPOE", "IP", "GRE", "IP", "UDP"]
    for a, b in zip(ctx.layers, ctx.layers[1:]):
        assert a.start < a.end <= b.start


def test_context_unambiguous():
    """The same identifier resolves per parent."""
    m = build_manager(load_config())
    m.register_analyzer(Stub("ODD", next_id=0x21, consume=1))
    m.register_analyzer(Stub("OTHER"))
    m.register_transition("ROOT", 200, "ODD")
    m.register_transition("ODD", 0x21, "OTHER")
    assert m.process(b"\x00\x00", link_type=200).layer_names == ["ODD", "OTHER"]
    ppp = enc.ppp(0x21, UDP4)
    assert m.process(ppp, link_type=9).layer_names == ["PPP", "IP", "UDP"]


def test_plugin_between_ethernet_and_ip():
    class Shim(Analyzer):
        name = "SHIM"

        def analyze(self, ctx, data):
            return Forward(0x0800, 2) if len(data) > 2 else Malformed("short")

    m = build_manager(load_config())
    m.register_analyzer(Shim())
    m.register_transition("ETHERNET", 0x88B5, "SHIM")
    m.register_transition("SHIM", 0x0800, "IP")
    assert m.process(enc.ethernet(0x88B5, b"\0\0" + UDP4)).layer_names == ["ETHERNET", "SHIM", "IP", "UDP"]


def test_skip_configured():
    raw = default_raw()
    raw["options"]["skip"] = {"bytes": 6}
    raw["registrations"].append({"parent": "ROOT", "id": 147, "child": "SKIP"})
    m = build_manager(parse_config(json.dumps(raw)))
    ctx = m.process(b"\1" * 6 + enc.ethernet(0x0800, UDP4), link_type=147)
    assert ctx.layer_names == ["SKIP", "ETHERNET", "IP", "UDP"]
    assert ctx.layers[0].end == 6


def test_catalog_names_match_classes():
    for name, kind in CATALOG.items():
        assert kind.name == name
    assert isinstance(CATALOG["ETHERNET"](), EthernetAnalyzer)
