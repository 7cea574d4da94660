"""Capture files, CSV layer traces and synthetic benchmark inputs."""

from .pcap import BadMagic, CaptureRecord, PcapError, PcapReader, TruncatedRecord, read_pcap, write_pcap
from .scenario import (
    BenchScenario,
    MappingKind,
    TrafficKind,
    concise_mapping,
    fragmented_mapping,
    generate_scenario,
    randomized_trace,
    realistic_trace,
)
from .trace import LayerTrace, parse_layer_trace, read_layer_trace, write_layer_trace

__all__ = [
    "BadMagic",
    "BenchScenario",
    "CaptureRecord",
    "LayerTrace",
    "MappingKind",
    "PcapError",
    "PcapReader",
    "TrafficKind",
    "TruncatedRecord",
    "concise_mapping",
    "fragmented_mapping",
    "generate_scenario",
    "parse_layer_trace",
    "randomized_trace",
    "read_layer_trace",
    "read_pcap",
    "realistic_trace",
    "write_layer_trace",
    "write_pcap",
]
