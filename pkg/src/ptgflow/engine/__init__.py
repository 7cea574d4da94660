"""Analyzer contract, registry and the per-packet transition-graph walk."""

from .analyzer import (
    NO_TRANSITIONS,
    ROOT,
    AnalyzeOutcome,
    Analyzer,
    AnalyzerTag,
    Event,
    Forward,
    Layer,
    Malformed,
    PacketContext,
    Registration,
    Terminal,
)
from .config import Configuration, ParseError, build_manager, load_config, parse_config, parse_identifier
from .manager import MALFORMED_EVENT, AnalyzerManager, DuplicateName, RegistryError, UnknownAnalyzer, process_packet

__all__ = [
    "MALFORMED_EVENT",
    "NO_TRANSITIONS",
    "ROOT",
    "AnalyzeOutcome",
    "Analyzer",
    "AnalyzerManager",
    "AnalyzerTag",
    "Configuration",
    "DuplicateName",
    "Event",
    "Forward",
    "Layer",
    "Malformed",
    "PacketContext",
    "ParseError",
    "Registration",
    "RegistryError",
    "Terminal",
    "UnknownAnalyzer",
    "build_manager",
    "load_config",
    "parse_config",
    "parse_identifier",
    "process_packet",
]
