"""Built-in packet-level analyzers, keyed by their registry name."""

from __future__ import annotations

from ptgflow.engine.analyzer import Analyzer

from .goose import GooseAnalyzer
from .ip import GreAnalyzer, IpAnalyzer, TcpAnalyzer, UdpAnalyzer
from .link import (
    ArpAnalyzer,
    EthernetAnalyzer,
    LinuxSllAnalyzer,
    MplsAnalyzer,
    NullAnalyzer,
    PppAnalyzer,
    PppoeAnalyzer,
    SkipAnalyzer,
    VlanAnalyzer,
)
from .profinet import ProfinetAnalyzer

CATALOG: dict[str, type[Analyzer]] = {
    cls.name: cls
    for cls in (
        EthernetAnalyzer,
        VlanAnalyzer,
        MplsAnalyzer,
        PppoeAnalyzer,
        PppAnalyzer,
        ArpAnalyzer,
        IpAnalyzer,
        GreAnalyzer,
        TcpAnalyzer,
        UdpAnalyzer,
        SkipAnalyzer,
        LinuxSllAnalyzer,
        NullAnalyzer,
        GooseAnalyzer,
        ProfinetAnalyzer,
    )
}

__all__ = ["CATALOG", *(cls.__name__ for cls in CATALOG.values())]
