"""Modular packet-level analysis driven by a protocol transition graph."""

__version__ = "0.1.0"
