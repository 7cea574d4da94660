"""JSON configuration: enabled analyzers, registrations and per-analyzer options."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from ptgflow.telemetry import ThrottleConfig, UnknownProtocolLog

from .analyzer import ROOT, Registration
from .manager import AnalyzerManager, UnknownAnalyzer

DEFAULT_CONFIG = "default.json"


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.field = field


def parse_identifier(value: Any, field: str = "id") -> int:
    """Decimal integers or ``"0x"``-prefixed hex strings."""
    if isinstance(value, bool):
        raise ParseError(f"identifier must be a number, got {value!r}", field=field)
    if isinstance(value, int):
        ident = value
    elif isinstance(value, str):
        text = value.strip().lower()
        try:
            ident = int(text, 16) if text.startswith("0x") else int(text, 10)
        except ValueError:
            raise ParseError(f"bad identifier {value!r}", field=field) from None
    else:
        raise ParseError(f"identifier must be an integer or string, got {value!r}", field=field)
    if not 0 <= ident <= 0xFFFFFFFF:
        raise ParseError(f"identifier {ident} outside the 32-bit range", field=field)
    return ident


def _flatten_options(raw: dict[str, Any]) -> dict[str, dict[str, Any]]:
    """Accept both ``{"skip": {"bytes": 4}}`` and ``{"skip.bytes": 4}``."""
    out: dict[str, dict[str, Any]] = {}
    for key, value in raw.items():
        if isinstance(value, dict):
            out.setdefault(key.lower(), {}).update(value)
        elif "." in key:
            section, name = key.split(".", 1)
            out.setdefault(section.lower(), {})[name] = value
        else:
            raise ParseError("options must be grouped per analyzer", field=f"options.{key}")
    return out


@dataclass
class Configuration:
    enabled: list[str]
    registrations: list[Registration]
    options: dict[str, dict[str, Any]] = field(default_factory=dict)
    dispatcher: str | None = None

    def section(self, name: str) -> dict[str, Any]:
        return self.options.get(name.lower(), {})

    @property
    def throttle(self) -> ThrottleConfig:
        sec = self.section("unknown")
        defaults = ThrottleConfig()
        try:
            return ThrottleConfig(
                threshold=int(sec.get("threshold", defaults.threshold)),
                sampling_rate=int(sec.get("sampling_rate", defaults.sampling_rate)),
                duration=float(sec.get("duration_secs", defaults.duration)),
                snap_bytes=int(sec.get("snap_bytes", defaults.snap_bytes)),
            )
        except (TypeError, ValueError) as exc:
            raise ParseError(str(exc), field="options.unknown") from None

    def detect(self, name: str, default: Any = True) -> Any:
        return self.section("detect").get(name, default)


def parse_config(text: str, catalog: dict[str, type] | None = None) -> Configuration:
    if catalog is None:
        from ptgflow.analyzers import CATALOG as catalog
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("configuration must be a JSON object", line=1)
    unknown_keys = set(doc) - {"enabled", "registrations", "options", "dispatcher"}
    if unknown_keys:
        raise ParseError("unknown top-level key", field=sorted(unknown_keys)[0])

    enabled = doc.get("enabled", sorted(catalog))
    if not isinstance(enabled, list) or not all(isinstance(n, str) for n in enabled):
        raise ParseError("enabled must be a list of analyzer names", field="enabled")
    for name in enabled:
        if name not in catalog:
            raise UnknownAnalyzer(f"enabled analyzer {name} does not exist")
    active = set(enabled)

    regs = []
    for i, item in enumerate(doc.get("registrations", [])):
        where = f"registrations[{i}]"
        if not isinstance(item, dict) or set(item) != {"parent", "id", "child"}:
            raise ParseError("registration needs exactly parent, id and child", field=where)
        parent, child = item["parent"], item["child"]
        ident = parse_identifier(item["id"], f"{where}.id")
        for role, name in (("parent", parent), ("child", child)):
            if name == ROOT and role == "parent":
                continue
            if name not in active:
                state = "disabled" if name in catalog else "unknown"
                raise UnknownAnalyzer(f"{where}.{role} names {state} analyzer {name!r}")
        regs.append(Registration(parent, ident, child))

    raw_opts = doc.get("options", {})
    if not isinstance(raw_opts, dict):
        raise ParseError("options must be an object", field="options")
    options = _flatten_options(raw_opts)
    skip = options.get("skip", {})
    if "bytes" in skip:
        n = skip["bytes"]
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ParseError("skip.bytes must be a positive integer", field="options.skip.bytes")
    if "default_child" in options.get("mpls", {}):
        options["mpls"]["default_child"] = parse_identifier(options["mpls"]["default_child"], "options.mpls.default_child")

    dispatcher = doc.get("dispatcher")
    if dispatcher is not None and not isinstance(dispatcher, str):
        raise ParseError("dispatcher must be a strategy name", field="dispatcher")
    cfg = Configuration(list(enabled), regs, options, dispatcher)
    cfg.throttle  # validate eagerly
    return cfg


def load_config(path: str | Path | None = None) -> Configuration:
    """Read a configuration file; ``None`` loads the shipped default."""
    if path is None:
        return parse_config(resources.files(__package__).joinpath(DEFAULT_CONFIG).read_text("utf-8"))
    return parse_config(Path(path).read_text(encoding="utf-8"))


def build_manager(
    config: Configuration,
    strategy: str | None = None,
    catalog: dict[str, type] | None = None,
) -> AnalyzerManager:
    """Instantiate each enabled analyzer once and wire up its transitions."""
    if catalog is None:
        from ptgflow.analyzers import CATALOG as catalog
    strategy = strategy or config.dispatcher or "DynamicArray"
    mgr = AnalyzerManager(strategy, UnknownProtocolLog(config.throttle))
    for name in config.enabled:
        analyzer = catalog[name]()
        try:
            analyzer.configure(config.section(name))
        except (TypeError, ValueError) as exc:
            raise ParseError(str(exc), field=f"options.{name.lower()}") from None
        mgr.register_analyzer(analyzer)
    for reg in config.registrations:
        mgr.register_transition(reg)
    mgr.build()
    return mgr
