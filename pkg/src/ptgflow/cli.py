"""Command-line entry point: ``ptgflow analyze`` and ``ptgflow bench``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from ptgflow.dispatch import DispatchStrategy
from ptgflow.engine import PacketContext, ParseError, UnknownAnalyzer, build_manager, load_config
from ptgflow.io.pcap import CaptureRecord, PcapError, read_pcap
from ptgflow.policy import AlertSink, PolicyEngine
from ptgflow.telemetry import EventLogWriter, write_unknown_log

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INPUT = 2

log = logging.getLogger("ptgflow")


def _setup_logging() -> None:
    level = os.environ.get("PTGFLOW_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def cmd_analyze(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config)
        manager = build_manager(config, args.dispatcher)
    except (OSError, ParseError, UnknownAnalyzer, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        reader = read_pcap(args.input)
    except (OSError, PcapError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    packets = layers = events = bad = 0
    per_packet: list[int] = []
    with EventLogWriter(out) as ev_log, AlertSink(out) as alerts:
        policy = PolicyEngine.from_config(config, sink=alerts)
        for rec in reader:
            if not isinstance(rec, CaptureRecord):
                log.warning("skipping record at offset %d: %s", rec.offset, rec.reason)
                bad += 1
                continue
            ctx = manager.process_packet(PacketContext(rec.data, rec.link_type, rec.ts))
            packets += 1
            layers += len(ctx.layers)
            per_packet.append(len(ctx.layers))
            for ev in ctx.events:
                ev_log.write(ev)
                policy.feed(ev)
            events += len(ctx.events)
        alert_count = alerts.count
    unknown = manager.unknown_log
    write_unknown_log(unknown.records, out)
    summary = {
        "packets": packets,
        "layers": layers,
        "events": events,
        "unknowns": unknown.seen,
        "unknowns_logged": len(unknown.records),
        "alerts": alert_count,
        "bad_records": bad,
        "layers_per_packet": per_packet,
    }
    print(json.dumps(summary) if args.json else _format_summary(summary))
    return EXIT_INPUT if bad and not packets else EXIT_OK


SHOW_PER_PACKET = 20


def _format_summary(s: dict) -> str:
    keys = ("packets", "layers", "events", "unknowns", "alerts")
    text = "  ".join(f"{k}={s[k]}" for k in keys)
    if s["packets"] <= SHOW_PER_PACKET:
        text += "\nlayers per packet: " + " ".join(map(str, s["layers_per_packet"]))
    return text


def cmd_bench_dispatch(args: argparse.Namespace) -> int:
    from ptgflow.bench import bench_dispatch, format_table, write_csv

    try:
        cells = bench_dispatch(args.mapping, args.traffic, args.pdus, args.seed, args.reps)
    except ValueError as exc:  # includes EmptyTrace when pdus < 3
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    rows = [c.row() for c in cells]
    print(format_table(rows), end="")
    if args.csv:
        write_csv(rows, args.csv)
    return EXIT_OK


def cmd_bench_pipeline(args: argparse.Namespace) -> int:
    from ptgflow.bench import PIPELINE_COLUMNS, bench_pipeline, format_table

    try:
        result = bench_pipeline(args.pdus, args.seed, args.reps)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(f"packets={result.packets} pdus={result.pdus} identical_output={result.identical}")
    print(format_table(result.rows(), PIPELINE_COLUMNS), end="")
    return EXIT_OK


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _strategy(text: str) -> str:
    try:
        return DispatchStrategy.parse(text).value
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ptgflow", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run the engine over a pcap file")
    a.add_argument("--input", required=True, help="classic pcap file")
    a.add_argument("--config", help="JSON configuration (default: shipped default.json)")
    a.add_argument("--out", required=True, help="directory for the log files")
    a.add_argument("--dispatcher", type=_strategy, help="transition table strategy override")
    a.add_argument("--json", action="store_true", help="print the summary as JSON")
    a.set_defaults(func=cmd_analyze)

    b = sub.add_parser("bench", help="benchmarks")
    bsub = b.add_subparsers(dest="bench", required=True)
    d = bsub.add_parser("dispatch", help="compare dispatch data structures")
    d.add_argument("--mapping", choices=("concise", "fragmented", "all"), default="all")
    d.add_argument("--traffic", choices=("realistic", "randomized", "all"), default="all")
    d.add_argument("--pdus", type=_positive, default=1_000_000)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--reps", type=_positive, default=10)
    d.add_argument("--csv", help="also write the table as CSV")
    d.set_defaults(func=cmd_bench_dispatch)

    pl = bsub.add_parser("pipeline", help="modular vs hard-coded packet walk")
    pl.add_argument("--pdus", type=int, default=1_000_000)
    pl.add_argument("--seed", type=int, default=0)
    pl.add_argument("--reps", type=_positive, default=10)
    pl.set_defaults(func=cmd_bench_pipeline)
    return p


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
