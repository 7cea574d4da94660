"""Dispatch data-structure and end-to-end pipeline benchmarks."""

from __future__ import annotations

import csv
import gc
import hashlib
import math
import statistics
import time
import tracemalloc
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

from scipy import stats

from ptgflow.dispatch import ALL_STRATEGIES, DispatchStrategy, build_dispatcher, measure_dispatch
from ptgflow.engine.analyzer import PacketContext
from ptgflow.engine.config import Configuration, build_manager, load_config
from ptgflow.hardcoded import HardCodedStack
from ptgflow.io.scenario import BenchScenario, MappingKind, TrafficKind, generate_scenario
from ptgflow.io.synth import realistic_frames
from ptgflow.telemetry import format_event

DEFAULT_REPS = 10
CONFIDENCE = 0.95


def t_interval(samples: Sequence[float], level: float = CONFIDENCE) -> float | None:
    """Half-width of the Student-t confidence interval of the mean."""
    n = len(samples)
    if n < 2:
        return None
    sem = statistics.stdev(samples) / math.sqrt(n)
    return float(stats.t.ppf((1 + level) / 2, n - 1) * sem)


# -- dispatch ---------------------------------------------------------------


@dataclass(frozen=True)
class DispatchCell:
    strategy: DispatchStrategy
    scenario: BenchScenario
    samples_ns: tuple[int, ...]
    build_ns: int
    storage_bytes: int
    lookups: int
    hits: int

    @property
    def mean_ms(self) -> float:
        return statistics.fmean(self.samples_ns) / 1e6

    @property
    def ci_ms(self) -> float | None:
        return t_interval([s / 1e6 for s in self.samples_ns])

    @property
    def ci_bounds_ms(self) -> tuple[float, float] | None:
        half = self.ci_ms
        return None if half is None else (self.mean_ms - half, self.mean_ms + half)

    def row(self) -> dict[str, str]:
        ci = self.ci_ms
        return {
            "strategy": self.strategy.value,
            "mapping": self.scenario.mapping_kind.value,
            "traffic": self.scenario.traffic_kind.value,
            "reps": str(len(self.samples_ns)),
            "mean_ms": f"{self.mean_ms:.3f}",
            "ci95_ms": "" if ci is None else f"{ci:.3f}",
            "build_us": f"{self.build_ns / 1e3:.1f}",
            "storage_bytes": str(self.storage_bytes),
            "lookups": str(self.lookups),
            "hits": str(self.hits),
        }


COLUMNS = ("strategy", "mapping", "traffic", "reps", "mean_ms", "ci95_ms", "build_us", "storage_bytes", "lookups", "hits")


def _kinds(value: str, enum_type):
    return list(enum_type) if value == "all" else [enum_type(value)]


def bench_dispatch(
    mapping: str = "all",
    traffic: str = "all",
    pdus: int = 1_000_000,
    seed: int = 0,
    reps: int = DEFAULT_REPS,
    strategies: Iterable[DispatchStrategy | str] = ALL_STRATEGIES,
    warmup: bool = True,
) -> list[DispatchCell]:
    """Time every strategy on every requested (mapping, traffic) cell.

    Within a cell the repetitions are interleaved round-robin over the
    strategies so that slow drift in machine speed hits all of them alike.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    strategies = [DispatchStrategy.parse(s) for s in strategies]
    cells = []
    for mk in _kinds(mapping, MappingKind):
        for tk in _kinds(traffic, TrafficKind):
            scenario = BenchScenario(mk, tk, pdus, seed)
            m, trace = generate_scenario(scenario)
            ids = trace.flat()
            built = [build_dispatcher(m, s, seed=seed) for s in strategies]
            if warmup:
                for d in built:
                    measure_dispatch(d, ids)
            samples: list[list[int]] = [[] for _ in built]
            hits = [0] * len(built)
            for _ in range(reps):
                for i, d in enumerate(built):
                    gc.collect()
                    t = measure_dispatch(d, ids)
                    samples[i].append(t.total_ns)
                    hits[i] = t.hits
            for s, d, smp, h in zip(strategies, built, samples, hits):
                cells.append(DispatchCell(s, scenario, tuple(smp), d.build_ns, d.storage_bytes, len(ids), h))
    return cells


def format_table(rows: Sequence[dict[str, str]], columns: Sequence[str] = COLUMNS) -> str:
    widths = [max(len(c), *(len(r[c]) for r in rows)) if rows else len(c) for c in columns]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(r[c].rjust(w) if c not in ("strategy", "mapping", "traffic") else r[c].ljust(w) for c, w in zip(columns, widths)))
    return "\n".join(lines) + "\n"


def write_csv(rows: Sequence[dict[str, str]], path: str | Path, columns: Sequence[str] = COLUMNS) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns))
        w.writeheader()
        w.writerows(rows)


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


# -- pipeline ---------------------------------------------------------------


@dataclass(frozen=True)
class PipelineResult:
    packets: int
    pdus: int
    modular_s: tuple[float, ...]
    hardcoded_s: tuple[float, ...]
    modular_peak: int
    hardcoded_peak: int
    modular_digest: str
    hardcoded_digest: str
    layers: int
    events: int

    @property
    def identical(self) -> bool:
        return self.modular_digest == self.hardcoded_digest

    @property
    def runtime_overhead_pct(self) -> float:
        m, h = statistics.fmean(self.modular_s), statistics.fmean(self.hardcoded_s)
        return (m - h) / h * 100

    @property
    def memory_overhead_pct(self) -> float:
        return (self.modular_peak - self.hardcoded_peak) / self.hardcoded_peak * 100

    def rows(self) -> list[dict[str, str]]:
        def row(name, runs, peak):
            ci = t_interval(runs)
            return {
                "path": name,
                "runtime_s": f"{statistics.fmean(runs):.4f}",
                "ci95_s": "" if ci is None else f"{ci:.4f}",
                "peak_alloc_bytes": str(peak),
            }

        return [
            row("Modular", self.modular_s, self.modular_peak),
            row("HardCoded", self.hardcoded_s, self.hardcoded_peak),
            {
                "path": "Difference[%]",
                "runtime_s": f"{self.runtime_overhead_pct:.2f}",
                "ci95_s": "",
                "peak_alloc_bytes": f"{self.memory_overhead_pct:.2f}",
            },
        ]


PIPELINE_COLUMNS = ("path", "runtime_s", "ci95_s", "peak_alloc_bytes")

Walker = Callable[[PacketContext], PacketContext]


def _run(process: Walker, frames: Sequence[tuple[float, bytes]]) -> float:
    start = time.perf_counter()
    for ts, raw in frames:
        process(PacketContext(raw, 1, ts))
    return time.perf_counter() - start


def _digest(process: Walker, frames: Sequence[tuple[float, bytes]]) -> tuple[str, int, int]:
    h = hashlib.sha256()
    layers = events = 0
    for ts, raw in frames:
        ctx = process(PacketContext(raw, 1, ts))
        for layer in ctx.layers:
            h.update(f"{layer.analyzer}:{layer.start}:{layer.end};".encode())
        for ev in ctx.events:
            h.update(format_event(ev).encode())
        for rec in ctx.failures:
            h.update(repr(rec).encode())
        layers += len(ctx.layers)
        events += len(ctx.events)
    return h.hexdigest(), layers, events


def _peak(setup: Callable[[], Walker], frames: Sequence[tuple[float, bytes]]) -> int:
    """Peak traced allocation while building a walker and running it once."""
    gc.collect()
    tracemalloc.start()
    try:
        tracemalloc.reset_peak()
        process = setup()
        for ts, raw in frames:
            process(PacketContext(raw, 1, ts))
        return tracemalloc.get_traced_memory()[1]
    finally:
        tracemalloc.stop()


def bench_pipeline(
    pdus: int = 1_000_000,
    seed: int = 0,
    reps: int = DEFAULT_REPS,
    config: Configuration | None = None,
    frames: Sequence[bytes] | None = None,
) -> PipelineResult:
    """Process one synthetic capture through the modular graph and the
    hard-coded walk, alternating which goes first in each repetition."""
    if pdus <= 0:
        raise ValueError("pdu count must be positive; an empty measurement is meaningless")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    config = config or load_config()
    raw_frames = frames if frames is not None else realistic_frames(pdus, seed)
    records = [(1.6e9 + i * 1e-4, f) for i, f in enumerate(raw_frames)]

    def modular() -> Walker:
        return build_manager(config).process_packet

    def hardcoded() -> Walker:
        return HardCodedStack.from_config(config).process_packet

    mod_digest, layers, events = _digest(modular(), records)
    hc_digest, _, _ = _digest(hardcoded(), records)

    mod_walk, hc_walk = modular(), hardcoded()
    _run(mod_walk, records)  # warm-up
    _run(hc_walk, records)
    mod_s: list[float] = []
    hc_s: list[float] = []
    for i in range(reps):
        gc.collect()
        order = ((mod_walk, mod_s), (hc_walk, hc_s)) if i % 2 == 0 else ((hc_walk, hc_s), (mod_walk, mod_s))
        for walk, out in order:
            out.append(_run(walk, records))

    return PipelineResult(
        packets=len(records),
        pdus=layers,
        modular_s=tuple(mod_s),
        hardcoded_s=tuple(hc_s),
        modular_peak=_peak(modular, records),
        hardcoded_peak=_peak(hardcoded, records),
        modular_digest=mod_digest,
        hardcoded_digest=hc_digest,
        layers=layers,
        events=events,
    )
