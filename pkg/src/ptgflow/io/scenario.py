"""Benchmark scenarios: concise/fragmented mappings and realistic/randomized traffic."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cache

import numpy as np

from ptgflow.dispatch import IdentifierMapping

from .trace import LayerTrace

RANDOM_ID_MIN = 1
RANDOM_ID_MAX = 10_000
FRAGMENT_EXTRA = 100
LAYERS_PER_RANDOM_PACKET = 3

# Stand-in for an enterprise capture: (share, layer identifiers).
REALISTIC_MIX: tuple[tuple[float, tuple[int, ...]], ...] = (
    (0.80, (1, 0x0800, 6)),
    (0.12, (1, 0x0800, 17)),
    (0.05, (1, 0x8100, 0x0800, 6)),
    (0.03, (1, 0x0806)),
)


class MappingKind(enum.Enum):
    CONCISE = "concise"
    FRAGMENTED = "fragmented"


class TrafficKind(enum.Enum):
    REALISTIC = "realistic"
    RANDOMIZED = "randomized"


@dataclass(frozen=True)
class BenchScenario:
    mapping_kind: MappingKind
    traffic_kind: TrafficKind
    pdu_count: int
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "mapping_kind", MappingKind(self.mapping_kind))
        object.__setattr__(self, "traffic_kind", TrafficKind(self.traffic_kind))
        if self.pdu_count < 0:
            raise ValueError("pdu_count must be non-negative")

    @property
    def label(self) -> str:
        return f"{self.mapping_kind.value}/{self.traffic_kind.value}"


@cache
def concise_pairs() -> tuple[tuple[int, str], ...]:
    """Every identifier of the shipped default graph, with its first child."""
    from ptgflow.engine.config import load_config

    seen: dict[int, str] = {}
    for reg in load_config().registrations:
        seen.setdefault(reg.identifier, reg.child)
    return tuple(seen.items())


def concise_mapping() -> IdentifierMapping:
    return IdentifierMapping(concise_pairs())


def fragmented_mapping(seed: int = 0) -> IdentifierMapping:
    base = dict(concise_pairs())
    rng = np.random.default_rng([seed, 0])
    pool = np.setdiff1d(np.arange(RANDOM_ID_MIN, RANDOM_ID_MAX + 1), np.fromiter(base, dtype=np.int64))
    extra = rng.choice(pool, size=FRAGMENT_EXTRA, replace=False)
    names = sorted(set(base.values()))
    pairs = list(base.items())
    pairs += [(int(i), names[k % len(names)]) for k, i in enumerate(extra)]
    return IdentifierMapping(pairs)


def _budget(pdu_count: int) -> int:
    # Both traffic kinds carry the same PDU total: a whole number of
    # three-layer random packets.
    return pdu_count - pdu_count % LAYERS_PER_RANDOM_PACKET


def randomized_trace(pdu_count: int, seed: int = 0) -> LayerTrace:
    rng = np.random.default_rng([seed, 1])
    n = _budget(pdu_count) // LAYERS_PER_RANDOM_PACKET
    ids = rng.integers(RANDOM_ID_MIN, RANDOM_ID_MAX + 1, size=(n, LAYERS_PER_RANDOM_PACKET))
    return LayerTrace(ids.tolist())


def realistic_kinds(packets: int, rng: np.random.Generator) -> np.ndarray:
    shares = np.array([s for s, _ in REALISTIC_MIX])
    return rng.choice(len(REALISTIC_MIX), size=packets, p=shares / shares.sum())


def realistic_trace(pdu_count: int, seed: int = 0) -> LayerTrace:
    rng = np.random.default_rng([seed, 2])
    budget = _budget(pdu_count)
    layouts = [list(ids) for _, ids in REALISTIC_MIX]
    packets: list[list[int]] = []
    total = 0
    while total < budget:
        # Shortest layout has two layers, so this never overshoots by much.
        for k in realistic_kinds(max(1, (budget - total) // 2), rng).tolist():
            pkt = layouts[k]
            if total + len(pkt) > budget:
                pkt = pkt[: budget - total]
            packets.append(list(pkt))
            total += len(pkt)
            if total == budget:
                break
    return LayerTrace(packets)


def generate_scenario(s: BenchScenario) -> tuple[IdentifierMapping, LayerTrace]:
    mapping = concise_mapping() if s.mapping_kind is MappingKind.CONCISE else fragmented_mapping(s.seed)
    if s.traffic_kind is TrafficKind.RANDOMIZED:
        trace = randomized_trace(s.pdu_count, s.seed)
    else:
        trace = realistic_trace(s.pdu_count, s.seed)
    return mapping, trace

