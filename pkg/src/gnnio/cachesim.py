"""Trace-driven two-level (device + host) multi-device feature-cache
simulator.

Node n is owned by device n mod d, so device residencies are disjoint.
Lookup order per queried node: owning device cache, then the shared host
cache, then a miss (remote fetch). Dynamic policies insert missed nodes
after the batch completes, in ascending node-ID order; the FIFO device
buffer is a circular queue whose tail cursor walks the slots, evicting the
previous occupant.
"""

from __future__ import annotations

import heapq
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph

POLICIES = ("static-degree", "fifo", "lru", "lfu")


@dataclass
class CacheConfig:
    device_capacity: int
    host_capacity: int = 0
    num_devices: int = 1
    policy: str = "fifo"
    feature_bytes_per_node: int = 512

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}; expected one of {POLICIES}")
        if self.num_devices < 1:
            raise ValueError("num_devices must be >= 1")
        if self.device_capacity < 0 or self.host_capacity < 0:
            raise ValueError("capacities must be >= 0")


class _Level:
    """One cache level; subclasses implement the replacement policy."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.insertions = 0
        self.evictions = 0
        self.metadata_updates = 0

    def __contains__(self, node: int) -> bool:
        raise NotImplementedError

    def on_hit(self, node: int) -> None:
        pass

    def insert(self, node: int) -> None:
        raise NotImplementedError

    def __len__(self) -> int:
        raise NotImplementedError


class StaticLevel(_Level):
    """Contents fixed before the run; never updated."""

    def __init__(self, capacity: int, resident: np.ndarray):
        super().__init__(capacity)
        self.resident = frozenset(int(v) for v in resident)

    def __contains__(self, node):
        return node in self.resident

    def insert(self, node):
        pass

    def __len__(self):
        return len(self.resident)


class FifoLevel(_Level):
    """Circular buffer of slots: the tail cursor names the next insertion
    slot; inserting evicts the slot's previous occupant."""

    def __init__(self, capacity: int):
        super().__init__(capacity)
        self.slots = np.full(capacity, -1, dtype=np.int64)
        self.residency: dict[int, int] = {}
        self.tail = 0

    def __contains__(self, node):
        return node in self.residency

    def insert(self, node):
        if self.capacity == 0 or node in self.residency:
            return
        old = int(self.slots[self.tail])
        if old >= 0:
            del self.residency[old]
            self.evictions += 1
        self.slots[self.tail] = node
        self.residency[node] = self.tail
        self.tail = (self.tail + 1) % self.capacity
        self.insertions += 1

    def __len__(self):
        return len(self.residency)


class LruLevel(_Level):
    def __init__(self, capacity: int):
        super().__init__(capacity)
        self.entries: OrderedDict[int, None] = OrderedDict()

    def __contains__(self, node):
        return node in self.entries

    def on_hit(self, node):
        self.entries.move_to_end(node)
        self.metadata_updates += 1

    def insert(self, node):
        if self.capacity == 0 or node in self.entries:
            return
        if len(self.entries) >= self.capacity:
            self.entries.popitem(last=False)
            self.evictions += 1
        self.entries[node] = None
        self.insertions += 1
        self.metadata_updates += 1

    def __len__(self):
        return len(self.entries)


class LfuLevel(_Level):
    """Least-frequently-used with FIFO tie-break via an insertion tick;
    lazy-deletion heap keyed by (frequency, tick)."""

    def __init__(self, capacity: int):
        super().__init__(capacity)
        self.freq: dict[int, int] = {}
        self.tick_of: dict[int, int] = {}
        self.heap: list[tuple[int, int, int]] = []
        self.tick = 0

    def __contains__(self, node):
        return node in self.freq

    def on_hit(self, node):
        self.freq[node] += 1
        heapq.heappush(self.heap, (self.freq[node], self.tick_of[node], node))
        self.metadata_updates += 1

    def _evict(self):
        while self.heap:
            f, t, node = heapq.heappop(self.heap)
            if self.freq.get(node) == f and self.tick_of.get(node) == t:
                del self.freq[node]
                del self.tick_of[node]
                self.evictions += 1
                return

    def insert(self, node):
        if self.capacity == 0 or node in self.freq:
            return
        if len(self.freq) >= self.capacity:
            self._evict()
        self.tick += 1
        self.freq[node] = 1
        self.tick_of[node] = self.tick
        heapq.heappush(self.heap, (1, self.tick, node))
        self.insertions += 1
        self.metadata_updates += 1

    def __len__(self):
        return len(self.freq)


def _make_level(policy: str, capacity: int) -> _Level:
    if policy == "fifo":
        return FifoLevel(capacity)
    if policy == "lru":
        return LruLevel(capacity)
    if policy == "lfu":
        return LfuLevel(capacity)
    raise ValueError(policy)


@dataclass
class CacheEngineState:
    devices: list[_Level]
    host: _Level
    policy: str


def cold_state(cfg: CacheConfig) -> CacheEngineState:
    """Empty caches for the dynamic policies."""
    if cfg.policy == "static-degree":
        raise ValueError("static policy requires warm_static(g, cfg)")
    devices = [_make_level(cfg.policy, cfg.device_capacity) for _ in range(cfg.num_devices)]
    host = _make_level(cfg.policy, cfg.host_capacity)
    return CacheEngineState(devices=devices, host=host, policy=cfg.policy)


def warm_static(g: Graph, cfg: CacheConfig) -> CacheEngineState:
    """Pre-load each device with the highest-degree nodes it owns and the
    host with the next-highest-degree unplaced nodes. Contents never change."""
    if cfg.policy != "static-degree":
        raise ValueError("warm_static requires policy='static-degree'")
    degs = g.degrees()
    d = cfg.num_devices
    devices = []
    device_resident = np.zeros(g.num_nodes, dtype=bool)
    for dev in range(d):
        owned = np.arange(dev, g.num_nodes, d, dtype=np.int64)
        order = owned[np.lexsort((owned, -degs[owned]))]
        chosen = order[: cfg.device_capacity]
        device_resident[chosen] = True
        devices.append(StaticLevel(cfg.device_capacity, chosen))
    rest = np.flatnonzero(~device_resident)
    rest = rest[np.lexsort((rest, -degs[rest]))]
    host = StaticLevel(cfg.host_capacity, rest[: cfg.host_capacity])
    return CacheEngineState(devices=devices, host=host, policy="static-degree")


@dataclass
class CacheSimReport:
    num_devices: int
    feature_bytes_per_node: int
    batch_queries: list[int] = field(default_factory=list)
    batch_own_hits: list[int] = field(default_factory=list)
    batch_peer_hits: list[int] = field(default_factory=list)
    batch_host_hits: list[int] = field(default_factory=list)
    batch_misses: list[int] = field(default_factory=list)
    batch_insertions: list[int] = field(default_factory=list)
    batch_evictions: list[int] = field(default_factory=list)
    batch_metadata_updates: list[int] = field(default_factory=list)
    outcomes: list[list[str]] | None = None  # per-node codes when recorded

    @property
    def total_queries(self) -> int:
        return sum(self.batch_queries)

    @property
    def device_hits(self) -> int:
        return sum(self.batch_own_hits) + sum(self.batch_peer_hits)

    @property
    def host_hits(self) -> int:
        return sum(self.batch_host_hits)

    @property
    def misses(self) -> int:
        return sum(self.batch_misses)

    @property
    def hit_ratio(self) -> float:
        total = self.total_queries
        return (self.device_hits + self.host_hits) / total if total else 0.0

    @property
    def peer_bytes(self) -> int:
        return sum(self.batch_peer_hits) * self.feature_bytes_per_node

    @property
    def host_to_device_bytes(self) -> int:
        return sum(self.batch_host_hits) * self.feature_bytes_per_node

    @property
    def remote_fetch_bytes(self) -> int:
        return sum(self.batch_misses) * self.feature_bytes_per_node


def simulate(
    trace,
    cfg: CacheConfig,
    g: Graph | None = None,
    batch_devices: list[int] | None = None,
    state: CacheEngineState | None = None,
    record_outcomes: bool = False,
) -> CacheSimReport:
    """Replay an access trace through the two-level multi-device cache.

    ``batch_devices[i]`` is the worker device running batch i (default:
    round-robin). Queried nodes route to their owning device; a hit on a
    different device than the worker's counts as a peer hit. After each
    batch, device-missed nodes are inserted into their owning device and
    full misses into the host cache (ascending node ID; no-op for static).
    """
    if cfg.policy == "static-degree":
        if state is None:
            if g is None:
                raise ValueError("static policy needs the graph for degree warmup")
            state = warm_static(g, cfg)
        elif state.policy != "static-degree":
            raise ValueError("state/policy mismatch")
    elif state is None:
        state = cold_state(cfg)
    elif state.policy != cfg.policy:
        raise ValueError("state/policy mismatch")

    d = cfg.num_devices
    report = CacheSimReport(num_devices=d, feature_bytes_per_node=cfg.feature_bytes_per_node)
    if record_outcomes:
        report.outcomes = []

    for i, batch in enumerate(trace.batches):
        worker = batch_devices[i] if batch_devices is not None else i % d
        own = peer = host_hits = misses = 0
        device_missed: list[int] = []
        full_missed: list[int] = []
        codes: list[str] = []
        ins0 = sum(lv.insertions for lv in state.devices) + state.host.insertions
        ev0 = sum(lv.evictions for lv in state.devices) + state.host.evictions
        md0 = sum(lv.metadata_updates for lv in state.devices) + state.host.metadata_updates

        for node in batch:
            node = int(node)
            home = node % d
            level = state.devices[home]
            if node in level:
                level.on_hit(node)
                if home == worker:
                    own += 1
                    codes.append("D")
                else:
                    peer += 1
                    codes.append("P")
            elif node in state.host:
                state.host.on_hit(node)
                host_hits += 1
                device_missed.append(node)
                codes.append("H")
            else:
                misses += 1
                device_missed.append(node)
                full_missed.append(node)
                codes.append("M")

        for node in sorted(device_missed):
            state.devices[node % d].insert(node)
        for node in sorted(full_missed):
            state.host.insert(node)

        report.batch_queries.append(len(batch))
        report.batch_own_hits.append(own)
        report.batch_peer_hits.append(peer)
        report.batch_host_hits.append(host_hits)
        report.batch_misses.append(misses)
        report.batch_insertions.append(
            sum(lv.insertions for lv in state.devices) + state.host.insertions - ins0
        )
        report.batch_evictions.append(
            sum(lv.evictions for lv in state.devices) + state.host.evictions - ev0
        )
        report.batch_metadata_updates.append(
            sum(lv.metadata_updates for lv in state.devices) + state.host.metadata_updates - md0
        )
        if record_outcomes:
            report.outcomes.append(codes)

    return report


def amortized_update_ops(report: CacheSimReport) -> dict[str, float]:
    """Per-batch mean operation counts, the desk-scale proxy for amortized
    cache overhead."""
    nb = max(1, len(report.batch_queries))
    return {
        "lookups_per_batch": report.total_queries / nb,
        "insertions_per_batch": sum(report.batch_insertions) / nb,
        "evictions_per_batch": sum(report.batch_evictions) / nb,
        "metadata_updates_per_batch": sum(report.batch_metadata_updates) / nb,
    }


def compare_policies(
    g: Graph,
    trace,
    capacities: list[int],
    policies: tuple[str, ...] = POLICIES,
    num_devices: int = 1,
    host_capacity: int = 0,
    feature_bytes_per_node: int = 512,
) -> list[dict]:
    """Hit-ratio table over a (policy x capacity) sweep on one trace."""
    rows = []
    for policy in policies:
        for cap in capacities:
            cfg = CacheConfig(
                device_capacity=cap,
                host_capacity=host_capacity,
                num_devices=num_devices,
                policy=policy,
                feature_bytes_per_node=feature_bytes_per_node,
            )
            report = simulate(trace, cfg, g=g)
            rows.append(
                {
                    "policy": policy,
                    "capacity": cap,
                    "hit_ratio": report.hit_ratio,
                    "device_hits": report.device_hits,
                    "host_hits": report.host_hits,
                    "misses": report.misses,
                }
            )
    return rows
