"""Multi-hop neighbor-sampling simulator.

No model compute: the simulator produces the per-batch set of accessed
nodes (whose features would have to be fetched) and local/remote
adjacency-lookup accounting against a partitioning.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph
from .partition import Partitioning


@dataclass
class SamplingConfig:
    fanouts: tuple[int, ...] = (15, 10, 5)
    batch_size: int = 1000
    seed: int = 0

    def __post_init__(self):
        self.fanouts = tuple(int(f) for f in self.fanouts)
        if len(self.fanouts) == 0:
            raise ValueError("need at least one hop")
        if any(f < 1 for f in self.fanouts):
            raise ValueError("fanouts must be positive")


@dataclass
class AccessTrace:
    """Per batch: sorted array of distinct accessed node IDs (seeds plus all
    sampled neighbors)."""

    batches: list[np.ndarray]

    def total_accesses(self) -> int:
        return sum(len(b) for b in self.batches)


@dataclass
class EpochCommReport:
    local_accesses: int
    remote_accesses: int
    seed_load: np.ndarray
    request_load: np.ndarray
    bytes_remote_features: int = 0

    @property
    def total_accesses(self) -> int:
        return self.local_accesses + self.remote_accesses

    @property
    def remote_fraction(self) -> float:
        total = self.total_accesses
        return self.remote_accesses / total if total else 0.0


def _batch_rng(cfg: SamplingConfig, batch_seed: int) -> np.random.Generator:
    return np.random.default_rng((cfg.seed, batch_seed))


def _sample_hop(
    g: Graph, parents: np.ndarray, fanout: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Sample min(fanout, degree) neighbors uniformly without replacement
    for every parent (duplicates in ``parents`` sampled independently).

    Returns (sampled node IDs, index of each sample's parent).
    """
    if len(parents) == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    off, col = g.row_offsets, g.col_indices
    degs = off[parents + 1] - off[parents]
    total = int(degs.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)

    # gather all neighbor entries, grouped by parent
    starts = np.repeat(off[parents], degs)
    shift = np.repeat(np.cumsum(degs) - degs, degs)
    within = np.arange(total) - shift
    nbrs = col[starts + within]
    parent_idx = np.repeat(np.arange(len(parents)), degs)

    # random priority per entry; the fanout smallest per parent are a uniform
    # without-replacement sample
    priority = rng.random(total)
    order = np.lexsort((priority, parent_idx))
    rank = within  # segment boundaries unchanged by the within-parent sort
    keep = rank < fanout
    return nbrs[order][keep], parent_idx[order][keep]


def sample_batch(
    g: Graph, seeds: np.ndarray, cfg: SamplingConfig, batch_seed: int = 0
) -> tuple[list[np.ndarray], np.ndarray]:
    """Iterative per-hop neighbor sampling from a batch of seed nodes.

    Returns the per-hop frontier lists (with duplicates; hop h resamples
    from every hop h-1 occurrence) and the sorted distinct-node set.
    """
    seeds = np.asarray(seeds, dtype=np.int64)
    if len(seeds) == 0:
        raise ValueError("seeds must be nonempty")
    rng = _batch_rng(cfg, batch_seed)
    frontiers: list[np.ndarray] = []
    parents = seeds
    for fanout in cfg.fanouts:
        sampled, _ = _sample_hop(g, parents, fanout, rng)
        frontiers.append(sampled)
        parents = sampled
    distinct = np.unique(np.concatenate([seeds] + frontiers))
    return frontiers, distinct


def simulate_epoch(
    g: Graph, p: Partitioning, schedule, cfg: SamplingConfig
) -> tuple[AccessTrace, EpochCommReport]:
    """Run one epoch of sampling and account adjacency lookups.

    Every expanded node carries the partition of the seed it descends from;
    a lookup of node v is local iff v resides on that partition. Request
    load is attributed to the partition serving the lookup (part_of[v]),
    seed load to the seed's own partition.
    """
    part_of = p.part_of
    local = 0
    remote = 0
    seed_load = np.zeros(p.k, dtype=np.int64)
    request_load = np.zeros(p.k, dtype=np.int64)
    trace_batches: list[np.ndarray] = []

    for batch_idx, seeds in enumerate(schedule.batches):
        seeds = np.asarray(seeds, dtype=np.int64)
        rng = _batch_rng(cfg, batch_idx)
        seed_load += np.bincount(part_of[seeds], minlength=p.k)

        parents = seeds
        origins = part_of[seeds]
        collected = [seeds]
        for fanout in cfg.fanouts:
            # expanding `parents` = one adjacency lookup per parent
            lookup_parts = part_of[parents]
            request_load += np.bincount(lookup_parts, minlength=p.k)
            is_local = lookup_parts == origins
            local += int(is_local.sum())
            remote += int(len(parents) - is_local.sum())

            sampled, parent_idx = _sample_hop(g, parents, fanout, rng)
            origins = origins[parent_idx]
            parents = sampled
            collected.append(sampled)

        trace_batches.append(np.unique(np.concatenate(collected)))

    return (
        AccessTrace(batches=trace_batches),
        EpochCommReport(
            local_accesses=local,
            remote_accesses=remote,
            seed_load=seed_load,
            request_load=request_load,
        ),
    )


# -- serialization -----------------------------------------------------------------


def save_trace(trace: AccessTrace, path) -> None:
    with open(path, "w") as f:
        for batch in trace.batches:
            f.write(" ".join(str(int(v)) for v in batch) + "\n")


def load_trace(path) -> AccessTrace:
    batches = []
    with open(path) as f:
        for line in f:
            stripped = line.strip()
            if stripped:
                batches.append(np.array([int(x) for x in stripped.split()], dtype=np.int64))
    return AccessTrace(batches=batches)
