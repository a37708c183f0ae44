"""Locality-aware multilevel graph partitioning plus baseline partitioners.

The multilevel pipeline: multi-source BFS carves the graph into connected
blocks, blocks become super-nodes of a coarsened graph, small blocks are
merged into large neighbors (or randomly grouped), a greedy heuristic
assigns blocks to partitions balancing multi-hop locality against node and
training-node capacity, and the assignment is mapped back to nodes.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph


@dataclass
class BlockAssignment:
    """Total node -> block map. ``connected`` flags blocks grown by a single
    BFS (True) versus blocks later formed by random merging (False)."""

    block_of: np.ndarray
    num_blocks: int
    connected: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.connected is None:
            self.connected = np.ones(self.num_blocks, dtype=bool)


@dataclass
class CoarsenedGraph:
    num_blocks: int
    block_size: np.ndarray
    block_train_count: np.ndarray
    adjacency: list[dict[int, int]]  # symmetric; nbr block -> crossing-edge multiplicity
    connected: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.connected is None:
            self.connected = np.ones(self.num_blocks, dtype=bool)

    @property
    def total_nodes(self) -> int:
        return int(self.block_size.sum())

    @property
    def total_train(self) -> int:
        return int(self.block_train_count.sum())

    @property
    def num_coarse_edges(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2


@dataclass
class Partitioning:
    part_of: np.ndarray
    k: int
    part_sizes: np.ndarray
    part_train_sizes: np.ndarray

    @classmethod
    def from_assignment(cls, part_of: np.ndarray, k: int, train_mask: np.ndarray) -> "Partitioning":
        part_of = np.asarray(part_of, dtype=np.int64)
        sizes = np.bincount(part_of, minlength=k)
        train_sizes = np.bincount(part_of[train_mask], minlength=k)
        return cls(part_of=part_of, k=k, part_sizes=sizes, part_train_sizes=train_sizes)


@dataclass
class PartitionQuality:
    edge_cut_fraction: float
    node_balance: float
    train_balance: float
    two_hop_locality: float


# -- block generation ----------------------------------------------------------


def generate_blocks(
    g: Graph,
    block_size_threshold: int,
    num_sources: int | None = None,
    seed: int = 0,
) -> BlockAssignment:
    """Multi-source BFS block decomposition.

    A block stops growing once its size reaches ``block_size_threshold`` or
    its frontier is exhausted; batch expansion may overshoot the threshold by
    one node's neighborhood. When all sources exhaust and unvisited nodes
    remain, new sources are drawn uniformly from the unvisited nodes until
    every node is covered.
    """
    if block_size_threshold < 1:
        raise ValueError("block_size_threshold must be >= 1")
    n = g.num_nodes
    if num_sources is None:
        num_sources = max(1, math.ceil(n / block_size_threshold))
    num_sources = min(num_sources, n)

    rng = np.random.default_rng(seed)
    block_of = np.full(n, -1, dtype=np.int64)
    sizes: list[int] = []
    queue: deque[int] = deque()

    for s in rng.choice(n, size=num_sources, replace=False):
        block_of[s] = len(sizes)
        sizes.append(1)
        queue.append(int(s))

    # scan order for replacement sources: uniform over the unvisited set
    scan = rng.permutation(n)
    scan_pos = 0
    off, col = g.row_offsets, g.col_indices

    while True:
        while queue:
            u = queue.popleft()
            b = block_of[u]
            if sizes[b] >= block_size_threshold:
                continue
            for v in col[off[u] : off[u + 1]]:
                if block_of[v] < 0:
                    block_of[v] = b
                    sizes[b] += 1
                    queue.append(int(v))
        while scan_pos < n and block_of[scan[scan_pos]] >= 0:
            scan_pos += 1
        if scan_pos == n:
            break
        s = int(scan[scan_pos])
        block_of[s] = len(sizes)
        sizes.append(1)
        queue.append(s)

    return BlockAssignment(block_of=block_of, num_blocks=len(sizes))


def coarsen(g: Graph, blocks: BlockAssignment) -> CoarsenedGraph:
    """Contract each block to a super-node; multiplicities count the
    undirected edges crossing between two blocks."""
    degs = g.degrees()
    src = np.repeat(np.arange(g.num_nodes, dtype=np.int64), degs)
    dst = g.col_indices
    fwd = src < dst  # each undirected edge once
    bu = blocks.block_of[src[fwd]]
    bv = blocks.block_of[dst[fwd]]
    cross = bu != bv
    bu, bv = bu[cross], bv[cross]
    lo = np.minimum(bu, bv)
    hi = np.maximum(bu, bv)

    adjacency: list[dict[int, int]] = [dict() for _ in range(blocks.num_blocks)]
    if len(lo):
        keys = lo * blocks.num_blocks + hi
        uniq, counts = np.unique(keys, return_counts=True)
        for key, cnt in zip(uniq, counts):
            a, b = int(key // blocks.num_blocks), int(key % blocks.num_blocks)
            adjacency[a][b] = int(cnt)
            adjacency[b][a] = int(cnt)

    block_size = np.bincount(blocks.block_of, minlength=blocks.num_blocks)
    block_train = np.bincount(blocks.block_of[g.train_mask], minlength=blocks.num_blocks)
    return CoarsenedGraph(
        num_blocks=blocks.num_blocks,
        block_size=block_size.astype(np.int64),
        block_train_count=block_train.astype(np.int64),
        adjacency=adjacency,
        connected=blocks.connected.copy(),
    )


def merge_small_blocks(
    cg: CoarsenedGraph, large_percentile: float = 0.10, seed: int = 0
) -> tuple[CoarsenedGraph, np.ndarray]:
    """Merge small blocks into large neighbors, then randomly group leftovers.

    Blocks in the top ``large_percentile`` by size are large. Each small
    block adjacent to at least one large block joins its largest large
    neighbor. Remaining small blocks are grouped in shuffled order until a
    group reaches the smallest large block's size (or partners run out).

    Returns the merged coarse graph and the old-block -> new-block remap.
    """
    if not 0 < large_percentile < 1:
        raise ValueError("large_percentile must be in (0, 1)")
    nb = cg.num_blocks
    identity = np.arange(nb, dtype=np.int64)
    if nb < 2:
        return cg, identity

    rng = np.random.default_rng(seed)
    n_large = max(1, math.ceil(large_percentile * nb))
    order = np.lexsort((identity, -cg.block_size))
    large_ids = set(int(b) for b in order[:n_large])
    min_large_size = int(cg.block_size[order[n_large - 1]])

    target = identity.copy()  # representative old block of each merge group
    randomly_merged = np.zeros(nb, dtype=bool)

    leftovers = []
    for b in range(nb):
        if b in large_ids:
            continue
        large_nbrs = [v for v in cg.adjacency[b] if v in large_ids]
        if large_nbrs:
            # largest large neighbor, ties to the lowest block ID
            best = max(large_nbrs, key=lambda v: (cg.block_size[v], -v))
            target[b] = best
        else:
            leftovers.append(b)

    shuffled = [leftovers[i] for i in rng.permutation(len(leftovers))]
    group: list[int] = []
    group_size = 0
    for b in shuffled:
        group.append(b)
        group_size += int(cg.block_size[b])
        if group_size >= min_large_size:
            if len(group) > 1:
                rep = group[0]
                for other in group[1:]:
                    target[other] = rep
                randomly_merged[rep] = True
            group, group_size = [], 0
    if len(group) > 1:
        rep = group[0]
        for other in group[1:]:
            target[other] = rep
        randomly_merged[rep] = True

    reps = np.unique(target)
    new_id_of = {int(r): i for i, r in enumerate(reps)}
    remap = np.array([new_id_of[int(target[b])] for b in range(nb)], dtype=np.int64)
    new_nb = len(reps)

    new_size = np.zeros(new_nb, dtype=np.int64)
    new_train = np.zeros(new_nb, dtype=np.int64)
    np.add.at(new_size, remap, cg.block_size)
    np.add.at(new_train, remap, cg.block_train_count)

    new_adj: list[dict[int, int]] = [dict() for _ in range(new_nb)]
    for a in range(nb):
        na = remap[a]
        for b, mult in cg.adjacency[a].items():
            if a >= b:
                continue
            nbid = remap[b]
            if na == nbid:
                continue
            new_adj[na][nbid] = new_adj[na].get(nbid, 0) + mult
            new_adj[nbid][na] = new_adj[nbid].get(na, 0) + mult

    new_connected = np.zeros(new_nb, dtype=bool)
    for i, r in enumerate(reps):
        # merging into an adjacent large block preserves connectivity;
        # random grouping does not
        new_connected[i] = bool(cg.connected[r]) and not randomly_merged[int(r)]

    merged = CoarsenedGraph(
        num_blocks=new_nb,
        block_size=new_size,
        block_train_count=new_train,
        adjacency=new_adj,
        connected=new_connected,
    )
    return merged, remap


# -- assignment ------------------------------------------------------------------


def assign_blocks(
    cg: CoarsenedGraph,
    k: int,
    j: int = 2,
    seed: int = 0,
    use_train_penalty: bool = True,
) -> tuple[np.ndarray, dict]:
    """Greedy block placement maximizing
    (sum over hop depths of assigned neighbor mass in partition i)
    * (1 - |P(i)|/C) * (1 - |T(i)|/C_T), penalties clamped at 0.

    Blocks are visited in descending size order. A block first reached at
    hop h contributes to every depth >= h, i.e. its node count is weighted
    (j - h + 1) times. When all scores are zero, the block goes to the
    partition with the least combined load (ties to the lowest index).

    Returns the block -> partition map and a stats dict with the number of
    coarse-adjacency traversals (complexity guard).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > cg.num_blocks:
        raise ValueError("more partitions than blocks")
    if j < 1:
        raise ValueError("j must be >= 1")

    capacity = cg.total_nodes / k
    train_capacity = cg.total_train / k
    part_nodes = np.zeros(k, dtype=np.float64)
    part_train = np.zeros(k, dtype=np.float64)
    block_part = np.full(cg.num_blocks, -1, dtype=np.int64)

    order = np.lexsort((np.arange(cg.num_blocks), -cg.block_size))
    edge_traversals = 0

    for b in order:
        b = int(b)
        neighbor_mass = np.zeros(k, dtype=np.float64)
        seen = {b}
        frontier = [b]
        for hop in range(1, j + 1):
            weight = j - hop + 1
            nxt = []
            for u in frontier:
                for v in cg.adjacency[u]:
                    edge_traversals += 1
                    if v not in seen:
                        seen.add(v)
                        nxt.append(v)
                        p = block_part[v]
                        if p >= 0:
                            neighbor_mass[p] += weight * cg.block_size[v]
            frontier = nxt
            if not frontier:
                break

        node_penalty = np.maximum(0.0, 1.0 - part_nodes / capacity)
        if use_train_penalty and train_capacity > 0:
            train_penalty = np.maximum(0.0, 1.0 - part_train / train_capacity)
        else:
            train_penalty = np.ones(k)
        scores = neighbor_mass * node_penalty * train_penalty

        if scores.max() > 0:
            choice = int(np.argmax(scores))
        else:
            load = part_nodes / capacity
            if train_capacity > 0:
                load = load + part_train / train_capacity
            choice = int(np.argmin(load))

        block_part[b] = choice
        part_nodes[choice] += cg.block_size[b]
        part_train[choice] += cg.block_train_count[b]

    return block_part, {"edge_traversals": edge_traversals}


def uncoarsen(
    blocks: BlockAssignment,
    remap: np.ndarray,
    block_parts: np.ndarray,
    train_mask: np.ndarray,
) -> Partitioning:
    """Compose node -> block -> merged block -> partition."""
    part_of = np.asarray(block_parts)[np.asarray(remap)[blocks.block_of]]
    k = int(np.asarray(block_parts).max()) + 1
    return Partitioning.from_assignment(part_of, k, train_mask)


# -- end-to-end pipelines ----------------------------------------------------------


def multilevel_partition(
    g: Graph,
    k: int,
    j: int = 2,
    block_size_threshold: int | None = None,
    large_percentile: float = 0.10,
    seed: int = 0,
    use_train_penalty: bool = True,
) -> Partitioning:
    """Full pipeline: blocks -> coarsen -> merge -> assign -> uncoarsen."""
    if block_size_threshold is None:
        block_size_threshold = max(1, g.num_nodes // 256)
    blocks = generate_blocks(g, block_size_threshold, seed=seed)
    cg = coarsen(g, blocks)
    if k > cg.num_blocks:
        raise ValueError("more partitions than blocks")
    merged, remap = merge_small_blocks(cg, large_percentile, seed=seed)
    if merged.num_blocks < k:
        # merging overshot; fall back to the unmerged coarse graph
        merged, remap = cg, np.arange(cg.num_blocks, dtype=np.int64)
    block_parts, _ = assign_blocks(merged, k, j=j, seed=seed, use_train_penalty=use_train_penalty)
    part = uncoarsen(blocks, remap, block_parts, g.train_mask)
    if part.k < k:  # some partitions may be empty of blocks
        part = Partitioning.from_assignment(part.part_of, k, g.train_mask)
    return part


def random_partition(g: Graph, k: int, seed: int = 0) -> Partitioning:
    """Structure-agnostic baseline: i.i.d. uniform assignment."""
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = np.random.default_rng(seed)
    part_of = rng.integers(k, size=g.num_nodes)
    return Partitioning.from_assignment(part_of, k, g.train_mask)


def one_hop_greedy_partition(
    g: Graph,
    k: int,
    seed: int = 0,
    block_size_threshold: int | None = None,
    large_percentile: float = 0.10,
) -> Partitioning:
    """One-hop-connectivity baseline: the same greedy with j=1 and no
    training-node penalty."""
    return multilevel_partition(
        g,
        k,
        j=1,
        block_size_threshold=block_size_threshold,
        large_percentile=large_percentile,
        seed=seed,
        use_train_penalty=False,
    )


# -- quality ------------------------------------------------------------------------


def partition_quality(
    g: Graph, p: Partitioning, sample_size: int = 10000, seed: int = 0
) -> PartitionQuality:
    """Exact edge cut and balance; sampled 2-hop co-residency estimate."""
    degs = g.degrees()
    src = np.repeat(np.arange(g.num_nodes, dtype=np.int64), degs)
    fwd = src < g.col_indices
    num_undirected = int(fwd.sum())
    if num_undirected:
        cut = int((p.part_of[src[fwd]] != p.part_of[g.col_indices[fwd]]).sum())
        edge_cut = cut / num_undirected
    else:
        edge_cut = 0.0

    c = g.num_nodes / p.k
    node_balance = float(p.part_sizes.max() / c) if c > 0 else 0.0
    total_train = int(p.part_train_sizes.sum())
    if total_train > 0:
        train_balance = float(p.part_train_sizes.max() / (total_train / p.k))
    else:
        train_balance = 1.0

    rng = np.random.default_rng(seed)
    nonzero = np.flatnonzero(degs)
    if len(nonzero) == 0 or sample_size <= 0:
        locality = 1.0
    else:
        u = nonzero[rng.integers(len(nonzero), size=sample_size)]
        v = g.col_indices[g.row_offsets[u] + rng.integers(degs[u])]
        has = degs[v] > 0
        u, v = u[has], v[has]
        w = g.col_indices[g.row_offsets[v] + rng.integers(np.maximum(degs[v], 1))]
        locality = float(np.mean(p.part_of[u] == p.part_of[w])) if len(u) else 1.0

    return PartitionQuality(
        edge_cut_fraction=edge_cut,
        node_balance=node_balance,
        train_balance=train_balance,
        two_hop_locality=locality,
    )


# -- serialization --------------------------------------------------------------------


def save_partitioning(p: Partitioning, path) -> None:
    with open(path, "w") as f:
        f.write(f"# k {p.k}\n")
        for v, part in enumerate(p.part_of):
            f.write(f"{v} {int(part)}\n")


def load_partitioning(path, train_mask: np.ndarray) -> Partitioning:
    k = None
    pairs = []
    with open(path) as f:
        for line in f:
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                parts = stripped[1:].split()
                if len(parts) == 2 and parts[0] == "k":
                    k = int(parts[1])
                continue
            v, part = stripped.split()
            pairs.append((int(v), int(part)))
    part_of = np.zeros(len(pairs), dtype=np.int64)
    for v, part in pairs:
        part_of[v] = part
    if k is None:
        k = int(part_of.max()) + 1 if len(part_of) else 1
    return Partitioning.from_assignment(part_of, k, train_mask)
