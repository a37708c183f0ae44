"""Mini-batch schedules for training nodes.

Two policies: plain random shuffling, and proximity-aware ordering built
from randomly-shifted BFS sequences consumed round-robin. The shuffling
error (total variation distance of per-batch label frequencies from the
global training-label frequencies) gates how many BFS sequences are needed:
convergence is considered safe when epsilon <= sqrt(b*M)/n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph


@dataclass
class BatchSchedule:
    batches: list[np.ndarray]
    batch_size: int
    policy: str

    def all_nodes(self) -> np.ndarray:
        if not self.batches:
            return np.empty(0, dtype=np.int64)
        return np.concatenate(self.batches)

    def num_nodes(self) -> int:
        return sum(len(b) for b in self.batches)


@dataclass
class ShufflingErrorReport:
    epsilon: float
    threshold: float
    num_sequences: int
    per_batch_tv: np.ndarray
    max_tv: float = 0.0
    threshold_met: bool = True

    def __post_init__(self):
        if len(self.per_batch_tv):
            self.max_tv = float(np.max(self.per_batch_tv))


def shuffling_error_threshold(b: int, M: int, n: int) -> float:
    """Convergence-safe bound sqrt(b*M)/n on the shuffling error."""
    return math.sqrt(b * M) / n


# -- BFS sequences --------------------------------------------------------------


def generate_bfs_sequences(g: Graph, S: int, seed: int = 0) -> list[np.ndarray]:
    """Partition the training set into S contiguous ID-space shards and emit
    each shard's members in BFS first-visit order.

    The BFS runs over the full graph (non-training connector nodes carry
    locality) from a random root inside the shard, restarting from a random
    not-yet-emitted shard member when the frontier empties. Each returned
    sequence is a permutation of its shard.
    """
    train = np.flatnonzero(g.train_mask)
    if len(train) == 0:
        raise ValueError("training set is empty")
    if S < 1:
        raise ValueError("S must be >= 1")
    if S > len(train):
        raise ValueError(f"S={S} exceeds training-set size {len(train)}")

    rng = np.random.default_rng(seed)
    bounds = [i * len(train) // S for i in range(S + 1)]
    off, col = g.row_offsets, g.col_indices
    sequences: list[np.ndarray] = []

    for s in range(S):
        shard = train[bounds[s] : bounds[s + 1]]
        in_shard = np.zeros(g.num_nodes, dtype=bool)
        in_shard[shard] = True
        emitted = np.zeros(g.num_nodes, dtype=bool)
        visited = np.zeros(g.num_nodes, dtype=bool)
        seq: list[np.ndarray] = []
        remaining = len(shard)

        while remaining > 0:
            pending = shard[~emitted[shard]]
            root = int(pending[rng.integers(len(pending))])
            frontier = np.array([root], dtype=np.int64)
            visited[root] = True
            while len(frontier) and remaining > 0:
                emit = frontier[in_shard[frontier] & ~emitted[frontier]]
                if len(emit):
                    emitted[emit] = True
                    remaining -= len(emit)
                    seq.append(emit)
                # expand level: neighbors in parent order, first occurrence kept
                counts = off[frontier + 1] - off[frontier]
                total = int(counts.sum())
                if total == 0:
                    break
                starts = np.repeat(off[frontier], counts)
                shift = np.repeat(np.cumsum(counts) - counts, counts)
                nbrs = col[starts + (np.arange(total) - shift)]
                nbrs = nbrs[~visited[nbrs]]
                if len(nbrs) == 0:
                    break
                _, first_idx = np.unique(nbrs, return_index=True)
                frontier = nbrs[np.sort(first_idx)]
                visited[frontier] = True

        sequences.append(np.concatenate(seq) if seq else np.empty(0, dtype=np.int64))

    return sequences


def random_shift(seq: np.ndarray, seed: int = 0) -> np.ndarray:
    """Rotate (not shuffle) a sequence by a uniform offset; preserves the
    order of consecutive nodes."""
    if len(seq) == 0:
        raise ValueError("sequence is empty")
    rng = np.random.default_rng(seed)
    r = int(rng.integers(len(seq)))
    return np.roll(seq, -r)


def form_batches(seqs: list[np.ndarray], b: int, policy: str = "proximity") -> BatchSchedule:
    """Round-robin across sequence heads, one node per live sequence per
    turn, until b nodes fill a batch; exhausted sequences are skipped."""
    if b < 1:
        raise ValueError("batch size must be >= 1")
    positions = [0] * len(seqs)
    batches: list[np.ndarray] = []
    current: list[int] = []
    live = [i for i, s in enumerate(seqs) if len(s)]
    while live:
        next_live = []
        for i in live:
            current.append(int(seqs[i][positions[i]]))
            positions[i] += 1
            if positions[i] < len(seqs[i]):
                next_live.append(i)
            if len(current) == b:
                batches.append(np.array(current, dtype=np.int64))
                current = []
        live = next_live
    if current:
        batches.append(np.array(current, dtype=np.int64))
    return BatchSchedule(batches=batches, batch_size=b, policy=policy)


# -- shuffling error -------------------------------------------------------------


def shuffling_error(
    schedule: BatchSchedule, labels: np.ndarray, threshold: float = 0.0, num_sequences: int = 1
) -> ShufflingErrorReport:
    """Per-batch total variation distance of label frequencies versus the
    global training-set frequencies; epsilon is the mean over full-size
    batches (all batches if none reach full size)."""
    all_nodes = schedule.all_nodes()
    batch_labels = np.asarray(labels)[all_nodes]
    if np.any(batch_labels < 0):
        raise ValueError("scheduled node without a label")
    num_classes = int(batch_labels.max()) + 1
    global_freq = np.bincount(batch_labels, minlength=num_classes) / len(all_nodes)

    tvs = np.empty(len(schedule.batches))
    pos = 0
    for i, batch in enumerate(schedule.batches):
        lab = batch_labels[pos : pos + len(batch)]
        pos += len(batch)
        freq = np.bincount(lab, minlength=num_classes) / len(batch)
        tvs[i] = 0.5 * np.abs(freq - global_freq).sum()

    full = np.array([len(b) == schedule.batch_size for b in schedule.batches])
    epsilon = float(tvs[full].mean()) if full.any() else float(tvs.mean())
    return ShufflingErrorReport(
        epsilon=epsilon,
        threshold=threshold,
        num_sequences=num_sequences,
        per_batch_tv=tvs,
        threshold_met=epsilon <= threshold if threshold > 0 else True,
    )


# -- schedule policies ------------------------------------------------------------


def proximity_schedule(g: Graph, S: int, b: int, seed: int = 0) -> BatchSchedule:
    """Proximity-aware ordering: shifted BFS sequences, round-robin batches."""
    seqs = generate_bfs_sequences(g, S, seed=seed)
    shifted = [random_shift(s, seed=seed * 1000003 + i) if len(s) else s for i, s in enumerate(seqs)]
    return form_batches(shifted, b, policy=f"proximity-S{S}")


def random_shuffle_schedule(g: Graph, b: int, seed: int = 0) -> BatchSchedule:
    """Baseline: uniform permutation of the training set, sliced into batches."""
    if b < 1:
        raise ValueError("batch size must be >= 1")
    rng = np.random.default_rng(seed)
    train = np.flatnonzero(g.train_mask)
    perm = rng.permutation(train)
    batches = [perm[i : i + b] for i in range(0, len(perm), b)]
    return BatchSchedule(batches=batches, batch_size=b, policy="random")


def select_num_sequences(
    g: Graph, b: int, M: int, S_max: int, seed: int = 0
) -> tuple[int, ShufflingErrorReport]:
    """Smallest S in [1, S_max] whose shifted-BFS schedule keeps the
    shuffling error within sqrt(b*M)/n; returns S_max with
    ``threshold_met=False`` when none qualifies."""
    if S_max < 1:
        raise ValueError("S_max must be >= 1")
    if g.labels is None:
        raise ValueError("graph has no labels")
    n = g.num_train()
    threshold = shuffling_error_threshold(b, M, n)
    last_report = None
    for S in range(1, S_max + 1):
        schedule = proximity_schedule(g, S, b, seed=seed)
        report = shuffling_error(schedule, g.labels, threshold=threshold, num_sequences=S)
        last_report = report
        if report.epsilon <= threshold:
            report.threshold_met = True
            return S, report
    last_report.threshold_met = False
    return S_max, last_report


# -- serialization -----------------------------------------------------------------


def save_schedule(schedule: BatchSchedule, path) -> None:
    with open(path, "w") as f:
        f.write(f"# policy {schedule.policy} batch_size {schedule.batch_size}\n")
        for batch in schedule.batches:
            f.write(" ".join(str(int(v)) for v in batch) + "\n")


def load_schedule(path) -> BatchSchedule:
    policy, batch_size = "unknown", 0
    batches = []
    with open(path) as f:
        for line in f:
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                parts = stripped[1:].split()
                if len(parts) >= 4 and parts[0] == "policy":
                    policy = parts[1]
                    batch_size = int(parts[3])
                continue
            batches.append(np.array([int(x) for x in stripped.split()], dtype=np.int64))
    if batch_size == 0 and batches:
        batch_size = max(len(b) for b in batches)
    return BatchSchedule(batches=batches, batch_size=batch_size, policy=policy)
