"""CSR graph representation, synthetic generators, and text I/O.

Graphs are undirected and stored as symmetric CSR adjacency. Node features
are never materialized; only their dimension and byte size are tracked so
downstream cache/communication accounting can convert node counts to bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class GraphFormatError(ValueError):
    """Raised for malformed edge-list or metadata files."""


@dataclass
class Graph:
    """Immutable CSR graph with optional labels and a training mask.

    ``num_edges`` counts directed adjacency entries, i.e. an undirected
    edge contributes 2. Adjacency lists are sorted ascending, duplicate-free
    and contain no self-loops.
    """

    num_nodes: int
    num_edges: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    labels: np.ndarray | None = None
    train_mask: np.ndarray = field(default=None)  # type: ignore[assignment]
    feature_dim: int = 128
    feature_bytes_per_node: int | None = None

    def __post_init__(self):
        if self.train_mask is None:
            self.train_mask = np.zeros(self.num_nodes, dtype=bool)
        if self.feature_bytes_per_node is None:
            # float32 features, as in the OGB datasets
            self.feature_bytes_per_node = self.feature_dim * 4

    # -- convenience accessors -------------------------------------------------

    def degree(self, v: int) -> int:
        return int(self.row_offsets[v + 1] - self.row_offsets[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self.row_offsets)

    def neighbors(self, v: int) -> np.ndarray:
        return self.col_indices[self.row_offsets[v] : self.row_offsets[v + 1]]

    def train_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.train_mask)

    def num_train(self) -> int:
        return int(self.train_mask.sum())

    def validate(self) -> None:
        """Check CSR invariants; raises AssertionError on violation."""
        off, col = self.row_offsets, self.col_indices
        assert off[0] == 0 and off[-1] == self.num_edges
        assert len(off) == self.num_nodes + 1
        assert np.all(np.diff(off) >= 0)
        if self.num_edges:
            assert col.min() >= 0 and col.max() < self.num_nodes
        for v in range(self.num_nodes):
            adj = self.neighbors(v)
            assert np.all(np.diff(adj) > 0), f"adjacency of {v} not sorted/deduped"
            assert v not in adj, f"self-loop at {v}"
        if self.labels is not None:
            assert np.all(self.labels[self.train_mask] >= 0)


@dataclass
class GraphStats:
    degree_histogram: dict[int, int]
    num_components: int
    num_train: int


# -- construction ---------------------------------------------------------------


def csr_from_edges(edges: np.ndarray, num_nodes: int, undirected: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Build sorted, deduplicated CSR arrays from an (E, 2) edge array.

    Self-loops are dropped. With ``undirected`` both directions are inserted.
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    edges = edges[edges[:, 0] != edges[:, 1]]
    if undirected and len(edges):
        edges = np.concatenate([edges, edges[:, ::-1]])
    if len(edges):
        keys = edges[:, 0] * num_nodes + edges[:, 1]
        keys = np.unique(keys)
        src = keys // num_nodes
        dst = keys % num_nodes
    else:
        src = dst = np.empty(0, dtype=np.int64)
    row_offsets = np.zeros(num_nodes + 1, dtype=np.int64)
    np.add.at(row_offsets, src + 1, 1)
    row_offsets = np.cumsum(row_offsets)
    return row_offsets, dst


def build_graph(
    edges: np.ndarray,
    num_nodes: int,
    undirected: bool = True,
    labels: np.ndarray | None = None,
    train_mask: np.ndarray | None = None,
    feature_dim: int = 128,
) -> Graph:
    off, col = csr_from_edges(edges, num_nodes, undirected=undirected)
    return Graph(
        num_nodes=num_nodes,
        num_edges=len(col),
        row_offsets=off,
        col_indices=col,
        labels=labels,
        train_mask=train_mask,
        feature_dim=feature_dim,
    )


# -- file I/O --------------------------------------------------------------------


def load_edge_list(path, undirected: bool = True) -> Graph:
    """Load a whitespace-separated "src dst" edge list.

    Lines starting with '#' are comments. Node IDs must be nonnegative
    integers; the node count is max ID + 1.
    """
    edges = []
    max_id = -1
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 2:
                raise GraphFormatError(f"{path}: line {lineno}: expected 'src dst', got {stripped!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphFormatError(f"{path}: line {lineno}: non-integer node ID in {stripped!r}") from None
            if u < 0 or v < 0:
                raise GraphFormatError(f"{path}: line {lineno}: negative node ID")
            edges.append((u, v))
            max_id = max(max_id, u, v)
    if not edges:
        raise GraphFormatError(f"{path}: empty graph")
    return build_graph(np.array(edges, dtype=np.int64), max_id + 1, undirected=undirected)


def save_edge_list(g: Graph, path) -> None:
    """Write each undirected edge once as "src dst" with src < dst."""
    with open(path, "w") as f:
        for u in range(g.num_nodes):
            for v in g.neighbors(u):
                if u < v:
                    f.write(f"{u} {v}\n")


def save_metadata(g: Graph, path) -> None:
    """Columnar sidecar: "node_id label is_train", label -1 if absent."""
    labels = g.labels if g.labels is not None else np.full(g.num_nodes, -1, dtype=np.int64)
    with open(path, "w") as f:
        f.write(f"# feature_dim {g.feature_dim}\n")
        for v in range(g.num_nodes):
            f.write(f"{v} {int(labels[v])} {int(g.train_mask[v])}\n")


def load_metadata(g: Graph, path) -> Graph:
    """Attach labels/train_mask/feature_dim from a sidecar file to ``g``."""
    labels = np.full(g.num_nodes, -1, dtype=np.int64)
    train_mask = np.zeros(g.num_nodes, dtype=bool)
    feature_dim = g.feature_dim
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                parts = stripped[1:].split()
                if len(parts) == 2 and parts[0] == "feature_dim":
                    feature_dim = int(parts[1])
                continue
            parts = stripped.split()
            if len(parts) != 3:
                raise GraphFormatError(f"{path}: line {lineno}: expected 'node_id label is_train'")
            v, lab, tr = (int(x) for x in parts)
            if not 0 <= v < g.num_nodes:
                raise GraphFormatError(f"{path}: line {lineno}: node {v} out of range")
            labels[v] = lab
            train_mask[v] = bool(tr)
    has_labels = np.any(labels >= 0)
    return Graph(
        num_nodes=g.num_nodes,
        num_edges=g.num_edges,
        row_offsets=g.row_offsets,
        col_indices=g.col_indices,
        labels=labels if has_labels else None,
        train_mask=train_mask,
        feature_dim=feature_dim,
    )


# -- synthetic generator ----------------------------------------------------------


def generate_power_law(
    n: int,
    avg_degree: int,
    seed: int,
    train_fraction: float = 0.1,
    num_labels: int = 1,
    cross_fraction: float = 0.05,
) -> Graph:
    """Preferential-attachment graph with planted community labels.

    Nodes are split into ``num_labels`` contiguous ID-range communities; each
    community grows by preferential attachment so the degree distribution has
    a power-law tail. A ``cross_fraction`` of nodes gets one extra edge to a
    uniform node of a ring-adjacent community, so label correlates with graph
    structure, the graph is connected, and multi-hop neighborhoods stay
    localized (the regime where partition/ordering locality matters).

    Training nodes are exactly ``floor(train_fraction * n)`` nodes sampled
    without replacement. Deterministic: identical arguments give a
    bit-identical graph.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if avg_degree < 1:
        raise ValueError("avg_degree must be >= 1")
    if avg_degree >= n:
        raise ValueError("avg_degree must be < n")
    if not 0 < train_fraction <= 1:
        raise ValueError("train_fraction must be in (0, 1]")
    if num_labels < 1 or num_labels > n:
        raise ValueError("num_labels must be in [1, n]")

    rng = np.random.default_rng(seed)
    m = max(1, int(round(avg_degree / 2)))
    bounds = [i * n // num_labels for i in range(num_labels + 1)]
    labels = np.empty(n, dtype=np.int64)
    edges: list[tuple[int, int]] = []

    for c in range(num_labels):
        base, end = bounds[c], bounds[c + 1]
        size = end - base
        labels[base:end] = c
        # repeated-endpoint list: sampling from it is degree-proportional
        endpoints: list[int] = []
        for t in range(1, size):
            node = base + t
            k = min(m, t)
            chosen: set[int] = set()
            while len(chosen) < k:
                if endpoints and rng.random() < 0.9:
                    cand = endpoints[int(rng.integers(len(endpoints)))]
                else:
                    cand = base + int(rng.integers(t))
                chosen.add(cand)
            for tgt in chosen:
                edges.append((node, tgt))
                endpoints.append(node)
                endpoints.append(tgt)

    if num_labels > 1 and cross_fraction > 0:
        cross_nodes = np.flatnonzero(rng.random(n) < cross_fraction)
        for v in cross_nodes:
            c = int(labels[v])
            other = (c + (1 if rng.random() < 0.5 else -1)) % num_labels
            lo, hi = bounds[other], bounds[other + 1]
            partner = lo + int(rng.integers(hi - lo))
            edges.append((int(v), partner))
        # guarantee connectivity: one bridge along every ring step
        for c in range(num_labels):
            nxt = (c + 1) % num_labels
            lo, hi = bounds[nxt], bounds[nxt + 1]
            edges.append((bounds[c], lo + int(rng.integers(hi - lo))))

    num_train = int(math.floor(train_fraction * n))
    train_mask = np.zeros(n, dtype=bool)
    train_mask[rng.choice(n, size=num_train, replace=False)] = True

    return build_graph(
        np.array(edges, dtype=np.int64), n, undirected=True, labels=labels, train_mask=train_mask
    )


# -- statistics -------------------------------------------------------------------


def graph_stats(g: Graph) -> GraphStats:
    """Exact degree histogram and connected-component count (union-find)."""
    degs = g.degrees()
    hist_counts = np.bincount(degs)
    histogram = {d: int(c) for d, c in enumerate(hist_counts) if c > 0}

    parent = np.arange(g.num_nodes, dtype=np.int64)

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    src = np.repeat(np.arange(g.num_nodes, dtype=np.int64), degs)
    for u, v in zip(src, g.col_indices):
        if u < v:
            ru, rv = find(int(u)), find(int(v))
            if ru != rv:
                parent[ru] = rv
    roots = {find(int(v)) for v in range(g.num_nodes)}
    return GraphStats(
        degree_histogram=histogram,
        num_components=len(roots),
        num_train=g.num_train(),
    )
