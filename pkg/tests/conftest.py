import functools

import numpy as np
import pytest

from gnnio.graph import Graph, build_graph, generate_power_law


def make_graph(edges, n, train=None, labels=None) -> Graph:
    g = build_graph(np.array(edges, dtype=np.int64).reshape(-1, 2), n, undirected=True,
                    labels=None if labels is None else np.array(labels, dtype=np.int64))
    if train is not None:
        g.train_mask[:] = False
        g.train_mask[list(train)] = True
    return g


@functools.lru_cache(maxsize=8)
def planted_graph(n=20000, avg_degree=10, seed=1, num_labels=32, train_fraction=0.1):
    return generate_power_law(n, avg_degree, seed=seed, train_fraction=train_fraction,
                              num_labels=num_labels)


@pytest.fixture
def path5():
    return make_graph([(0, 1), (1, 2), (2, 3), (3, 4)], 5, train=range(5))


@pytest.fixture
def two_triangles():
    return make_graph([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)], 6, train=range(6))


@pytest.fixture
def star6():
    # center 0, leaves 1..5
    return make_graph([(0, i) for i in range(1, 6)], 6, train=range(6))
