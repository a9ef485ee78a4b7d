import numpy as np
import pytest

from cscluster import Graph, SbmParams, sbm_generate


def path_graph(n=3):
    i = np.arange(n - 1)
    return Graph(n, i, i + 1, np.ones(n - 1))


def triangle_graph():
    return Graph(3, [0, 1, 0], [1, 2, 2], [1.0, 1.0, 1.0])


def clique_graph(size, offset=0, n=None):
    i, j = np.triu_indices(size, 1)
    return Graph(n or size, i + offset, j + offset, np.ones(i.size))


def disjoint_cliques(k, size):
    """k disjoint complete graphs of the given size, cluster c on block c."""
    n = k * size
    ii, jj = [], []
    for c in range(k):
        i, j = np.triu_indices(size, 1)
        ii.append(i + c * size)
        jj.append(j + c * size)
    labels = np.repeat(np.arange(k), size)
    return Graph(n, np.concatenate(ii), np.concatenate(jj),
                 np.ones(k * size * (size - 1) // 2)), labels


@pytest.fixture(scope="session")
def sbm300():
    """Well-clustered planted graph reused by several suites."""
    params = SbmParams(n=300, k=4, s=25, e=1 / 6)
    g, labels = sbm_generate(params, seed=2024)
    return params, g, labels
