import numpy as np
import pytest

from torch_bmst.geometry.instance import BipartiteInstance, sample_uniform
from torch_bmst.mst.graph import WeightedGraph


# two-level clustering example: classes {0,1,2,6}, {3,4,5}, {7,8,9} for k = 3
EXAMPLE_EDGES = [
    (0, 1, 1.0), (1, 2, 2.0), (2, 3, 5.0), (1, 3, 6.0), (3, 4, 3.0), (4, 5, 4.0),
    (5, 6, 6.0), (6, 2, 7.0), (6, 7, 9.0), (7, 8, 7.0), (8, 9, 8.0),
]


@pytest.fixture
def example_graph():
    return WeightedGraph.from_edges(10, EXAMPLE_EDGES)


@pytest.fixture
def small_instance():
    return sample_uniform(40, 35, 2, seed=11)


@pytest.fixture
def line_instance():
    """ R = {0, 0.3, 0.6}, B = {0.05, 0.35, 0.65} on the unit interval """
    red = np.array([[0.0], [0.3], [0.6]])
    blue = np.array([[0.05], [0.35], [0.65]])
    return BipartiteInstance(red, blue)


def random_graph(m, density, rng):
    """ Connected random graph: a random spanning path plus extra edges with probability `density`. """
    perm = rng.permutation(m)
    edges = {(min(a, b), max(a, b)) for a, b in zip(perm[:-1], perm[1:])}
    for a in range(m):
        for b in range(a + 1, m):
            if rng.random() < density:
                edges.add((a, b))
    edges = sorted(edges)
    w = rng.random(len(edges))
    u, v = zip(*edges)
    return WeightedGraph(m, u, v, w)
