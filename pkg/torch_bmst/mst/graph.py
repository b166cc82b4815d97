import numpy as np
import torch

from torch_bmst.errors import InvalidInstanceError


class WeightedGraph:
    """
    Undirected graph on vertices 0..m-1 with edge arrays (u, v, w).
    An edge of weight +inf is absent: it never connects anything.
    """

    def __init__(self, n_vertices, u, v, w):
        self.n_vertices = int(n_vertices)
        self.u = np.asarray(u, dtype=np.int64).reshape(-1)
        self.v = np.asarray(v, dtype=np.int64).reshape(-1)
        self.w = np.asarray(w, dtype=np.float64).reshape(-1)

        if not (self.u.shape == self.v.shape == self.w.shape):
            raise InvalidInstanceError('[WeightedGraph]: u, v, w must have the same length')
        if np.any(self.u == self.v):
            raise InvalidInstanceError('[WeightedGraph]: self-loops are not allowed')
        if self.n_edges and (min(self.u.min(), self.v.min()) < 0 or max(self.u.max(), self.v.max()) >= self.n_vertices):
            raise InvalidInstanceError(f'[WeightedGraph]: vertex index out of range for m={self.n_vertices}')
        if np.any(np.isnan(self.w)) or np.any(self.w < 0):
            raise InvalidInstanceError('[WeightedGraph]: weights must be nonnegative reals or +inf')

    @classmethod
    def from_edges(cls, n_vertices, edges):
        edges = list(edges)
        if not edges:
            return cls(n_vertices, [], [], [])
        u, v, w = zip(*edges)
        return cls(n_vertices, u, v, w)

    @property
    def n_edges(self):
        return self.w.shape[0]

    @property
    def finite_mask(self):
        return np.isfinite(self.w)

    def sorted_order(self):
        """ Finite edges ordered by (weight, lower endpoint, higher endpoint). """
        finite = np.nonzero(self.finite_mask)[0]
        lo = np.minimum(self.u, self.v)[finite]
        hi = np.maximum(self.u, self.v)[finite]
        return finite[np.lexsort((hi, lo, self.w[finite]))]

    def __repr__(self):
        return f'WeightedGraph(m={self.n_vertices}, edges={self.n_edges})'


def complete_graph(weights):
    """ Graph on the upper triangle of a symmetric (m, m) weight matrix. """
    weights = np.asarray(weights, dtype=np.float64)
    m = weights.shape[0]
    u, v = np.triu_indices(m, k=1)
    return WeightedGraph(m, u, v, weights[u, v])


def random_complete_graph(m, generator):
    """ K_m with i.i.d. uniform(0, 1) weights drawn from a torch generator. """
    u, v = np.triu_indices(m, k=1)
    w = torch.rand(u.shape[0], generator=generator, dtype=torch.float64).numpy()
    return WeightedGraph(m, u, v, w)


def nearest_neighbors(graph):
    """
    n_G(v): the endpoint of the lightest finite edge at v (ties by lower index), -1 if isolated.
    """
    m = graph.n_vertices
    nn = np.full(m, -1, dtype=np.int64)
    # in (w, lo, hi) order the first edge seen at a vertex is its lightest, lowest partner first
    for e in graph.sorted_order():
        a, b = graph.u[e], graph.v[e]
        if nn[a] < 0:
            nn[a] = b
        if nn[b] < 0:
            nn[b] = a
    return nn
