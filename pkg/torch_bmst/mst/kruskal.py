import csv
import logging
from pathlib import Path

import numpy as np

from torch_bmst.errors import DisconnectedGraphError, PreconditionError
from torch_bmst.mst.graph import WeightedGraph
from torch_bmst.mst.union_find import UnionFind

logger = logging.getLogger(__name__)


class SpanningTree:
    """
    Edges stored as (lo, hi) vertex pairs with their lengths. The tree does not depend on
    the cost exponent p, so costs are computed on demand.
    """

    def __init__(self, n_vertices, edges, lengths):
        self.n_vertices = int(n_vertices)
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        self.edges = np.sort(edges, axis=1)
        self.lengths = np.asarray(lengths, dtype=np.float64).reshape(-1)
        assert self.edges.shape[0] == self.lengths.shape[0]
        assert self.edges.shape[0] == max(self.n_vertices - 1, 0), \
            f'a spanning tree on {self.n_vertices} vertices has {self.n_vertices - 1} edges, got {self.edges.shape[0]}'

    @property
    def n_edges(self):
        return self.edges.shape[0]

    @property
    def degrees(self):
        return np.bincount(self.edges.reshape(-1), minlength=self.n_vertices)

    @property
    def max_degree(self):
        return int(self.degrees.max()) if self.n_edges else 0

    @property
    def bottleneck(self):
        return float(self.lengths.max()) if self.n_edges else 0.0

    def cost(self, p=1.0):
        return float(np.sum(self.lengths ** p))

    def edge_set(self):
        return frozenset(map(tuple, self.edges.tolist()))

    def is_spanning_tree(self):
        uf = UnionFind(self.n_vertices)
        for a, b in self.edges.tolist():
            if not uf.union(a, b):
                return False
        return uf.count == 1

    def __repr__(self):
        return f'SpanningTree(m={self.n_vertices}, cost_1={self.cost(1.0):.6f}, bottleneck={self.bottleneck:.6f}, max_degree={self.max_degree})'


class MergeProfile:
    """
    Union events of a Kruskal run: threshold z and the sizes of the two merged components.
    """

    def __init__(self, z, size_a, size_b, n_vertices):
        self.z = np.asarray(z, dtype=np.float64)
        self.size_a = np.asarray(size_a, dtype=np.int64)
        self.size_b = np.asarray(size_b, dtype=np.int64)
        self.n_vertices = int(n_vertices)
        assert np.all(np.diff(self.z) >= 0), 'merge thresholds must be nondecreasing'

    def __len__(self):
        return self.z.shape[0]

    def __repr__(self):
        return f'MergeProfile(m={self.n_vertices}, events={len(self)})'


def kruskal(graph):
    """
    Kruskal's algorithm over the finite-weight edges, ties broken by (weight, lo, hi).
    :return: (SpanningTree, MergeProfile)
    """
    m = graph.n_vertices
    order = graph.sorted_order()
    us, vs, ws = graph.u[order].tolist(), graph.v[order].tolist(), graph.w[order].tolist()

    uf = UnionFind(m)
    tree_edges, tree_lengths = [], []
    z, size_a, size_b = [], [], []
    for a, b, w in zip(us, vs, ws):
        if len(tree_edges) == m - 1:
            break
        ra, rb = uf.find(a), uf.find(b)
        if ra == rb:
            continue
        size_a.append(uf.size[ra])
        size_b.append(uf.size[rb])
        uf.union_roots(ra, rb)
        z.append(w)
        tree_edges.append((a, b))
        tree_lengths.append(w)

    if len(tree_edges) < m - 1:
        roots = uf.roots()
        other = int(np.nonzero(roots != roots[0])[0][0])
        raise DisconnectedGraphError(0, other)

    tree = SpanningTree(m, np.asarray(tree_edges, dtype=np.int64).reshape(-1, 2), tree_lengths)
    return tree, MergeProfile(z, size_a, size_b, m)


def merge_profile_from_tree(tree):
    """ Kruskal on the tree edges alone reproduces the merge profile of the full graph. """
    graph = WeightedGraph(tree.n_vertices, tree.edges[:, 0], tree.edges[:, 1], tree.lengths)
    return kruskal(graph)[1]


def component_integral(profile):
    """ int_0^inf (C_{G(z)} - 1) dz = sum of the merge thresholds """
    return float(np.sum(profile.z))


def ck_integral(profile, k):
    """
    int_0^inf (C_{k,G(z)} - 1) dz, where C_k counts components with at least k vertices.
    Each merge is an up-jump (two sub-k parts make a part of size >= k), a down-jump
    (two parts of size >= k) or neutral; the integral is sum_down z - sum_up z.
    For k > m no component ever reaches size k and the integral is -inf.
    """
    if k < 1:
        raise PreconditionError(f'[ck_integral]: k must be >= 1, got {k}')
    if k > profile.n_vertices:
        return -np.inf
    a, b = profile.size_a, profile.size_b
    up = (a < k) & (b < k) & (a + b >= k)
    down = (a >= k) & (b >= k)
    return float(np.sum(profile.z[down]) - np.sum(profile.z[up]))


def mst_cost(tree, p=1.0):
    return tree.cost(p)


def save_tree(tree, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(['u', 'v', 'length'])
        for (a, b), length in zip(tree.edges.tolist(), tree.lengths.tolist()):
            writer.writerow([a, b, repr(float(length))])
    return path


def tree_rows(tree):
    return [{'u': a, 'v': b, 'length': float(length)} for (a, b), length in zip(tree.edges.tolist(), tree.lengths.tolist())]


def tree_summary(tree, instance, p=1.0):
    summary = {'cost_p': tree.cost(p), 'bottleneck': tree.bottleneck, 'max_degree': tree.max_degree, 'p': p}
    summary.update(instance.describe())
    return summary
