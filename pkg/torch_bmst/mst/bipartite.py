import logging
from enum import Enum

import numpy as np
import scipy.sparse
import torch
from scipy.sparse.csgraph import connected_components

from torch_bmst.errors import InvalidInstanceError, ResourceLimitError
from torch_bmst.geometry.metrics import MetricKind, as_points, iter_distance_chunks, nearest_distances, paired_distances
from torch_bmst.mst.boruvka import grid_boruvka
from torch_bmst.mst.graph import WeightedGraph
from torch_bmst.mst.kruskal import SpanningTree, kruskal
from torch_bmst.torch_utils.torch_utils import to_numpy

logger = logging.getLogger(__name__)


# largest edge set the brute-force solver materializes
BRUTE_EDGE_LIMIT = 4_000_000


class MSTSolver(str, Enum):
    BRUTE = 'brute'
    GRID_BORUVKA = 'grid_boruvka'

    @classmethod
    def parse(cls, value, n_edges):
        if value is None:
            return cls.BRUTE if n_edges <= BRUTE_EDGE_LIMIT else cls.GRID_BORUVKA
        value = value if isinstance(value, cls) else cls(str(value).lower().replace('-', '_'))
        if value is cls.BRUTE and n_edges > BRUTE_EDGE_LIMIT:
            raise ResourceLimitError(f'[MSTSolver]: brute force needs {n_edges} edges, limit is {BRUTE_EDGE_LIMIT}')
        return value


def bipartite_graph(instance, p=1.0):
    """ Complete bipartite graph with weights |r - b|^p; red i -> i, blue j -> n_R + j. """
    n_red = instance.n_red
    if n_red * instance.n_blue > BRUTE_EDGE_LIMIT:
        raise ResourceLimitError(f'[bipartite_graph]: {n_red * instance.n_blue} edges exceed {BRUTE_EDGE_LIMIT}')
    u, v, w = [], [], []
    cols = np.arange(instance.n_blue)
    for start, block in iter_distance_chunks(instance.metric, instance.red, instance.blue):
        rows = np.arange(start, start + block.shape[0])
        uu, vv = np.meshgrid(rows, cols, indexing='ij')
        u.append(uu.reshape(-1))
        v.append(vv.reshape(-1) + n_red)
        w.append(to_numpy(block).reshape(-1) ** p)
    return WeightedGraph(instance.n, np.concatenate(u), np.concatenate(v), np.concatenate(w))


def _tree_from_edges(points, edges, metric):
    edges = np.sort(edges, axis=1)
    lo = torch.from_numpy(edges[:, 0]).to(points.device)
    hi = torch.from_numpy(edges[:, 1]).to(points.device)
    lengths = paired_distances(metric, points[lo], points[hi])
    return SpanningTree(points.shape[0], edges, to_numpy(lengths))


def bipartite_mst(instance, solver=None):
    """
    Exact MST of the complete bipartite graph between red and blue points.
    Brute runs Kruskal on all n_R * n_B edges, GridBoruvka never builds them.
    The tree is the same for every exponent p, lengths are stored and costs computed on demand.
    """
    if instance.n_red < 1 or instance.n_blue < 1:
        raise InvalidInstanceError('[bipartite_mst]: both colors must be nonempty')
    solver = MSTSolver.parse(solver, instance.n_red * instance.n_blue)
    if solver is MSTSolver.BRUTE:
        return kruskal(bipartite_graph(instance, p=1.0))[0]
    edges = grid_boruvka(instance.points, instance.metric, is_red=torch.from_numpy(instance.is_red))
    return _tree_from_edges(instance.points, edges, instance.metric)


def euclidean_mst(points, metric=MetricKind.UNIT_CUBE, solver=None):
    """
    Ordinary (single color) MST of a point set, C^p(R) in the mono-to-bipartite bounds.
    """
    metric = MetricKind.parse(metric)
    P = as_points(points, name='euclidean_mst')
    m = P.shape[0]
    if m == 1:
        return SpanningTree(1, np.zeros((0, 2), dtype=np.int64), [])
    solver = MSTSolver.parse(solver, m * (m - 1) // 2)
    if solver is MSTSolver.BRUTE:
        u, v, w = [], [], []
        for start, block in iter_distance_chunks(metric, P, P):
            rows, cols = np.nonzero(np.triu(np.ones((block.shape[0], m), dtype=bool), k=start + 1))
            u.append(rows + start)
            v.append(cols)
            w.append(to_numpy(block)[rows, cols])
        return kruskal(WeightedGraph(m, np.concatenate(u), np.concatenate(v), np.concatenate(w)))[0]
    edges = grid_boruvka(P, metric)
    return _tree_from_edges(P, edges, metric)


def _is_connected(n, u, v, mask):
    adj = scipy.sparse.coo_matrix((np.ones(int(mask.sum())), (u[mask], v[mask])), shape=(n, n))
    n_comp, _ = connected_components(adj, directed=False)
    return n_comp == 1


def bottleneck_threshold(instance):
    """
    min{z : bipartite G(z) connected}, by binary search over the sorted candidate distances.
    Candidates are collected from chunked distance blocks below a radius that starts at the
    Hausdorff distance (a lower bound) and doubles until G(radius) is connected.
    """
    red, blue, metric = instance.red, instance.blue, instance.metric
    n, n_red = instance.n, instance.n_red
    radius = max(float(nearest_distances(metric, red, blue).max()), float(nearest_distances(metric, blue, red).max()))
    diameter = metric.diameter(instance.dim)
    while True:
        u, v, w = [], [], []
        for start, block in iter_distance_chunks(metric, red, blue):
            rows, cols = torch.nonzero(block <= radius, as_tuple=True)
            u.append(to_numpy(rows + start, dtype=np.int64))
            v.append(to_numpy(cols + n_red, dtype=np.int64))
            w.append(to_numpy(block[rows, cols]))
        u, v, w = np.concatenate(u), np.concatenate(v), np.concatenate(w)
        if _is_connected(n, u, v, np.ones_like(w, dtype=bool)):
            break
        assert radius < np.inf, "the complete bipartite graph is connected"
        radius = 2.0 * radius if radius > 0 else 1e-6
        if radius >= diameter:
            radius = np.inf

    candidates = np.unique(w)
    lo, hi = 0, candidates.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _is_connected(n, u, v, w <= candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])
