"""
Deliberately wrong spanning trees, used to exercise the failing branch of every check.
"""
import numpy as np

from torch_bmst.errors import PreconditionError
from torch_bmst.geometry.metrics import pairwise_distances
from torch_bmst.mst.bipartite import bipartite_graph
from torch_bmst.mst.graph import WeightedGraph
from torch_bmst.mst.kruskal import SpanningTree, kruskal
from torch_bmst.mst.union_find import UnionFind
from torch_bmst.torch_utils.torch_utils import to_numpy


def _split(tree, removed):
    """ Component labels (0 or 1 side) after deleting tree edge `removed`. """
    uf = UnionFind(tree.n_vertices)
    for i, (a, b) in enumerate(tree.edges.tolist()):
        if i != removed:
            uf.union(a, b)
    roots = uf.roots()
    return roots == roots[tree.edges[removed, 0]]


def _crossing_edges(instance, side):
    D = to_numpy(pairwise_distances(instance.metric, instance.red, instance.blue))
    red_side, blue_side = side[:instance.n_red], side[instance.n_red:]
    crossing = red_side[:, None] != blue_side[None, :]
    rows, cols = np.nonzero(crossing)
    return rows, cols + instance.n_red, D[rows, cols]


def _replace(tree, removed, new_edge, new_length):
    edges = np.delete(tree.edges, removed, axis=0)
    lengths = np.delete(tree.lengths, removed)
    return SpanningTree(tree.n_vertices, np.vstack([edges, [new_edge]]), np.append(lengths, new_length))


def corrupt_swap_edge(instance, tree):
    """
    Deletes the shortest tree edge and reconnects the two sides with the second lightest
    crossing edge. The result is a spanning tree that violates the cut property.
    """
    removed = int(np.argmin(tree.lengths))
    rows, cols, w = _crossing_edges(instance, _split(tree, removed))
    if w.shape[0] < 2:
        raise PreconditionError('[corrupt_swap_edge]: the cut has a single crossing edge, nothing to swap in')
    order = np.lexsort((cols, rows, w))
    e = order[1]
    return _replace(tree, removed, (rows[e], cols[e]), w[e])


def corrupt_bad_reconnect(instance, tree):
    """
    Deletes the bottleneck edge and reconnects the two sides with the longest crossing edge.
    """
    removed = int(np.argmax(tree.lengths))
    rows, cols, w = _crossing_edges(instance, _split(tree, removed))
    if w.shape[0] < 2:
        raise PreconditionError('[corrupt_bad_reconnect]: the cut has a single crossing edge')
    e = int(np.lexsort((cols, rows, -w))[0])
    return _replace(tree, removed, (rows[e], cols[e]), w[e])


def corrupt_max_tree(instance, tree=None):
    """
    Maximum-weight bipartite spanning tree: the heaviest tree the instance admits.
    """
    graph = bipartite_graph(instance, p=1.0)
    top = graph.w.max() if graph.n_edges else 0.0
    flipped = WeightedGraph(graph.n_vertices, graph.u, graph.v, top - graph.w)
    edges = kruskal(flipped)[0].edges
    D = to_numpy(pairwise_distances(instance.metric, instance.red, instance.blue))
    lengths = D[edges[:, 0], edges[:, 1] - instance.n_red]
    return SpanningTree(instance.n, edges, lengths)


CORRUPTIONS = {
    'swap': corrupt_swap_edge,
    'reconnect': corrupt_bad_reconnect,
    'max_tree': corrupt_max_tree,
}
