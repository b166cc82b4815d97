import numpy as np

from torch_bmst.errors import DisconnectedGraphError, NoValidPartitionError, PreconditionError
from torch_bmst.mst.graph import WeightedGraph
from torch_bmst.mst.kruskal import SpanningTree, kruskal
from torch_bmst.mst.union_find import UnionFind


class GkReduction:
    """
    Partition of the vertices into classes of size >= k and the quotient graph whose weights are
    the lightest edges between classes.
    """

    def __init__(self, k, labels, reduced_graph, reduced_tree):
        self.k = k
        self.labels = labels
        self.reduced_graph = reduced_graph
        self.reduced_tree = reduced_tree
        self.reduced_cost = reduced_tree.cost(1.0)

    @property
    def n_classes(self):
        return self.reduced_graph.n_vertices

    @property
    def classes(self):
        return [np.nonzero(self.labels == i)[0] for i in range(self.n_classes)]

    def __repr__(self):
        return f'GkReduction(k={self.k}, classes={self.n_classes}, reduced_cost={self.reduced_cost:.6f})'


def gk_reduction(graph, k):
    """
    Sweeps the edges by (weight, edge index), which acts as a deterministic perturbation of equal
    weights. A class is seeded whenever two components smaller than k merge into one of size >= k;
    vertices of a sub-k component joining a component that already holds classes go to the class
    with the smallest index there.
    """
    m = graph.n_vertices
    if k < 2:
        raise PreconditionError(f'[gk_reduction]: k must be >= 2, got {k}')
    if k > m:
        raise NoValidPartitionError(f'[gk_reduction]: k={k} exceeds the number of vertices m={m}')

    finite = np.nonzero(graph.finite_mask)[0]
    order = finite[np.argsort(graph.w[finite], kind='stable')]

    uf = UnionFind(m)
    members = {v: [v] for v in range(m)}
    first_class = {}
    labels = np.full(m, -1, dtype=np.int64)
    n_classes = 0
    for a, b in zip(graph.u[order].tolist(), graph.v[order].tolist()):
        if uf.count == 1:
            break
        ra, rb = uf.find(a), uf.find(b)
        if ra == rb:
            continue
        sa, sb = uf.size[ra], uf.size[rb]
        ca, cb = first_class.pop(ra, None), first_class.pop(rb, None)
        ma, mb = members.pop(ra), members.pop(rb)

        cls = None
        if sa < k and sb < k:
            if sa + sb >= k:
                cls = n_classes
                labels[ma] = cls
                labels[mb] = cls
                n_classes += 1
        elif sa >= k and sb >= k:
            cls = min(ca, cb)
        elif sa >= k:
            cls = ca
            labels[mb] = cls
        else:
            cls = cb
            labels[ma] = cls

        root = uf.union_roots(ra, rb)
        if len(ma) < len(mb):
            ma, mb = mb, ma
        ma.extend(mb)
        members[root] = ma
        if cls is not None:
            first_class[root] = cls

    if uf.count > 1:
        roots = uf.roots()
        raise DisconnectedGraphError(0, int(np.nonzero(roots != roots[0])[0][0]))
    assert np.all(labels >= 0), 'every vertex lies in a class once the graph is connected'

    # quotient graph: lightest edge between every pair of classes
    lu, lv = labels[graph.u[finite]], labels[graph.v[finite]]
    w = graph.w[finite]
    cross = lu != lv
    lo, hi, w = np.minimum(lu, lv)[cross], np.maximum(lu, lv)[cross], w[cross]
    keys = lo * n_classes + hi
    by_key = np.lexsort((w, keys))
    _, first = np.unique(keys[by_key], return_index=True)
    pick = by_key[first]
    reduced_graph = WeightedGraph(n_classes, lo[pick], hi[pick], w[pick])

    if n_classes == 1:
        reduced_tree = SpanningTree(1, np.zeros((0, 2), dtype=np.int64), [])
    else:
        reduced_tree = kruskal(reduced_graph)[0]
    return GkReduction(k, labels, reduced_graph, reduced_tree)
