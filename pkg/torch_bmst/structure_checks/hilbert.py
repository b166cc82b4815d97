import numpy as np
from hilbertcurve.hilbertcurve import HilbertCurve

from torch_bmst.errors import UnsupportedDimensionError
from torch_bmst.geometry.grid import cell_coordinates
from torch_bmst.geometry.metrics import MetricKind, as_points, paired_distances
from torch_bmst.mst.bipartite import euclidean_mst
from torch_bmst.structure_checks.report import LemmaReport
from torch_bmst.torch_utils.torch_utils import to_numpy


# recursion depth per axis, i.e. a 2^10 x ... x 2^10 discretization
HILBERT_ORDER = 10


def hilbert_order(points):
    """
    Permutation sorting points of [0,1]^d along the Hilbert curve, ties by point index.
    In d = 1 the curve is the identity, so raw coordinates are used as keys.
    """
    P = as_points(points, name='hilbert_order')
    n, d = P.shape
    if d not in (1, 2, 3):
        raise UnsupportedDimensionError(f'[hilbert_order]: only d in {{1, 2, 3}} is supported, got {d}')
    if d == 1:
        keys = to_numpy(P[:, 0])
    else:
        cells = to_numpy(cell_coordinates(P, 2 ** HILBERT_ORDER), dtype=np.int64)
        curve = HilbertCurve(HILBERT_ORDER, d)
        keys = np.asarray(curve.distances_from_points(cells.tolist()), dtype=np.int64)
    return np.lexsort((np.arange(n), keys))


def hilbert_chain_bound(points, p=1.0):
    """
    Cost of the path visiting the points in Hilbert order, checked against the MST cost.
    The constant c in chain <= c n^{1 - p/d} is only reported.
    :return: (chain cost, LemmaReport)
    """
    P = as_points(points, name='hilbert_chain_bound')
    n, d = P.shape
    order = hilbert_order(P)
    chain = P[order]
    chain_cost = float(paired_distances(MetricKind.UNIT_CUBE, chain[:-1], chain[1:]).pow(p).sum()) if n > 1 else 0.0
    mst_cost = euclidean_mst(P, MetricKind.UNIT_CUBE).cost(p)
    details = {'chain_cost': chain_cost, 'mst_cost': mst_cost, 'p': p,
               'empirical_constant': chain_cost / n ** (1.0 - p / d)}
    descriptor = {'n': n, 'd': d}
    if mst_cost > chain_cost + 1e-9:
        report = LemmaReport('hilbert_chain', descriptor, False,
                             witness={'chain_cost': chain_cost, 'mst_cost': mst_cost},
                             slack=chain_cost - mst_cost, details=details)
    else:
        report = LemmaReport('hilbert_chain', descriptor, True, slack=chain_cost - mst_cost, details=details)
    return chain_cost, report
