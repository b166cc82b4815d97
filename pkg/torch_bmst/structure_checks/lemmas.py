import logging
import math

import numpy as np
import torch

from torch_bmst.errors import PreconditionError, TreeMismatchError, UnsupportedRegimeError
from torch_bmst.geometry.instance import BipartiteInstance, boundary_shell
from torch_bmst.geometry.metrics import (
    MetricKind, as_points, hausdorff, nearest_distances, paired_distances, pairwise_distances,
)
from torch_bmst.mst.bipartite import bipartite_graph, bipartite_mst, bottleneck_threshold, euclidean_mst
from torch_bmst.mst.kruskal import kruskal
from torch_bmst.structure_checks.report import LemmaReport
from torch_bmst.torch_utils.seed import make_generator
from torch_bmst.torch_utils.torch_utils import to_numpy

logger = logging.getLogger(__name__)


# absolute tolerance for inequalities between independently summed costs
COST_TOL = 1e-9


def _check_tree(instance, tree):
    if tree.n_vertices != instance.n:
        raise TreeMismatchError(f'[structure_checks]: tree spans {tree.n_vertices} vertices, instance has {instance.n}')
    if tree.n_edges and (not np.all(tree.edges[:, 0] < instance.n_red) or not np.all(tree.edges[:, 1] >= instance.n_red)):
        raise TreeMismatchError('[structure_checks]: tree has an edge between two points of the same color')
    if not tree.is_spanning_tree():
        raise TreeMismatchError('[structure_checks]: edge list is not a spanning tree')


def _edge_dict(a, b, length):
    return {'u': int(a), 'v': int(b), 'length': float(length)}


def check_cut_property(instance, tree):
    """
    Every vertex whose lightest cross-color edge is unique has that edge in the MST.
    """
    _check_tree(instance, tree)
    D = pairwise_distances(instance.metric, instance.red, instance.blue)
    edges = tree.edge_set()
    n_red = instance.n_red
    slack = math.inf
    for side, M, offset, other_offset in ((0, D, 0, n_red), (1, D.T, n_red, 0)):
        if M.shape[1] == 1:
            lightest = torch.zeros(M.shape[0], dtype=torch.long)
            unique = torch.ones(M.shape[0], dtype=torch.bool)
        else:
            vals, idx = torch.topk(M, k=2, dim=1, largest=False)
            lightest = idx[:, 0]
            gap = vals[:, 1] - vals[:, 0]
            unique = gap > 0
            if bool(unique.any()):
                slack = min(slack, float(gap[unique].min()))
        for i in torch.nonzero(unique).flatten().tolist():
            a, b = i + offset, int(lightest[i]) + other_offset
            if (min(a, b), max(a, b)) not in edges:
                return LemmaReport('cut_property', instance.describe(), False,
                                   witness={'vertex': a, 'missing_edge': _edge_dict(min(a, b), max(a, b), M[i, lightest[i]])},
                                   slack=slack)
    return LemmaReport('cut_property', instance.describe(), True, slack=slack)


def check_empty_cone(instance, tree):
    """
    For a tree edge {r, b} with delta = |r - b| > H = hausdorff(R, B), no red point lies in the lens
    {x : |x - r| < delta - H and |x - b| < delta}, and no blue point in the lens with the roles swapped.
    Slack is the smallest clearance max(|x - r| - (delta - H), |x - b| - delta) over all tested points.
    """
    _check_tree(instance, tree)
    H = hausdorff(instance.red, instance.blue, instance.metric)
    long_edges = np.nonzero(tree.lengths > H)[0]
    if long_edges.size == 0:
        return LemmaReport('empty_cone', instance.describe(), True, vacuous=True, details={'hausdorff': H})

    P = instance.points
    n_red = instance.n_red
    clearance = math.inf
    for e in long_edges.tolist():
        r, b = tree.edges[e]
        delta = float(tree.lengths[e])
        # (own endpoint, far endpoint, same-color points of the own endpoint)
        for own, far, group in ((r, b, range(0, n_red)), (b, r, range(n_red, instance.n))):
            idx = torch.tensor([i for i in group if i != own], dtype=torch.long)
            if idx.numel() == 0:
                continue
            d_own = pairwise_distances(instance.metric, P[idx], P[own:own + 1]).flatten()
            d_far = pairwise_distances(instance.metric, P[idx], P[far:far + 1]).flatten()
            inside = (d_own < delta - H) & (d_far < delta)
            c = torch.maximum(d_own - (delta - H), d_far - delta)
            clearance = min(clearance, float(c.min()))
            if bool(inside.any()):
                j = int(idx[torch.nonzero(inside).flatten()[0]])
                return LemmaReport('empty_cone', instance.describe(), False,
                                   witness={'edge': _edge_dict(r, b, delta), 'point': j, 'hausdorff': H},
                                   slack=clearance)
    return LemmaReport('empty_cone', instance.describe(), True, slack=clearance,
                       details={'hausdorff': H, 'long_edges': int(long_edges.size)})


def check_p_invariance(instance, ps=(0.5, 1.0, 2.0), tree=None):
    """
    Kruskal on the weights |r - b|^p returns the same edge set for every p (and the same as `tree`).
    """
    if tree is not None:
        _check_tree(instance, tree)
    reference = tree.edge_set() if tree is not None else None
    for p in ps:
        edges = kruskal(bipartite_graph(instance, p=p))[0].edge_set()
        if reference is None:
            reference = edges
            continue
        if edges != reference:
            extra = sorted(edges - reference)
            missing = sorted(reference - edges)
            return LemmaReport('p_invariance', instance.describe(), False,
                               witness={'p': p, 'only_in_solution': [list(e) for e in extra[:1]],
                                        'only_in_reference': [list(e) for e in missing[:1]]})
    return LemmaReport('p_invariance', instance.describe(), True, details={'ps': list(ps)})


def check_bottleneck_optimality(instance, tree):
    """
    An MST is a minimum bottleneck spanning tree: its longest edge equals the connectivity threshold.
    Both sides come out of the same distance arithmetic, so they are compared exactly.
    """
    _check_tree(instance, tree)
    threshold = bottleneck_threshold(instance)
    gap = tree.bottleneck - threshold
    if gap != 0.0:
        e = int(np.argmax(tree.lengths))
        return LemmaReport('bottleneck_optimality', instance.describe(), False,
                           witness={'edge': _edge_dict(*tree.edges[e], tree.lengths[e]), 'threshold': threshold},
                           slack=-abs(gap))
    return LemmaReport('bottleneck_optimality', instance.describe(), True, slack=0.0,
                       details={'bottleneck': tree.bottleneck, 'threshold': threshold})


def mono_to_bi_constant(p):
    """ (a + b)^p <= max(1, 2^{p-1}) (a^p + b^p) """
    return max(1.0, 2.0 ** (p - 1.0))


def check_mono_to_bi_bound(R, B, p, metric=MetricKind.UNIT_CUBE, tree=None):
    """
    C^p(R, B) <= C (C^p(R) + sum_r dist(B, r)^p + sum_b dist(R, b)^p) with C = max(1, 2^{p-1}).
    """
    metric = MetricKind.parse(metric)
    R = as_points(R, name='check_mono_to_bi_bound')
    B = as_points(B, tensor_args={'device': R.device, 'dtype': R.dtype}, name='check_mono_to_bi_bound')
    instance = BipartiteInstance(R, B, metric=metric)
    if tree is None:
        tree = bipartite_mst(instance)
    else:
        _check_tree(instance, tree)
    lhs = tree.cost(p)
    mono = euclidean_mst(R, metric).cost(p)
    red_terms = float(nearest_distances(metric, R, B).pow(p).sum())
    blue_terms = float(nearest_distances(metric, B, R).pow(p).sum())
    C = mono_to_bi_constant(p)
    rhs = C * (mono + red_terms + blue_terms)
    details = {'lhs': lhs, 'rhs': rhs, 'constant': C, 'p': p}
    if lhs > rhs + COST_TOL:
        e = int(np.argmax(tree.lengths))
        return LemmaReport('mono_to_bi_bound', instance.describe(), False,
                           witness={'lhs': lhs, 'rhs': rhs, 'longest_edge': _edge_dict(*tree.edges[e], tree.lengths[e])},
                           slack=rhs - lhs, details=details)
    return LemmaReport('mono_to_bi_bound', instance.describe(), True, slack=rhs - lhs, details=details)


def check_bottleneck_mono_to_bi(R, B, metric=MetricKind.UNIT_CUBE, tree=None):
    """
    C^inf(R, B) <= C^inf(R) + hausdorff(R, B).
    """
    metric = MetricKind.parse(metric)
    R = as_points(R, name='check_bottleneck_mono_to_bi')
    B = as_points(B, tensor_args={'device': R.device, 'dtype': R.dtype}, name='check_bottleneck_mono_to_bi')
    instance = BipartiteInstance(R, B, metric=metric)
    tree = bipartite_mst(instance) if tree is None else tree
    lhs = tree.bottleneck
    rhs = euclidean_mst(R, metric).bottleneck + hausdorff(R, B, metric)
    if lhs > rhs + COST_TOL:
        e = int(np.argmax(tree.lengths))
        return LemmaReport('bottleneck_mono_to_bi', instance.describe(), False,
                           witness={'lhs': lhs, 'rhs': rhs, 'edge': _edge_dict(*tree.edges[e], tree.lengths[e])},
                           slack=rhs - lhs)
    return LemmaReport('bottleneck_mono_to_bi', instance.describe(), True, slack=rhs - lhs)


def check_torus_cube_transfer(instance, delta, p=1.0, tree=None):
    """
    If C^inf(R, B) <= delta < 1/2 then C^p(R, B) <= C^p(R, B | torus) + C^p(R_delta, B_delta),
    R_delta and B_delta being the points outside [delta, 1 - delta]^d.
    """
    if not 0 < delta < 0.5:
        raise PreconditionError(f'[check_torus_cube_transfer]: delta must lie in (0, 1/2), got {delta}')
    cube = instance.with_metric(MetricKind.UNIT_CUBE)
    threshold = bottleneck_threshold(cube)
    if threshold > delta:
        raise PreconditionError(f'[check_torus_cube_transfer]: bottleneck {threshold:.6g} exceeds delta {delta:.6g}')
    if tree is None:
        tree = bipartite_mst(cube)
    else:
        _check_tree(cube, tree)

    torus_tree = bipartite_mst(instance.with_metric(MetricKind.FLAT_TORUS))
    lhs = tree.cost(p)
    torus_cost = torus_tree.cost(p)

    red_shell, blue_shell = boundary_shell(cube, delta)
    details = {'delta': delta, 'p': p, 'cube_cost': lhs, 'torus_cost': torus_cost,
               'shell_sizes': [int(red_shell.numel()), int(blue_shell.numel())]}
    if red_shell.numel() and blue_shell.numel():
        shell = BipartiteInstance(cube.red[red_shell], cube.blue[blue_shell], metric=MetricKind.UNIT_CUBE)
        shell_cost = bipartite_mst(shell).cost(p)
    else:
        # a torus edge can only wrap when both endpoints lie in the shells
        P = cube.points
        a, b = torch.from_numpy(torus_tree.edges[:, 0]), torch.from_numpy(torus_tree.edges[:, 1])
        cube_lengths = to_numpy(paired_distances(MetricKind.UNIT_CUBE, P[a], P[b]))
        if np.any(torus_tree.lengths < cube_lengths - 1e-15):
            return LemmaReport('torus_cube_transfer', cube.describe(), True, vacuous=True, details=details)
        shell_cost = 0.0
    rhs = torus_cost + shell_cost
    details.update({'shell_cost': shell_cost, 'rhs': rhs})
    if lhs > rhs + COST_TOL:
        e = int(np.argmax(tree.lengths))
        return LemmaReport('torus_cube_transfer', cube.describe(), False,
                           witness={'lhs': lhs, 'rhs': rhs, 'longest_edge': _edge_dict(*tree.edges[e], tree.lengths[e])},
                           slack=rhs - lhs, details=details)
    return LemmaReport('torus_cube_transfer', cube.describe(), True, slack=rhs - lhs, details=details)


def check_bounded_difference(instance, p, seed=0, index=None, new_point=None, solver=None):
    """
    Resampling one point changes C^p by at most d^{p/2} (Delta(T) + Delta(T')), with Delta the
    maximum degree of the trees before and after. Only the p <= 1 regime is testable this way.
    """
    if p > 1:
        raise UnsupportedRegimeError(f'[check_bounded_difference]: p={p} > 1 is outside the resampling regime')
    gen = make_generator(seed)
    if index is None:
        index = int(torch.randint(instance.n, (1,), generator=gen))
    if new_point is None:
        new_point = torch.rand((instance.dim,), generator=gen, dtype=torch.float64)
    new_point = torch.as_tensor(new_point, dtype=instance.red.dtype).reshape(-1)

    red, blue = instance.red.clone(), instance.blue.clone()
    if index < instance.n_red:
        red[index] = new_point
    else:
        blue[index - instance.n_red] = new_point
    resampled = BipartiteInstance(red, blue, metric=instance.metric, seed=instance.seed)

    before = bipartite_mst(instance, solver=solver)
    after = bipartite_mst(resampled, solver=solver)
    diff = abs(before.cost(p) - after.cost(p))
    bound = instance.dim ** (p / 2.0) * (before.max_degree + after.max_degree)
    details = {'index': index, 'difference': diff, 'bound': bound}
    if diff > bound + COST_TOL:
        return LemmaReport('bounded_difference', instance.describe(), False,
                           witness={'index': index, 'difference': diff, 'bound': bound},
                           slack=bound - diff, details=details)
    return LemmaReport('bounded_difference', instance.describe(), True, slack=bound - diff, details=details)
