import math
from enum import Enum

import einops
import torch
from scipy.special import gammaln

from torch_bmst.errors import DimensionMismatchError, EmptyPointSetError, InvalidInstanceError
from torch_bmst.torch_utils.torch_utils import DEFAULT_TENSOR_ARGS, to_torch_2d_min


# upper bound on the number of float entries materialized by one chunk of a distance matrix
MAX_CHUNK_ENTRIES = 2 ** 24


class MetricKind(str, Enum):
    UNIT_CUBE = 'cube'
    FLAT_TORUS = 'torus'

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace('_', '').replace('-', '')
        aliases = {'cube': cls.UNIT_CUBE, 'unitcube': cls.UNIT_CUBE,
                   'torus': cls.FLAT_TORUS, 'flattorus': cls.FLAT_TORUS}
        if key not in aliases:
            raise InvalidInstanceError(f'[MetricKind]: unknown metric {value!r}')
        return aliases[key]

    def diameter(self, d):
        return math.sqrt(d) / 2 if self is MetricKind.FLAT_TORUS else math.sqrt(d)


def unit_ball_volume(d):
    """ omega_d = pi^{d/2} / Gamma(d/2 + 1) """
    return math.exp(0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1.0))


def as_points(x, tensor_args=None, name='points'):
    if tensor_args is None:
        tensor_args = DEFAULT_TENSOR_ARGS
    pts = to_torch_2d_min(x, tensor_args=tensor_args)
    if pts.ndim != 2:
        raise DimensionMismatchError(f'[{name}]: expected a (n, d) array, got shape {tuple(pts.shape)}')
    if pts.shape[0] == 0:
        raise EmptyPointSetError(f'[{name}]: empty point list')
    return pts


def coordinate_differences(metric, x, y):
    """
    Per-coordinate absolute differences; on the torus min(|delta|, 1 - |delta|),
    which is exact because the torus metric factorizes per coordinate.
    """
    diff = x - y
    if metric is MetricKind.FLAT_TORUS:
        diff = torch.remainder(diff, 1.0)
        return torch.minimum(diff, 1.0 - diff)
    return diff.abs()


def _norm(diff):
    return diff.pow(2).sum(-1).sqrt()


def paired_distances(metric, X, Y):
    """ Row-aligned distances |X_i - Y_i|, shapes (k, d), (k, d) -> (k,) """
    metric = MetricKind.parse(metric)
    if X.shape != Y.shape:
        raise DimensionMismatchError(f'[paired_distances]: shapes {tuple(X.shape)} and {tuple(Y.shape)} differ')
    return _norm(coordinate_differences(metric, X, Y))


def pairwise_distances(metric, X, Y):
    """ Full distance matrix, shapes (n, d), (m, d) -> (n, m) """
    metric = MetricKind.parse(metric)
    X = as_points(X, tensor_args={'device': X.device, 'dtype': X.dtype} if torch.is_tensor(X) else None)
    Y = as_points(Y, tensor_args={'device': X.device, 'dtype': X.dtype})
    if X.shape[-1] != Y.shape[-1]:
        raise DimensionMismatchError(f'[pairwise_distances]: dimensions {X.shape[-1]} and {Y.shape[-1]} differ')
    diff = einops.rearrange(X, 'n d -> n 1 d') - einops.rearrange(Y, 'm d -> 1 m d')
    if metric is MetricKind.FLAT_TORUS:
        diff = torch.remainder(diff, 1.0)
        diff = torch.minimum(diff, 1.0 - diff)
    return _norm(diff)


def iter_distance_chunks(metric, X, Y):
    """ Yields (row offset, distance block) covering pairwise_distances(X, Y) row-wise. """
    n, m, d = X.shape[0], Y.shape[0], X.shape[-1]
    rows = max(1, MAX_CHUNK_ENTRIES // max(1, m * d))
    for start in range(0, n, rows):
        yield start, pairwise_distances(metric, X[start:start + rows], Y)


def nearest_distances(metric, X, Y, exclude_self=False):
    """
    For every row of X the distance to its nearest row of Y, computed in chunks.
    With exclude_self, X and Y are the same set and the diagonal is skipped.
    """
    out = torch.empty(X.shape[0], dtype=X.dtype, device=X.device)
    for start, block in iter_distance_chunks(metric, X, Y):
        if exclude_self:
            rows = torch.arange(block.shape[0], device=X.device)
            block[rows, rows + start] = torch.inf
        out[start:start + block.shape[0]] = block.min(dim=1).values
    return out


def dist(metric, x, y):
    metric = MetricKind.parse(metric)
    x = torch.as_tensor(x, dtype=torch.float64).reshape(-1)
    y = torch.as_tensor(y, dtype=torch.float64).reshape(-1)
    if x.shape != y.shape:
        raise DimensionMismatchError(f'[dist]: dimensions {x.shape[0]} and {y.shape[0]} differ')
    return float(paired_distances(metric, x.unsqueeze(0), y.unsqueeze(0))[0])


def hausdorff(R, B, metric=MetricKind.UNIT_CUBE):
    """
    Hausdorff distance max(sup_r dist(B, r), sup_b dist(R, b)).
    """
    metric = MetricKind.parse(metric)
    R = as_points(R, name='hausdorff')
    B = as_points(B, tensor_args={'device': R.device, 'dtype': R.dtype}, name='hausdorff')
    if R.shape[-1] != B.shape[-1]:
        raise DimensionMismatchError(f'[hausdorff]: dimensions {R.shape[-1]} and {B.shape[-1]} differ')
    red_to_blue = nearest_distances(metric, R, B).max()
    blue_to_red = nearest_distances(metric, B, R).max()
    return float(torch.maximum(red_to_blue, blue_to_red))


def nn_max(points, metric=MetricKind.UNIT_CUBE):
    """
    M = max_i min_{j != i} |X_i - X_j|
    """
    metric = MetricKind.parse(metric)
    P = as_points(points, name='nn_max')
    if P.shape[0] < 2:
        raise EmptyPointSetError(f'[nn_max]: at least 2 points are needed, got {P.shape[0]}')
    return float(nearest_distances(metric, P, P, exclude_self=True).max())
