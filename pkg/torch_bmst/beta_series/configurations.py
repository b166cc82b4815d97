import math
from dataclasses import dataclass

import einops
import torch

from torch_bmst.errors import DimensionMismatchError, EmptyPointSetError, PreconditionError
from torch_bmst.geometry.metrics import unit_ball_volume
from torch_bmst.torch_utils.seed import make_generator
from torch_bmst.torch_utils.torch_utils import DEFAULT_TENSOR_ARGS, batch_reachability, to_torch_2d_min


# floats materialized per chunk of inner hit-or-miss samples
MAX_INNER_ENTRIES = 2 ** 24


@dataclass
class Configuration:
    """
    k_R red and k_B blue points of R^d, one of r_1 / b_1 pinned at the origin.
    """
    red: torch.Tensor
    blue: torch.Tensor
    pinned: str = 'red'

    def __post_init__(self):
        self.red = to_torch_2d_min(self.red)
        self.blue = to_torch_2d_min(self.blue)
        if self.red.shape[0] < 1 or self.blue.shape[0] < 1:
            raise PreconditionError('[Configuration]: both colors need at least one point')
        if self.red.shape[-1] != self.blue.shape[-1]:
            raise DimensionMismatchError(f'[Configuration]: dimensions {self.red.shape[-1]} and {self.blue.shape[-1]} differ')
        if self.pinned not in ('red', 'blue'):
            raise PreconditionError(f'[Configuration]: pinned must be red or blue, got {self.pinned!r}')
        anchor = self.red[0] if self.pinned == 'red' else self.blue[0]
        assert torch.all(anchor == 0), 'pinned point must sit at the origin'

    @property
    def k_red(self):
        return self.red.shape[0]

    @property
    def k_blue(self):
        return self.blue.shape[0]

    @property
    def dim(self):
        return self.red.shape[-1]


def theta_membership_batch(red, blue):
    """
    Connectivity of the unit-threshold bipartite graph {|r_i - b_j| < 1}.
    :param red: (B, k_R, d)
    :param blue: (B, k_B, d)
    :return: bool tensor (B,)
    """
    B, k_red, _ = red.shape
    k = k_red + blue.shape[1]
    close = torch.cdist(red, blue) < 1.0
    adjacency = torch.zeros((B, k, k), dtype=torch.bool, device=red.device)
    adjacency[:, :k_red, k_red:] = close
    adjacency[:, k_red:, :k_red] = close.transpose(1, 2)
    return batch_reachability(adjacency)[:, 0, :].all(dim=-1)


def theta_membership(config):
    return bool(theta_membership_batch(config.red.unsqueeze(0), config.blue.unsqueeze(0))[0])


def interval_union_lengths(points):
    """
    Exact length of the union of [x - 1, x + 1] over each row of a (B, m) batch.
    """
    xs = torch.sort(points, dim=-1).values
    gaps = xs[:, 1:] - xs[:, :-1]
    return 2.0 + gaps.clamp(max=2.0).sum(dim=-1)


def union_ball_volumes(points, inner_samples, generator):
    """
    Volume of the union of unit balls for each configuration of a batch.
    d = 1 is exact; a single ball is omega_d; otherwise hit-or-miss in the bounding box.
    :param points: (B, m, d)
    :return: (volumes, half-sample volumes), both (B,)
    """
    B, m, d = points.shape
    if m == 0:
        raise EmptyPointSetError('[union_ball_volumes]: empty point list')
    if d == 1:
        vol = interval_union_lengths(points[..., 0])
        return vol, vol
    if m == 1:
        vol = torch.full((B,), unit_ball_volume(d), dtype=points.dtype, device=points.device)
        return vol, vol
    low = points.min(dim=1).values - 1.0
    high = points.max(dim=1).values + 1.0
    box = (high - low).prod(dim=-1)
    half = max(1, inner_samples // 2)
    vol = torch.empty(B, dtype=points.dtype, device=points.device)
    vol_half = torch.empty_like(vol)
    rows = max(1, MAX_INNER_ENTRIES // (inner_samples * (m + d)))
    for start in range(0, B, rows):
        sl = slice(start, start + rows)
        u = torch.rand((points[sl].shape[0], inner_samples, d), generator=generator, dtype=points.dtype)
        u = u.to(points.device)
        samples = einops.rearrange(low[sl], 'b d -> b 1 d') + u * einops.rearrange(high[sl] - low[sl], 'b d -> b 1 d')
        hits = (torch.cdist(samples, points[sl]).min(dim=-1).values < 1.0).to(points.dtype)
        vol[sl] = box[sl] * hits.mean(dim=-1)
        vol_half[sl] = box[sl] * hits[:, :half].mean(dim=-1)
    return vol, vol_half


def union_ball_volume(points, d=None, mc_samples=10 ** 5, seed=0):
    """
    |D(A)|, the Lebesgue measure of the set of points within distance 1 of A.
    :return: (volume, std_error); std_error is 0 whenever the volume is exact
    """
    A = to_torch_2d_min(points, tensor_args=DEFAULT_TENSOR_ARGS)
    if A.numel() == 0:
        raise EmptyPointSetError('[union_ball_volume]: empty point list')
    if d is not None and A.shape[-1] != d:
        raise DimensionMismatchError(f'[union_ball_volume]: points have dimension {A.shape[-1]}, expected {d}')
    d = A.shape[-1]
    if d == 1:
        return float(interval_union_lengths(A[:, 0].unsqueeze(0))[0]), 0.0
    if A.shape[0] == 1:
        return unit_ball_volume(d), 0.0
    vol, _ = union_ball_volumes(A.unsqueeze(0), mc_samples, make_generator(seed))
    box = float((A.max(dim=0).values - A.min(dim=0).values + 2.0).prod())
    frac = float(vol[0]) / box
    return float(vol[0]), box * math.sqrt(frac * (1.0 - frac) / mc_samples)
