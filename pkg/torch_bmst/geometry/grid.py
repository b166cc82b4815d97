import itertools

import torch

from torch_bmst.geometry.metrics import MetricKind


def cell_coordinates(points, cells_per_axis, lower_on_boundary=False):
    """
    Integer cell coordinates of points in [0,1]^d on a grid with cells_per_axis cells per axis.
    Cells are half-open [m/g, (m+1)/g); coordinate 1.0 is clamped into the last cell.
    With lower_on_boundary a point on an interior face m/g goes to cell m - 1 instead,
    and 0.0 stays in cell 0.
    """
    if lower_on_boundary:
        coords = torch.ceil(points * cells_per_axis).to(torch.long) - 1
    else:
        coords = torch.floor(points * cells_per_axis).to(torch.long)
    return coords.clamp(0, cells_per_axis - 1)


def ravel_cells(coords, cells_per_axis):
    d = coords.shape[-1]
    strides = torch.tensor([cells_per_axis ** (d - 1 - i) for i in range(d)], dtype=torch.long, device=coords.device)
    return (coords * strides).sum(-1)


class UniformGrid:
    """
    Points of [0,1]^d binned into a uniform grid with a dense, -1 padded cell table,
    so that all points of a block of cells can be gathered with one indexing op.
    """

    def __init__(self, points, cells_per_axis, metric=MetricKind.UNIT_CUBE, indices=None):
        self.points = points
        self.n_dim = points.shape[-1]
        self.g = int(cells_per_axis)
        self.cell_side = 1.0 / self.g
        self.metric = MetricKind.parse(metric)
        if indices is None:
            indices = torch.arange(points.shape[0], device=points.device)
        self.indices = indices
        self.num_cells = self.g ** self.n_dim

        device = points.device
        flat = ravel_cells(cell_coordinates(points, self.g), self.g)
        order = torch.argsort(flat, stable=True)
        counts = torch.bincount(flat, minlength=self.num_cells)
        starts = torch.cumsum(counts, 0) - counts
        self.max_occupancy = max(1, int(counts.max())) if points.shape[0] > 0 else 1

        sorted_cells = flat[order]
        slot = torch.arange(points.shape[0], device=device) - starts[sorted_cells]
        self.table = torch.full((self.num_cells, self.max_occupancy), -1, dtype=torch.long, device=device)
        self.table[sorted_cells, slot] = indices[order]
        self._offsets = {}

    @classmethod
    def for_density(cls, points, metric=MetricKind.UNIT_CUBE, points_per_cell=2.0, indices=None):
        n, d = points.shape
        g = max(1, int((max(n, 1) / points_per_cell) ** (1.0 / d)))
        return cls(points, g, metric=metric, indices=indices)

    def cell_of(self, x):
        return cell_coordinates(x, self.g)

    def covers_all(self, radius):
        return 2 * radius + 1 >= self.g

    def offsets(self, radius):
        if radius not in self._offsets:
            rng = range(-radius, radius + 1)
            self._offsets[radius] = torch.tensor(list(itertools.product(rng, repeat=self.n_dim)),
                                                 dtype=torch.long, device=self.points.device)
        return self._offsets[radius]

    def candidates(self, query_cells, radius):
        """
        Global indices of all points in the Chebyshev block of `radius` cells around each query cell,
        shape (A, K * max_occupancy), padded with -1. Requires not covers_all(radius) on the torus.
        """
        nb = query_cells.unsqueeze(1) + self.offsets(radius).unsqueeze(0)
        if self.metric is MetricKind.FLAT_TORUS:
            nb = torch.remainder(nb, self.g)
            valid = torch.ones(nb.shape[:-1], dtype=torch.bool, device=nb.device)
        else:
            valid = ((nb >= 0) & (nb < self.g)).all(-1)
            nb = nb.clamp(0, self.g - 1)
        idx = self.table[ravel_cells(nb, self.g)]
        idx = torch.where(valid.unsqueeze(-1), idx, torch.full_like(idx, -1))
        return idx.reshape(query_cells.shape[0], -1)

    def all_indices(self):
        return self.indices
