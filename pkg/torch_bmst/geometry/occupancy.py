import torch

from torch_bmst.errors import PreconditionError, ResourceLimitError
from torch_bmst.geometry.grid import cell_coordinates, ravel_cells
from torch_bmst.geometry.metrics import as_points


# memory budget for the dense count array of a dyadic scan
MAX_SCAN_CELLS = 2 ** 26


class OccupancyScan:
    """
    Point counts of the 2^{kd} dyadic cells prod_l [m_l 2^{-k}, (m_l + 1) 2^{-k}).
    A point on a face shared by two cells is counted in the lower-index one.
    """

    def __init__(self, level, counts, n_points):
        self.level = level
        self.counts = counts
        self.n_points = n_points
        self.n_dim = counts.ndim
        self.max_count = int(counts.max())
        self.min_count = int(counts.min())

    @property
    def cell_volume(self):
        return 2.0 ** (-self.level * self.n_dim)

    def __repr__(self):
        return f'OccupancyScan(level={self.level}, d={self.n_dim}, max={self.max_count}, min={self.min_count})'


def occupancy_scan(points, level, max_cells=MAX_SCAN_CELLS):
    if level < 0:
        raise PreconditionError(f'[occupancy_scan]: level must be >= 0, got {level}')
    P = as_points(points, name='occupancy_scan')
    d = P.shape[-1]
    g = 2 ** level
    if g ** d > max_cells:
        raise ResourceLimitError(f'[occupancy_scan]: level {level} in d={d} needs {g ** d} cells, budget is {max_cells}')
    flat = ravel_cells(cell_coordinates(P, g, lower_on_boundary=True), g)
    counts = torch.bincount(flat, minlength=g ** d).reshape((g,) * d)
    return OccupancyScan(level, counts, P.shape[0])


def occupancy_profile(points, levels, max_cells=MAX_SCAN_CELLS):
    return [occupancy_scan(points, k, max_cells=max_cells) for k in levels]
