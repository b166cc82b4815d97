from torch_bmst.geometry.metrics import (
    MetricKind, dist, hausdorff, nn_max, pairwise_distances, paired_distances, unit_ball_volume,
)
from torch_bmst.geometry.instance import (
    BipartiteInstance, boundary_shell, load_instance, sample_uniform, save_instance,
)
from torch_bmst.geometry.occupancy import OccupancyScan, occupancy_profile, occupancy_scan
from torch_bmst.geometry.grid import UniformGrid
