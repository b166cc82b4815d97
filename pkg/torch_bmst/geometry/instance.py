import csv
import json
from pathlib import Path

import numpy as np
import torch

from torch_bmst.errors import DimensionMismatchError, InvalidInstanceError
from torch_bmst.geometry.metrics import MetricKind
from torch_bmst.torch_utils.seed import make_generator
from torch_bmst.torch_utils.torch_utils import DEFAULT_TENSOR_ARGS, to_numpy, to_torch


class BipartiteInstance:
    """
    Red and blue point clouds in [0,1]^d with a metric tag.
    Vertices are indexed red first: red i -> i, blue j -> n_red + j.
    """

    def __init__(self, red, blue, metric=MetricKind.UNIT_CUBE, seed=None, tensor_args=None):
        if tensor_args is None:
            tensor_args = DEFAULT_TENSOR_ARGS
        self.tensor_args = tensor_args

        red = to_torch(red, **tensor_args)
        blue = to_torch(blue, **tensor_args)
        if red.ndim != 2 or blue.ndim != 2:
            raise DimensionMismatchError(f'[BipartiteInstance]: expected (n, d) arrays, got {tuple(red.shape)} and {tuple(blue.shape)}')
        if red.shape[0] < 1 or blue.shape[0] < 1:
            raise InvalidInstanceError(f'[BipartiteInstance]: both colors must be nonempty, got n_R={red.shape[0]}, n_B={blue.shape[0]}')
        if red.shape[1] != blue.shape[1] or red.shape[1] < 1:
            raise DimensionMismatchError(f'[BipartiteInstance]: red dim {red.shape[1]} and blue dim {blue.shape[1]}')
        for name, pts in (('red', red), ('blue', blue)):
            if not bool(((pts >= 0) & (pts <= 1)).all()):
                raise InvalidInstanceError(f'[BipartiteInstance]: {name} coordinates must lie in [0, 1]')

        self._red = red
        self._blue = blue
        self.metric = MetricKind.parse(metric)
        self.seed = seed

    @property
    def red(self):
        return self._red

    @property
    def blue(self):
        return self._blue

    @property
    def n_red(self):
        return self._red.shape[0]

    @property
    def n_blue(self):
        return self._blue.shape[0]

    @property
    def n(self):
        return self.n_red + self.n_blue

    @property
    def dim(self):
        return self._red.shape[1]

    @property
    def points(self):
        return torch.cat([self._red, self._blue], dim=0)

    @property
    def is_red(self):
        return np.arange(self.n) < self.n_red

    def with_metric(self, metric):
        return BipartiteInstance(self._red, self._blue, metric=metric, seed=self.seed, tensor_args=self.tensor_args)

    def describe(self):
        return {'n_R': self.n_red, 'n_B': self.n_blue, 'd': self.dim, 'metric': self.metric.value, 'seed': self.seed}

    def __repr__(self):
        return f'BipartiteInstance(n_R={self.n_red}, n_B={self.n_blue}, d={self.dim}, metric={self.metric.value}, seed={self.seed})'


def sample_uniform(n_red, n_blue, d, metric=MetricKind.UNIT_CUBE, seed=0, tensor_args=None):
    """
    n_red red and n_blue blue points i.i.d. uniform on [0,1]^d, red drawn first from
    a generator seeded with `seed`.
    """
    if n_red < 1 or n_blue < 1:
        raise InvalidInstanceError(f'[sample_uniform]: both colors must be nonempty, got n_R={n_red}, n_B={n_blue}')
    if d < 1:
        raise InvalidInstanceError(f'[sample_uniform]: dimension must be >= 1, got {d}')
    if tensor_args is None:
        tensor_args = DEFAULT_TENSOR_ARGS
    gen = make_generator(seed)
    red = torch.rand((n_red, d), generator=gen, dtype=torch.float64)
    blue = torch.rand((n_blue, d), generator=gen, dtype=torch.float64)
    return BipartiteInstance(red, blue, metric=metric, seed=seed, tensor_args=tensor_args)


def boundary_shell(instance, delta):
    """
    Indices (into red, into blue) of points outside [delta, 1 - delta]^d.
    """
    def outside(pts):
        mask = ((pts < delta) | (pts > 1.0 - delta)).any(dim=-1)
        return torch.nonzero(mask).flatten()
    return outside(instance.red), outside(instance.blue)


def save_instance(instance, path):
    """
    CSV with header color,x0,...,x{d-1} plus a JSON sidecar with the same stem.
    Coordinates are written with repr, which round-trips doubles exactly.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = ['color'] + [f'x{i}' for i in range(instance.dim)]
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for color, pts in (('R', instance.red), ('B', instance.blue)):
            for row in to_numpy(pts).tolist():
                writer.writerow([color] + [repr(float(x)) for x in row])
    sidecar = path.with_suffix('.json')
    with open(sidecar, 'w') as f:
        json.dump(instance.describe(), f, indent=2, sort_keys=True)
        f.write('\n')
    return path, sidecar


def load_instance(path, tensor_args=None):
    path = Path(path)
    with open(path.with_suffix('.json'), 'r') as f:
        meta = json.load(f)
    red, blue = [], []
    with open(path, 'r', newline='') as f:
        reader = csv.reader(f)
        header = next(reader)
        d = len(header) - 1
        if d != meta['d']:
            raise DimensionMismatchError(f'[load_instance]: header has {d} coordinates, sidecar says d={meta["d"]}')
        for row in reader:
            coords = [float(x) for x in row[1:]]
            if row[0] == 'R':
                red.append(coords)
            elif row[0] == 'B':
                blue.append(coords)
            else:
                raise InvalidInstanceError(f'[load_instance]: unknown color {row[0]!r}')
    red = np.asarray(red, dtype=np.float64).reshape(-1, d)
    blue = np.asarray(blue, dtype=np.float64).reshape(-1, d)
    return BipartiteInstance(red, blue, metric=meta['metric'], seed=meta.get('seed'), tensor_args=tensor_args)
