import time

import pytest
import torch
from hypothesis import given, strategies as st

from torch_bmst.torch_utils.parallel import map_jobs
from torch_bmst.torch_utils.seed import MASK64, derive_seed, make_generator, splitmix64
from torch_bmst.torch_utils.torch_timer import Timer
from torch_bmst.torch_utils.torch_utils import batch_reachability, to_numpy, to_torch, to_torch_2d_min


def test_splitmix64_reference_value():
    # first output of splitmix64 seeded with 0
    assert splitmix64(0) == 0xE220A8397B1DCDAF


@given(st.integers(min_value=0, max_value=MASK64), st.integers(min_value=0, max_value=1000))
def test_derive_seed_is_64_bit_and_deterministic(master, index):
    s = derive_seed(master, index)
    assert 0 <= s <= MASK64
    assert s == derive_seed(master, index)


def test_derive_seed_separates_streams():
    seeds = {derive_seed(7, n, t) for n in (10, 20) for t in range(50)}
    assert len(seeds) == 100


def test_make_generator_reproducible():
    a = torch.rand(5, generator=make_generator(derive_seed(3, 1)), dtype=torch.float64)
    b = torch.rand(5, generator=make_generator(derive_seed(3, 1)), dtype=torch.float64)
    assert torch.equal(a, b)


def test_to_torch_2d_min_promotes_vectors():
    x = to_torch_2d_min([0.1, 0.2, 0.3])
    assert x.shape == (1, 3)
    assert x.dtype == torch.float64


def test_numpy_torch_conversion():
    x = to_torch([[1, 2], [3, 4]])
    assert to_numpy(x).tolist() == [[1.0, 2.0], [3.0, 4.0]]


def test_batch_reachability_path_and_split():
    adj = torch.zeros((2, 4, 4), dtype=torch.bool)
    for a, b in ((0, 1), (1, 2), (2, 3)):
        adj[0, a, b] = adj[0, b, a] = True
    adj[1, 0, 1] = adj[1, 1, 0] = True
    reach = batch_reachability(adj)
    assert bool(reach[0].all())
    assert bool(reach[1, 0, 1]) and not bool(reach[1, 0, 2])


def test_timer_measures_elapsed():
    messages = []
    with Timer(output=messages.append, prefix='block') as t:
        time.sleep(0.01)
    assert t.elapsed >= 0.01
    assert messages and messages[0].startswith('block took')


def _square(x):
    return x * x


def test_map_jobs_inline_keeps_order():
    assert map_jobs(_square, [3, 1, 2], workers=1) == [9, 1, 4]
