import logging
import math

import numpy as np
import torch
from scipy.special import xlogy

from torch_bmst.errors import PreconditionError
from torch_bmst.experiments.plan import TailCheck
from torch_bmst.geometry.occupancy import occupancy_scan
from torch_bmst.torch_utils.seed import derive_seed, make_generator

logger = logging.getLogger(__name__)


TAIL_KEY = 0x7A11
# trials sampled together in one tensor
TRIAL_BATCH = 64


def chernoff_rate(t):
    """ F(t) = t log t - t + 1, with F(0) = 1 and F(1) = 0 """
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise PreconditionError('[chernoff_rate]: t must be nonnegative')
    out = xlogy(t, t) - t + 1.0
    return float(out) if out.ndim == 0 else out


def chernoff_bound(n, volume, t):
    """ exp(-n |A| F(t)): upper tail bound for t > 1, lower tail bound for t < 1 """
    return math.exp(-n * volume * chernoff_rate(t))


def _check_t(t):
    if t < 0 or t == 1:
        raise PreconditionError(f'[tail check]: t must be nonnegative and different from 1, got {t}')


def _finish(check, z=3.0):
    check.passed = check.frequency <= check.bound + z * check.stderr
    check.vacuous = check.bound >= 1.0
    if not check.passed:
        logger.warning(f'tail check violated: t={check.t} frequency={check.frequency:.4g} bound={check.bound:.4g}')
    return check


def _sample_batches(n, d, trials, seed):
    for b, start in enumerate(range(0, trials, TRIAL_BATCH)):
        gen = make_generator(derive_seed(seed, TAIL_KEY, n, b))
        yield torch.rand((min(TRIAL_BATCH, trials - start), n, d), generator=gen, dtype=torch.float64)


def occupancy_tail_check(n, level, ts, trials, seed=0, d=1):
    """
    Exceedance frequency of the count N(A) of the dyadic cell A = [0, 2^-level)^d,
    P(N(A) > t n|A|) for t > 1 and P(N(A) < t n|A|) for t < 1, against exp(-n|A|F(t)).
    """
    for t in ts:
        _check_t(t)
    if level < 0:
        raise PreconditionError(f'[occupancy_tail_check]: level must be >= 0, got {level}')
    volume = 2.0 ** (-level * d)
    side = 2.0 ** (-level)
    counts = torch.cat([(batch < side).all(dim=-1).sum(dim=-1) for batch in _sample_batches(n, d, trials, seed)])
    counts = counts.to(torch.float64)
    checks = []
    for t in ts:
        threshold = t * n * volume
        exceed = counts > threshold if t > 1 else counts < threshold
        checks.append(_finish(TailCheck(
            volume=volume, t=t, side='upper' if t > 1 else 'lower', frequency=float(exceed.to(torch.float64).mean()),
            bound=chernoff_bound(n, volume, t), trials=trials, level=level,
        )))
    return checks


def uniform_cube_levels(volume, d):
    """
    Dyadic levels for the cubes of a given volume v, with L = log2(1/v)/d:
    k_up = ceil(L) - 2, whose cells contain every cube of volume v, and
    k_lo = ceil(L) + 1, whose cells fit inside every cube of volume at least v.
    """
    L = -math.log2(volume) / d
    top = math.ceil(L - 1e-12)
    return top - 2, top + 1


def uniform_cube_bound(n, d, volume, t):
    """
    Union bounds over the bracketing dyadic cells:
    P(N*(v) > t n v) <= 1/(2^d v) exp(-n v 2^d F(t 2^{-2d})) for t > 2^{2d},
    P(N_*(v) < t n v) <= 2^{2d}/v exp(-n v 2^{-2d} F(t 2^{2d})) for t < 2^{-2d}.
    Any other t gets the trivial bound 1.
    """
    if t > 1:
        if t <= 2.0 ** (2 * d):
            return 1.0
        return min(1.0, math.exp(-n * volume * 2.0 ** d * chernoff_rate(t * 2.0 ** (-2 * d))) / (2.0 ** d * volume))
    if t >= 2.0 ** (-2 * d):
        return 1.0
    return min(1.0, 2.0 ** (2 * d) / volume * math.exp(-n * volume * 2.0 ** (-2 * d) * chernoff_rate(t * 2.0 ** (2 * d))))


def uniform_cube_tail_check(n, d, volume, t, trials, seed=0):
    """
    Frequency of the dyadic events that dominate the uniform-over-cubes counts: for t > 1 some cell
    of level k_up holding more than t n v points, for t < 1 some cell of level k_lo holding fewer,
    against uniform_cube_bound.
    """
    _check_t(t)
    if not 0.0 < volume <= 1.0:
        raise PreconditionError(f'[uniform_cube_tail_check]: volume must lie in (0, 1], got {volume}')
    k_up, k_lo = uniform_cube_levels(volume, d)
    upper = t > 1
    if upper and k_up < 0:
        raise PreconditionError(f'[uniform_cube_tail_check]: upper tails need v < 2^-d, got {volume} in d={d}')
    level = k_up if upper else k_lo
    hits = 0
    for batch in _sample_batches(n, d, trials, seed):
        for points in batch:
            scan = occupancy_scan(points, level)
            if upper:
                hits += int(scan.max_count > t * n * volume)
            else:
                hits += int(scan.min_count < t * n * volume)
    check = TailCheck(volume=volume, t=t, side='upper' if upper else 'lower', frequency=hits / trials,
                      bound=uniform_cube_bound(n, d, volume, t), trials=trials, level=level,
                      details={'cells': 2 ** (level * d), 'cell_volume': 2.0 ** (-level * d)})
    return _finish(check)
