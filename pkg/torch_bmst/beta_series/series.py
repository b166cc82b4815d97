import csv
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List

import numpy as np
import torch
from scipy.special import gammaln, zeta

from torch_bmst.beta_series.configurations import theta_membership_batch, union_ball_volumes
from torch_bmst.errors import PreconditionError, UnsupportedRegimeError
from torch_bmst.geometry.metrics import unit_ball_volume
from torch_bmst.torch_utils.parallel import map_jobs
from torch_bmst.torch_utils.seed import derive_seed, make_generator
from torch_bmst.torch_utils.torch_timer import Timer
from torch_bmst.torch_utils.torch_utils import DEFAULT_TENSOR_ARGS, to_torch

logger = logging.getLogger(__name__)


# box-proposal terms below this acceptance rate are flagged unreliable
MIN_ACCEPTANCE = 1e-4
# proposal='auto' switches to spanning-tree proposals below this pilot acceptance
AUTO_TREE_ACCEPTANCE = 1e-2
DEFAULT_BATCH = 4096
PROPOSALS = ('box', 'tree', 'auto')
PILOT_STREAM = 0x9117


@dataclass
class SeriesTermEstimate:
    k_R: int
    k_B: int
    E: float
    std_error: float
    samples: int
    acceptance_rate: float
    # E with the full inner sample minus E with its first half
    inner_bias: float = 0.0
    unreliable: bool = False
    proposal: str = 'box'

    def __post_init__(self):
        assert self.E >= 0 and self.std_error >= 0
        assert 0.0 <= self.acceptance_rate <= 1.0


@dataclass
class BetaEstimate:
    d: int
    p: float
    alpha_r: float
    value: float
    std_error: float
    K_max: int
    tail_bound: float
    tail_extrapolation: float = math.nan
    method: str = 'series'
    terms: List[SeriesTermEstimate] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def _check_alpha(alpha_r):
    if not 0.0 < alpha_r < 1.0:
        raise PreconditionError(f'[beta_series]: alpha_R must lie in (0, 1), got {alpha_r}')


def _random_rotation(d, generator):
    q, r = torch.linalg.qr(torch.randn((d, d), generator=generator, dtype=torch.float64))
    return q * torch.sign(torch.diagonal(r))


def _log_tree_count(k_R, k_B):
    """ log of the number of spanning trees of K_{k_R,k_B} """
    return (k_B - 1) * math.log(k_R) + (k_R - 1) * math.log(k_B)


def random_bipartite_trees(k_R, k_B, root, generator):
    """
    Uniform spanning trees of K_{k_R,k_B} by Aldous-Broder walks, one per entry of root.
    Vertices 0..k_R-1 are red, k_R..k-1 blue.
    :return: (order, parent), both (n, k) long. order[:, t] is the t-th discovered vertex,
        order[:, 0] == root and parent[i, root[i]] == -1
    """
    n = root.shape[0]
    k = k_R + k_B
    rows = torch.arange(n)
    visited = torch.zeros((n, k), dtype=torch.bool)
    parent = torch.full((n, k), -1, dtype=torch.long)
    order = torch.zeros((n, k), dtype=torch.long)
    filled = torch.ones(n, dtype=torch.long)
    visited[rows, root] = True
    order[:, 0] = root
    current = root.clone()
    while not bool(visited.all()):
        u = torch.rand(n, generator=generator, dtype=torch.float64)
        to_blue = k_R + (u * k_B).long().clamp(max=k_B - 1)
        to_red = (u * k_R).long().clamp(max=k_R - 1)
        nxt = torch.where(current < k_R, to_blue, to_red)
        new = torch.nonzero(~visited[rows, nxt]).flatten()
        parent[new, nxt[new]] = current[new]
        visited[new, nxt[new]] = True
        order[new, filled[new]] = nxt[new]
        filled[new] += 1
        current = nxt
    return order, parent


def _unit_ball_steps(n, d, generator):
    direction = torch.randn((n, d), generator=generator, dtype=torch.float64)
    direction = direction / torch.linalg.norm(direction, dim=-1, keepdim=True)
    radius = torch.rand(n, generator=generator, dtype=torch.float64).pow(1.0 / d)
    return direction * radius[:, None]


def threshold_tree_counts(red, blue):
    """
    Number of spanning trees of the bipartite graph joining red and blue points closer than 1,
    by the matrix-tree theorem. red (n, k_R, d), blue (n, k_B, d).
    """
    adj_rb = (torch.cdist(red, blue) < 1.0).to(torch.float64)
    n, k_R, k_B = adj_rb.shape
    k = k_R + k_B
    adj = torch.zeros((n, k, k), dtype=torch.float64)
    adj[:, :k_R, k_R:] = adj_rb
    adj[:, k_R:, :k_R] = adj_rb.transpose(1, 2)
    laplacian = torch.diag_embed(adj.sum(-1)) - adj
    if k == 2:
        return laplacian[:, 1, 1].round()
    return torch.linalg.det(laplacian[:, 1:, 1:]).round()


def _propose_box(k_R, k_B, d, n, red_pinned, generator):
    """ free points uniform in [-k, k]^d; returns (points, log proposal weight per sample) """
    k = k_R + k_B
    pts = (2.0 * torch.rand((n, k, d), generator=generator, dtype=torch.float64) - 1.0) * k
    pts[red_pinned, 0] = 0.0
    pts[~red_pinned, k_R] = 0.0
    log_weight = torch.full((n,), d * (k - 1) * math.log(2.0 * k), dtype=torch.float64)
    return pts, log_weight


def _propose_tree(k_R, k_B, d, n, red_pinned, generator):
    """
    Grow a uniform spanning tree of K_{k_R,k_B} from the pinned point, each new point uniform in
    the unit ball of its tree parent. The proposal density of the free points is
    tau(G_x) / (N_T omega_d^{k-1}), tau(G_x) counting the spanning trees of the unit threshold graph.
    """
    k = k_R + k_B
    root = torch.where(red_pinned, torch.zeros(n, dtype=torch.long), torch.full((n,), k_R, dtype=torch.long))
    order, parent = random_bipartite_trees(k_R, k_B, root, generator)
    rows = torch.arange(n)
    pts = torch.zeros((n, k, d), dtype=torch.float64)
    for t in range(1, k):
        vertex = order[:, t]
        pts[rows, vertex] = pts[rows, parent[rows, vertex]] + _unit_ball_steps(n, d, generator)
    # floating point may drop a tree edge sitting at distance ~1
    tau = threshold_tree_counts(pts[:, :k_R], pts[:, k_R:]).clamp(min=1.0)
    log_weight = _log_tree_count(k_R, k_B) + (k - 1) * math.log(unit_ball_volume(d)) - torch.log(tau)
    return pts, log_weight


def _term_batch(k_R, k_B, alpha_r, d, n, inner_samples, generator, rotation, exponent, branch_weights,
                proposal='box'):
    """
    n proposals of one integral

        int_Theta (alpha_R |D(b)| + alpha_B |D(r)|)^{-exponent} (w_R delta_0(r_1) + w_B delta_0(b_1)) dr db

    Returns (values, half-inner values, accepted count).
    """
    alpha_b = 1.0 - alpha_r
    w_red, w_blue = branch_weights
    red_pinned = torch.rand(n, generator=generator, dtype=torch.float64) < w_red / (w_red + w_blue)
    propose = _propose_tree if proposal == 'tree' else _propose_box
    pts, log_weight = propose(k_R, k_B, d, n, red_pinned, generator)
    if rotation is not None:
        pts = pts @ rotation.T

    red, blue = pts[:, :k_R], pts[:, k_R:]
    accepted = theta_membership_batch(red, blue)
    values = torch.zeros(n, dtype=torch.float64)
    half_values = torch.zeros(n, dtype=torch.float64)
    n_acc = int(accepted.sum())
    if n_acc:
        scale = (w_red + w_blue) * torch.exp(log_weight[accepted])
        vol_blue, vol_blue_half = union_ball_volumes(blue[accepted], inner_samples, generator)
        vol_red, vol_red_half = union_ball_volumes(red[accepted], inner_samples, generator)
        values[accepted] = scale * (alpha_r * vol_blue + alpha_b * vol_red).pow(-exponent)
        half_values[accepted] = scale * (alpha_r * vol_blue_half + alpha_b * vol_red_half).pow(-exponent)
    return values, half_values, n_acc


def _resolve_rotation(rotation, d, seed):
    if isinstance(rotation, str):
        return _random_rotation(d, make_generator(derive_seed(seed, 0xA0A)))
    if rotation is not None:
        return to_torch(rotation, **DEFAULT_TENSOR_ARGS)
    return None


def _estimate_integral(k_R, k_B, alpha_r, d, exponent, branch_weights, samples, seed, inner_samples, rotation,
                       batch_size, proposal, name):
    if proposal not in PROPOSALS:
        raise PreconditionError(f'[{name}]: proposal must be one of {PROPOSALS}, got {proposal!r}')
    if samples < 2:
        raise PreconditionError(f'[{name}]: at least 2 samples are needed, got {samples}')
    rotation = _resolve_rotation(rotation, d, seed)
    batch = dict(k_R=k_R, k_B=k_B, alpha_r=alpha_r, d=d, inner_samples=inner_samples, rotation=rotation,
                 exponent=exponent, branch_weights=branch_weights)

    if proposal == 'auto':
        n_pilot = min(batch_size, samples)
        _, _, n_acc = _term_batch(n=n_pilot, generator=make_generator(derive_seed(seed, k_R, k_B, PILOT_STREAM)),
                                  proposal='box', **batch)
        proposal = 'tree' if n_acc / n_pilot < AUTO_TREE_ACCEPTANCE else 'box'
        logger.debug(f'{name}({k_R},{k_B}) d={d}: pilot acceptance {n_acc / n_pilot:.2e}, using {proposal} proposals')

    total = total_sq = total_half = 0.0
    accepted = 0
    done = 0
    with Timer(output=logger.debug, prefix=f'{name}({k_R},{k_B}) d={d}'):
        for batch_idx, start in enumerate(range(0, samples, batch_size)):
            n = min(batch_size, samples - start)
            gen = make_generator(derive_seed(seed, k_R, k_B, batch_idx))
            values, half_values, n_acc = _term_batch(n=n, generator=gen, proposal=proposal, **batch)
            total += float(values.sum())
            total_sq += float(values.pow(2).sum())
            total_half += float(half_values.sum())
            accepted += n_acc
            done += n

    mean = total / done
    var = max(0.0, (total_sq - done * mean ** 2) / (done - 1))
    acceptance = accepted / done
    estimate = SeriesTermEstimate(
        k_R=k_R, k_B=k_B, E=mean, std_error=math.sqrt(var / done), samples=done,
        acceptance_rate=acceptance, inner_bias=mean - total_half / done,
        unreliable=proposal == 'box' and acceptance < MIN_ACCEPTANCE, proposal=proposal,
    )
    if estimate.unreliable:
        logger.warning(f'term ({k_R},{k_B}) d={d}: acceptance {acceptance:.2e} below {MIN_ACCEPTANCE:.0e}')
    return estimate


def estimate_E(k_R, k_B, alpha_r, d, samples=10 ** 5, seed=0, inner_samples=10 ** 4, rotation=None,
               batch_size=DEFAULT_BATCH, proposal='box'):
    """
    Monte Carlo estimate of the series term

        E(k_R, k_B, alpha_R) = int_Theta (alpha_R |D(b)| + alpha_B |D(r)|)^{-k/d}
                               (k_R/alpha_R delta_0(r_1) + k_B/alpha_B delta_0(b_1)) dr db

    With proposal='box' free points are proposed uniformly in [-k, k]^d, which covers every
    configuration of Theta with a point at the origin. proposal='tree' grows the points along a
    random spanning tree of unit-ball steps and is accepted with probability 1. proposal='auto'
    runs a box pilot batch and switches to trees below AUTO_TREE_ACCEPTANCE.
    The pinned branch is sampled proportionally to its prefactor.

    :param rotation: optional (d, d) orthogonal matrix applied to every proposal,
        or 'random' for a rotation drawn from the seed
    """
    if k_R < 1 or k_B < 1:
        raise PreconditionError(f'[estimate_E]: k_R and k_B must be >= 1, got ({k_R}, {k_B})')
    _check_alpha(alpha_r)
    return _estimate_integral(k_R, k_B, alpha_r, d, exponent=(k_R + k_B) / d,
                              branch_weights=(k_R / alpha_r, k_B / (1.0 - alpha_r)), samples=samples, seed=seed,
                              inner_samples=inner_samples, rotation=rotation, batch_size=batch_size,
                              proposal=proposal, name='E')


def singleton_term(k_R, k_B, alpha_r, d, p):
    """
    Cluster integral of a lone point: the opposite color sees only its own unit ball,
    J(1, 0) = (alpha_B omega_d)^{-p/d} and J(0, 1) = (alpha_R omega_d)^{-p/d}.
    """
    other = 1.0 - alpha_r if k_R == 1 else alpha_r
    return (other * unit_ball_volume(d)) ** (-p / d)


def estimate_cluster_term(k_R, k_B, alpha_r, d, p, samples=10 ** 5, seed=0, inner_samples=10 ** 4, rotation=None,
                          batch_size=DEFAULT_BATCH, proposal='auto'):
    """
    Cluster integral entering the series for beta

        J(k_R, k_B) = int_Theta (alpha_R |D(b)| + alpha_B |D(r)|)^{-(k - 1 + p/d)}
                      (k_R delta_0(r_1) + k_B delta_0(b_1)) dr db

    Singletons (1, 0) and (0, 1) are exact.
    """
    _check_alpha(alpha_r)
    if (k_R, k_B) in ((1, 0), (0, 1)):
        return SeriesTermEstimate(k_R=k_R, k_B=k_B, E=singleton_term(k_R, k_B, alpha_r, d, p), std_error=0.0,
                                  samples=0, acceptance_rate=1.0, proposal='exact')
    if k_R < 1 or k_B < 1:
        raise PreconditionError(f'[estimate_cluster_term]: clusters need both colors, got ({k_R}, {k_B})')
    k = k_R + k_B
    return _estimate_integral(k_R, k_B, alpha_r, d, exponent=k - 1 + p / d, branch_weights=(k_R, k_B),
                              samples=samples, seed=seed, inner_samples=inner_samples, rotation=rotation,
                              batch_size=batch_size, proposal=proposal, name='J')


def term_coefficient(k_R, k_B, alpha_r, d, p):
    """ (p/d) alpha_R^{k_R}/k_R! alpha_B^{k_B}/k_B! Gamma(k - 1 + p/d)/k """
    k = k_R + k_B
    log_c = (k_R * math.log(alpha_r) - gammaln(k_R + 1) + k_B * math.log(1.0 - alpha_r) - gammaln(k_B + 1)
             + gammaln(k - 1 + p / d) - math.log(k))
    return (p / d) * math.exp(log_c)


def term_domination(k_R, k_B, d, p):
    """
    Upper bound on J(k_R, k_B) for k_R, k_B >= 1: Theta is covered by placing the points one tree
    edge at a time inside unit balls, K_{k_R,k_B} has N_T = k_R^{k_B-1} k_B^{k_R-1} spanning trees
    and both union volumes are at least omega_d, so J <= k N_T omega_d^{-p/d}.
    """
    k = k_R + k_B
    return k * math.exp(_log_tree_count(k_R, k_B) - (p / d) * math.log(unit_ball_volume(d)))


def _pairs(K_max):
    return [(1, 0), (0, 1)] + [(k_R, k - k_R) for k in range(2, K_max + 1) for k_R in range(1, k)]


def _check_regime(d, p, K_max):
    if p <= 0:
        raise PreconditionError(f'[estimate_beta]: p must be positive, got {p}')
    if p >= d:
        raise UnsupportedRegimeError(f'[estimate_beta]: the series is only valid for p < d, got p={p}, d={d}')
    if K_max < 2:
        raise PreconditionError(f'[estimate_beta]: K_max must be >= 2, got {K_max}')


def _estimate_term_job(job):
    return estimate_cluster_term(**job)


def term_table(d, p, alpha_r, K_max=8, samples_per_term=10 ** 5, seed=0, inner_samples=10 ** 4, workers=1,
               proposal='auto'):
    """
    The singletons and all clusters with k_R + k_B <= K_max, each with its own seed substream.
    :return: list of (SeriesTermEstimate, coefficient); the E field holds the cluster integral J
    """
    _check_regime(d, p, K_max)
    _check_alpha(alpha_r)
    jobs = [dict(k_R=k_R, k_B=k_B, alpha_r=alpha_r, d=d, p=p, samples=samples_per_term,
                 seed=derive_seed(seed, k_R, k_B), inner_samples=inner_samples, proposal=proposal)
            for k_R, k_B in _pairs(K_max)]
    terms = map_jobs(_estimate_term_job, jobs, workers=workers)
    return [(term, term_coefficient(term.k_R, term.k_B, alpha_r, d, p)) for term in terms]


def _shell_sums(table, K_max):
    sums = np.zeros(K_max + 1)
    for term, coeff in table:
        sums[term.k_R + term.k_B] += coeff * term.E
    return sums


def tail_extrapolation(shell_sums):
    """
    Power-law continuation sum_{j > K} S_K (j/K)^{-s} = S_K K^s zeta(s, K + 1), the exponent s
    fitted through the last two shells. nan without two shells of size >= 2 or with a
    non-positive shell, inf when the fitted decay is not summable.
    """
    K = len(shell_sums) - 1
    if K < 3 or shell_sums[K - 1] <= 0 or shell_sums[K] <= 0:
        return math.nan
    s = math.log(shell_sums[K - 1] / shell_sums[K]) / math.log(K / (K - 1))
    if s <= 1.0:
        return math.inf
    return float(shell_sums[K] * K ** s * zeta(s, K + 1))


def estimate_beta(d, p, alpha_r, K_max=8, samples_per_term=10 ** 5, seed=0, inner_samples=10 ** 4, workers=1,
                  proposal='auto'):
    """
    beta_bMST(d, p) = sum_{k >= 1} sum_{k_R + k_B = k} (p/d)(1/k)(alpha_R^{k_R}/k_R!)(alpha_B^{k_B}/k_B!)
                      Gamma(k - 1 + p/d) J(k_R, k_B)
    truncated at k_R + k_B <= K_max. The singletons add up to n E[nearest opposite-color distance^p].
    Standard errors add in quadrature.
    """
    table = term_table(d, p, alpha_r, K_max=K_max, samples_per_term=samples_per_term, seed=seed,
                       inner_samples=inner_samples, workers=workers, proposal=proposal)
    value = sum(coeff * term.E for term, coeff in table)
    std_error = math.sqrt(sum((coeff * term.std_error) ** 2 for term, coeff in table))
    K = K_max + 1
    tail_bound = sum(term_coefficient(k_R, K - k_R, alpha_r, d, p) * term_domination(k_R, K - k_R, d, p)
                     for k_R in range(1, K))
    extrapolation = tail_extrapolation(_shell_sums(table, K_max))
    estimate = BetaEstimate(
        d=d, p=p, alpha_r=alpha_r, value=value, std_error=std_error, K_max=K_max, tail_bound=tail_bound,
        tail_extrapolation=extrapolation, terms=[term for term, _ in table],
        details={'completed': value + extrapolation if math.isfinite(extrapolation) else math.nan,
                 'proposals': {f'{t.k_R},{t.k_B}': t.proposal for t, _ in table}},
    )
    logger.info(f'beta(d={d}, p={p}, alpha={alpha_r}) = {value:.6g} +- {std_error:.2g} (K_max={K_max})')
    return estimate


TERM_TABLE_FIELDS = ('k_R', 'k_B', 'E', 'stderr', 'acceptance', 'samples')


def term_rows(terms):
    return [{'k_R': t.k_R, 'k_B': t.k_B, 'E': t.E, 'stderr': t.std_error,
             'acceptance': t.acceptance_rate, 'samples': t.samples} for t in terms]


def write_term_table(terms, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=TERM_TABLE_FIELDS)
        writer.writeheader()
        for row in term_rows(terms):
            writer.writerow({key: repr(value) if isinstance(value, float) else value for key, value in row.items()})
    return path
