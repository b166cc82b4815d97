import math

import numpy as np
import pytest
import torch
from scipy.integrate import quad
from scipy.special import zeta

from torch_bmst.beta_series import (
    Configuration, estimate_E, estimate_beta, estimate_cluster_term, random_bipartite_trees, tail_extrapolation,
    term_coefficient, term_domination, term_table, theta_membership, threshold_tree_counts, union_ball_volume,
    write_term_table,
)
from torch_bmst.errors import EmptyPointSetError, PreconditionError, UnsupportedRegimeError


def closed_form_11_d1(alpha):
    return 0.5 * (1.0 / alpha + 1.0 / (1.0 - alpha))


def oracle_12_d1(alpha):
    integral = 2.0 * quad(lambda s: (2.0 - s) * (alpha * s + 2.0) ** -3, 0.0, 2.0)[0]
    return (1.0 / alpha + 2.0 / (1.0 - alpha)) * integral


def cluster_11_d1(p):
    # 2 branches * |(-1, 1)| * 2^{-(1 + p)}
    return 2.0 ** (1.0 - p)


def oracle_cluster_12_d1(alpha, p):
    integral = 2.0 * quad(lambda s: (2.0 - s) * (alpha * s + 2.0) ** -(2.0 + p), 0.0, 2.0)[0]
    return 3.0 * integral


def within(estimate, exact, z=4.0):
    return abs(estimate.E - exact) <= z * estimate.std_error


def test_theta_membership_examples():
    assert theta_membership(Configuration([[0.0]], [[0.5]]))
    assert not theta_membership(Configuration([[0.0]], [[1.2]]))
    assert theta_membership(Configuration([[0.0], [1.6]], [[0.8]]))


def test_theta_membership_is_monotone():
    config = Configuration([[0.0, 0.0]], [[0.6, 0.0], [0.0, 0.7]])
    assert theta_membership(config)
    grown = Configuration([[0.0, 0.0], [0.9, 0.5]], [[0.6, 0.0], [0.0, 0.7]])
    assert theta_membership(grown)


def test_configuration_requires_pinned_origin():
    with pytest.raises(AssertionError):
        Configuration([[0.1]], [[0.5]])
    Configuration([[0.7]], [[0.0]], pinned='blue')


def test_union_ball_volume_exact_cases():
    assert union_ball_volume([[0.0]], 1) == (2.0, 0.0)
    assert union_ball_volume([[0.0], [1.5]], 1)[0] == pytest.approx(3.5)
    assert union_ball_volume([[0.0], [5.0]], 1)[0] == pytest.approx(4.0)
    vol, err = union_ball_volume([[0.0, 0.0]], 2)
    assert vol == pytest.approx(math.pi) and err == 0.0
    with pytest.raises(EmptyPointSetError):
        union_ball_volume(np.zeros((0, 2)))


def test_union_ball_volume_two_discs():
    c = 0.5
    lens = 2.0 * math.acos(c / 2.0) - (c / 2.0) * math.sqrt(4.0 - c * c)
    vol, err = union_ball_volume([[0.0, 0.0], [c, 0.0]], 2, mc_samples=10 ** 5, seed=1)
    assert abs(vol - (2.0 * math.pi - lens)) <= 4.0 * err
    assert vol >= math.pi - 4.0 * err


@pytest.mark.parametrize('alpha', [0.3, 0.5, 0.7])
def test_estimate_E_closed_form_1d(alpha):
    est = estimate_E(1, 1, alpha, 1, samples=20000, seed=3)
    assert within(est, closed_form_11_d1(alpha))
    assert est.acceptance_rate == pytest.approx(0.5, abs=0.02)
    assert est.inner_bias == 0.0 and not est.unreliable


def test_estimate_E_closed_form_2d():
    est = estimate_E(1, 1, 0.5, 2, samples=20000, seed=4)
    assert within(est, 4.0)
    assert est.acceptance_rate == pytest.approx(math.pi / 16.0, abs=0.02)


def test_estimate_E_one_two_against_quadrature():
    est = estimate_E(1, 2, 0.5, 1, samples=40000, seed=5)
    assert est.E > 0 and est.acceptance_rate > 0
    assert within(est, oracle_12_d1(0.5))


def test_estimate_E_color_swap_symmetry():
    a = estimate_E(1, 2, 0.3, 1, samples=40000, seed=6)
    b = estimate_E(2, 1, 0.7, 1, samples=40000, seed=7)
    assert abs(a.E - b.E) <= 4.0 * math.hypot(a.std_error, b.std_error)


def test_estimate_E_rotation_invariance():
    angle = 0.6
    rot = torch.tensor([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]], dtype=torch.float64)
    a = estimate_E(1, 2, 0.5, 2, samples=8000, seed=8, inner_samples=2000)
    b = estimate_E(1, 2, 0.5, 2, samples=8000, seed=9, inner_samples=2000, rotation=rot)
    assert abs(a.E - b.E) <= 4.0 * math.hypot(a.std_error, b.std_error)


def test_estimate_E_is_reproducible():
    a = estimate_E(2, 2, 0.5, 1, samples=5000, seed=10)
    b = estimate_E(2, 2, 0.5, 1, samples=5000, seed=10)
    assert a == b


def test_estimate_E_preconditions():
    with pytest.raises(PreconditionError):
        estimate_E(0, 1, 0.5, 1)
    with pytest.raises(PreconditionError):
        estimate_E(1, 1, 1.0, 1)


def test_term_domination_is_tight_for_smallest_term():
    for p in (0.25, 0.5):
        assert term_domination(1, 1, 1, p) == pytest.approx(cluster_11_d1(p))
    assert term_domination(1, 2, 1, 0.5) >= oracle_cluster_12_d1(0.5, 0.5)


def test_term_coefficient():
    # (p/d)(1/k) a^1 b^1 Gamma(k - 1 + p/d) with d = 1, k = 2
    assert term_coefficient(1, 1, 0.5, 1, 0.5) == pytest.approx(0.5 * 0.5 * 0.25 * math.gamma(1.5))
    assert term_coefficient(1, 0, 0.5, 2, 1.0) == pytest.approx(0.5 * 0.5 * math.gamma(0.5))


@pytest.mark.parametrize('d, p, alpha', [(1, 0.5, 0.5), (2, 1.0, 0.3), (3, 1.5, 0.7)])
def test_singletons_match_nearest_neighbour_law(d, p, alpha):
    # coefficient * J(1, 0) = alpha_R Gamma(1 + p/d) (alpha_B omega_d)^{-p/d}
    omega = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    red = estimate_cluster_term(1, 0, alpha, d, p)
    assert red.std_error == 0.0 and red.proposal == 'exact'
    expected = alpha * math.gamma(1 + p / d) * ((1 - alpha) * omega) ** (-p / d)
    assert term_coefficient(1, 0, alpha, d, p) * red.E == pytest.approx(expected)
    blue = estimate_cluster_term(0, 1, alpha, d, p)
    expected = (1 - alpha) * math.gamma(1 + p / d) * (alpha * omega) ** (-p / d)
    assert term_coefficient(0, 1, alpha, d, p) * blue.E == pytest.approx(expected)
    with pytest.raises(PreconditionError):
        estimate_cluster_term(2, 0, alpha, d, p)


@pytest.mark.parametrize('alpha', [0.3, 0.5])
def test_cluster_term_one_one_closed_form(alpha):
    est = estimate_cluster_term(1, 1, alpha, 1, 0.5, samples=20000, seed=11, proposal='box')
    assert within(est, cluster_11_d1(0.5))
    tree = estimate_cluster_term(1, 1, alpha, 1, 0.5, samples=2000, seed=11, proposal='tree')
    # a single unit-ball step covers Theta exactly, so every sample carries the same weight
    assert tree.acceptance_rate == 1.0
    assert tree.E == pytest.approx(cluster_11_d1(0.5))


def test_cluster_term_one_two_against_quadrature():
    est = estimate_cluster_term(1, 2, 0.5, 1, 0.5, samples=20000, seed=12, proposal='tree')
    assert est.proposal == 'tree' and est.acceptance_rate == 1.0
    assert within(est, oracle_cluster_12_d1(0.5, 0.5))


def test_tree_proposal_reproduces_E():
    est = estimate_E(1, 2, 0.5, 1, samples=20000, seed=13, proposal='tree')
    assert within(est, oracle_12_d1(0.5))
    assert est.E == pytest.approx(estimate_E(1, 2, 0.5, 1, samples=20000, seed=13, proposal='tree').E)


def test_tree_and_box_proposals_agree():
    box = estimate_cluster_term(2, 2, 0.5, 1, 0.5, samples=40000, seed=14, proposal='box')
    tree = estimate_cluster_term(2, 2, 0.5, 1, 0.5, samples=20000, seed=15, proposal='tree')
    assert box.E > 0 and tree.E > 0
    assert abs(box.E - tree.E) <= 4.0 * math.hypot(box.std_error, tree.std_error)


def test_tree_proposal_in_2d_agrees_with_box():
    box = estimate_cluster_term(1, 2, 0.5, 2, 1.0, samples=20000, seed=16, inner_samples=2000, proposal='box')
    tree = estimate_cluster_term(1, 2, 0.5, 2, 1.0, samples=4000, seed=17, inner_samples=2000, proposal='tree')
    assert abs(box.E - tree.E) <= 4.0 * math.hypot(box.std_error, tree.std_error)


def test_auto_proposal_handles_sparse_terms():
    # box acceptance for (1, 7) in 1d is of order 1e-7
    est = estimate_cluster_term(1, 7, 0.5, 1, 0.5, samples=4096, seed=18)
    assert est.proposal == 'tree' and not est.unreliable
    assert est.E > 0 and est.std_error < est.E
    assert est.E <= term_domination(1, 7, 1, 0.5)
    dense = estimate_cluster_term(1, 1, 0.5, 1, 0.5, samples=4096, seed=18)
    assert dense.proposal == 'box'


def test_random_bipartite_trees_are_spanning_trees():
    gen = torch.Generator().manual_seed(0)
    k_R, k_B = 3, 4
    root = torch.tensor([0, 3, 0, 5])
    order, parent = random_bipartite_trees(k_R, k_B, root, gen)
    for i in range(root.shape[0]):
        assert sorted(order[i].tolist()) == list(range(k_R + k_B))
        assert int(order[i, 0]) == int(root[i]) and int(parent[i, root[i]]) == -1
        seen = {int(root[i])}
        for v in order[i, 1:].tolist():
            u = int(parent[i, v])
            assert u in seen and (u < k_R) != (v < k_R)
            seen.add(v)


def test_threshold_tree_counts():
    # complete K_{2,2} has 4 spanning trees, a disconnected graph none
    red = torch.tensor([[[0.0], [0.1]], [[0.0], [1.4]]], dtype=torch.float64)
    blue = torch.tensor([[[0.5], [0.4]], [[0.7], [5.0]]], dtype=torch.float64)
    counts = threshold_tree_counts(red, blue)
    assert counts.tolist() == [4.0, 0.0]
    path = threshold_tree_counts(torch.tensor([[[0.0], [1.4]]], dtype=torch.float64),
                                 torch.tensor([[[0.7]]], dtype=torch.float64))
    assert path.tolist() == [1.0]


def test_estimate_beta_regime_errors():
    with pytest.raises(UnsupportedRegimeError):
        estimate_beta(1, 1.0, 0.5, K_max=3, samples_per_term=100)
    with pytest.raises(PreconditionError):
        estimate_beta(1, 0.5, 0.5, K_max=1, samples_per_term=100)


def test_partial_sums_nondecreasing():
    small = estimate_beta(1, 0.5, 0.5, K_max=3, samples_per_term=2000, seed=1)
    large = estimate_beta(1, 0.5, 0.5, K_max=4, samples_per_term=2000, seed=1)
    assert len(small.terms) == 5 and len(large.terms) == 8
    assert large.value >= small.value
    assert small.value > 0 and small.tail_bound > 0
    assert all(t.E >= 0 for t in large.terms)


def test_tail_extrapolation():
    shells = [0.0] + [k ** -3.0 for k in range(1, 7)]
    assert tail_extrapolation(shells) == pytest.approx(zeta(3.0, 7.0))
    assert math.isnan(tail_extrapolation([0.0, 0.0, 1.0, 0.0]))
    assert math.isnan(tail_extrapolation([0.0, 0.0, 1.0]))
    assert tail_extrapolation([0.0, 0.0, 1.0, 2.0]) == math.inf


def test_term_table_csv(tmp_path):
    table = term_table(1, 0.5, 0.5, K_max=3, samples_per_term=500, seed=2)
    path = write_term_table([t for t, _ in table], tmp_path / 'terms.csv')
    lines = path.read_text().splitlines()
    assert lines[0] == 'k_R,k_B,E,stderr,acceptance,samples'
    assert len(lines) == 6
    assert lines[1].startswith('1,0,') and lines[2].startswith('0,1,')


@pytest.mark.slow
@pytest.mark.parametrize('alpha', [0.3, 0.5, 0.7])
def test_acceptance_closed_form_term(alpha):
    est = estimate_E(1, 1, alpha, 1, samples=10 ** 5, seed=17)
    assert abs(est.E - closed_form_11_d1(alpha)) <= 3.0 * est.std_error


@pytest.mark.slow
def test_term_magnitudes_decay_in_1d():
    table = term_table(1, 0.5, 0.5, K_max=8, samples_per_term=20000, seed=3)
    shells = np.zeros(9)
    for term, coeff in table:
        shells[term.k_R + term.k_B] += coeff * term.E
    assert all(shells[k + 1] <= shells[k] for k in range(4, 8))
