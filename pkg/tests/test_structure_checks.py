import json

import numpy as np
import pytest

from torch_bmst.errors import PreconditionError, TreeMismatchError, UnsupportedDimensionError, UnsupportedRegimeError
from torch_bmst.geometry.instance import BipartiteInstance, sample_uniform
from torch_bmst.geometry.metrics import pairwise_distances
from torch_bmst.mst.bipartite import bipartite_mst, bottleneck_threshold
from torch_bmst.mst.kruskal import SpanningTree
from torch_bmst.structure_checks import (
    CHECKS, LemmaReport, check_bottleneck_mono_to_bi, check_bottleneck_optimality, check_bounded_difference,
    check_cut_property, check_empty_cone, check_mono_to_bi_bound, check_p_invariance, check_torus_cube_transfer,
    corrupt_bad_reconnect, corrupt_max_tree, corrupt_swap_edge, hilbert_chain_bound, mono_to_bi_constant,
    run_all_checks, write_reports,
)


@pytest.fixture(scope='module')
def instance_300():
    return sample_uniform(150, 150, 2, seed=3)


@pytest.fixture(scope='module')
def mst_300(instance_300):
    return bipartite_mst(instance_300)


def test_report_needs_witness_to_fail():
    with pytest.raises(ValueError):
        LemmaReport('cut_property', {}, False)
    report = LemmaReport('cut_property', {}, True, slack=float('inf'))
    assert report.slack is None


def test_write_reports(tmp_path, small_instance):
    reports = run_all_checks(small_instance, checks=('cut_property', 'bottleneck_optimality'))
    path = write_reports(reports, tmp_path / 'reports.jsonl')
    lines = path.read_text().splitlines()
    assert [json.loads(line)['lemma'] for line in lines] == ['cut_property', 'bottleneck_optimality']


def test_mono_to_bi_constant():
    assert mono_to_bi_constant(0.5) == 1.0
    assert mono_to_bi_constant(1.0) == 1.0
    assert mono_to_bi_constant(2.0) == 2.0


@pytest.mark.parametrize('seed', range(5))
def test_all_checks_pass_on_true_mst(seed):
    inst = sample_uniform(60, 50, 2, seed=seed)
    reports = run_all_checks(inst, p=1.0, seed=seed)
    assert {r.lemma for r in reports} >= {'cut_property', 'empty_cone', 'p_invariance', 'bottleneck_optimality',
                                          'mono_to_bi_bound', 'bottleneck_mono_to_bi', 'bounded_difference'}
    failed = [r.to_dict() for r in reports if not r.passed]
    assert not failed


@pytest.mark.parametrize('p', [0.5, 1.0, 2.0, 3.0])
def test_mono_to_bi_bound_holds(p):
    inst = sample_uniform(80, 40, 2, seed=21)
    assert check_mono_to_bi_bound(inst.red, inst.blue, p).passed
    assert check_bottleneck_mono_to_bi(inst.red, inst.blue).passed


def test_mono_to_bi_single_red():
    assert check_mono_to_bi_bound([[0.2, 0.2]], [[0.9, 0.9], [0.1, 0.3]], 1.0).passed


def test_torus_transfer_holds_in_1d_and_2d():
    for d, n in ((1, 60), (2, 200)):
        inst = sample_uniform(n, n, d, seed=d)
        delta = 2.0 * bottleneck_threshold(inst)
        if delta < 0.5:
            assert check_torus_cube_transfer(inst, delta, p=1.0).passed


def test_torus_transfer_preconditions(small_instance):
    with pytest.raises(PreconditionError):
        check_torus_cube_transfer(small_instance, 0.5)
    with pytest.raises(PreconditionError):
        check_torus_cube_transfer(small_instance, 0.5 * bottleneck_threshold(small_instance))


def test_bounded_difference_regime(small_instance):
    assert check_bounded_difference(small_instance, 1.0, seed=4).passed
    with pytest.raises(UnsupportedRegimeError):
        check_bounded_difference(small_instance, 2.0)


def test_checks_reject_foreign_trees(small_instance):
    with pytest.raises(TreeMismatchError):
        check_cut_property(small_instance, SpanningTree(3, [(0, 1), (1, 2)], [0.1, 0.1]))


def test_cut_property_fails_on_swap(instance_300, mst_300):
    report = check_cut_property(instance_300, corrupt_swap_edge(instance_300, mst_300))
    assert not report.passed
    assert 'missing_edge' in report.witness


def test_p_invariance_fails_on_swap(instance_300, mst_300):
    assert check_p_invariance(instance_300, tree=mst_300).passed
    report = check_p_invariance(instance_300, tree=corrupt_swap_edge(instance_300, mst_300))
    assert not report.passed and report.witness['p'] == 0.5


def test_bottleneck_optimality_fails_on_reconnect(instance_300, mst_300):
    assert check_bottleneck_optimality(instance_300, mst_300).passed
    report = check_bottleneck_optimality(instance_300, corrupt_bad_reconnect(instance_300, mst_300))
    assert not report.passed
    assert report.witness['edge']['length'] > report.witness['threshold']


@pytest.mark.parametrize('metric', ['cube', 'torus'])
@pytest.mark.parametrize('solver', ['brute', 'grid_boruvka'])
def test_bottleneck_equals_threshold_exactly(metric, solver):
    inst = sample_uniform(70, 90, 2, metric=metric, seed=31)
    tree = bipartite_mst(inst, solver=solver)
    assert tree.bottleneck == bottleneck_threshold(inst)
    assert check_bottleneck_optimality(inst, tree).passed


def test_bottleneck_optimality_detects_one_ulp(instance_300, mst_300):
    lengths = mst_300.lengths.copy()
    e = int(np.argmax(lengths))
    lengths[e] = np.nextafter(lengths[e], np.inf)
    report = check_bottleneck_optimality(instance_300, SpanningTree(mst_300.n_vertices, mst_300.edges, lengths))
    assert not report.passed and report.slack < 0


def test_empty_cone_fails_on_reconnect(instance_300, mst_300):
    assert check_empty_cone(instance_300, mst_300).passed
    report = check_empty_cone(instance_300, corrupt_bad_reconnect(instance_300, mst_300))
    assert not report.passed


def test_empty_cone_witness_on_hand_built_tree():
    red = np.array([[0.0], [0.27], [0.61]])
    blue = np.array([[0.03], [0.31], [0.66]])
    inst = BipartiteInstance(red, blue)
    edges = [(0, 5), (0, 3), (1, 4), (2, 5), (1, 5)]
    D = pairwise_distances('cube', inst.points, inst.points)
    tree = SpanningTree(6, edges, [float(D[a, b]) for a, b in edges])
    report = check_empty_cone(inst, tree)
    assert not report.passed
    assert report.witness['edge']['u'] == 0 and report.witness['edge']['v'] == 5
    assert report.witness['point'] == 1


def test_empty_cone_vacuous_when_no_long_edge():
    inst = BipartiteInstance([[0.1]], [[0.2], [0.05]])
    report = check_empty_cone(inst, bipartite_mst(inst))
    assert report.passed and report.vacuous


def test_max_tree_breaks_cost_bounds(instance_300, mst_300):
    bad = corrupt_max_tree(instance_300)
    assert bad.cost() > mst_300.cost()
    assert not check_mono_to_bi_bound(instance_300.red, instance_300.blue, 1.0, tree=bad).passed
    assert not check_bottleneck_mono_to_bi(instance_300.red, instance_300.blue, tree=bad).passed
    delta = 0.45
    assert bottleneck_threshold(instance_300) <= delta
    assert not check_torus_cube_transfer(instance_300, delta, tree=bad).passed


def test_run_all_checks_reports_corruption(instance_300, mst_300):
    reports = run_all_checks(instance_300, tree=corrupt_swap_edge(instance_300, mst_300), checks=CHECKS)
    assert any(not r.passed for r in reports)


def test_hilbert_chain_examples():
    chain, report = hilbert_chain_bound([[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]], p=1.0)
    assert chain == pytest.approx(3.0)
    assert report.passed
    assert report.details['mst_cost'] == pytest.approx(3.0)


def test_hilbert_chain_is_exact_in_1d():
    pts = sample_uniform(50, 1, 1, seed=5).red
    chain, report = hilbert_chain_bound(pts, p=1.0)
    assert chain == pytest.approx(report.details['mst_cost'], abs=1e-12)


@pytest.mark.parametrize('d', [2, 3])
def test_hilbert_chain_dominates_mst(d):
    pts = sample_uniform(300, 1, d, seed=d).red
    for p in (0.5, 1.0):
        chain, report = hilbert_chain_bound(pts, p=p)
        assert report.passed and report.details['empirical_constant'] > 0


def test_hilbert_chain_dimension_limit():
    with pytest.raises(UnsupportedDimensionError):
        hilbert_chain_bound(np.full((3, 4), 0.5))


@pytest.mark.slow
def test_hilbert_chain_constant_is_stable_across_seeds():
    constants = []
    for seed in range(20):
        pts = sample_uniform(4096, 1, 2, seed=70_000 + seed).red
        _, report = hilbert_chain_bound(pts, p=1.0)
        assert report.passed
        constants.append(report.details['empirical_constant'])
    constants = np.asarray(constants)
    assert constants.std(ddof=1) / constants.mean() < 0.1


@pytest.mark.slow
def test_acceptance_structural_suite():
    for seed in range(200):
        inst = sample_uniform(60, 60, 1 + seed % 3, metric='cube', seed=50_000 + seed)
        reports = run_all_checks(inst, p=1.0, seed=seed)
        assert all(r.passed for r in reports), [r.to_dict() for r in reports if not r.passed]
