import logging

from torch_bmst.mst.bipartite import bipartite_mst, bottleneck_threshold
from torch_bmst.structure_checks.lemmas import (
    check_bottleneck_mono_to_bi, check_bottleneck_optimality, check_bounded_difference, check_cut_property,
    check_empty_cone, check_mono_to_bi_bound, check_p_invariance, check_torus_cube_transfer,
)

logger = logging.getLogger(__name__)


CHECKS = ('cut_property', 'empty_cone', 'p_invariance', 'bottleneck_optimality', 'mono_to_bi_bound',
          'bottleneck_mono_to_bi', 'torus_cube_transfer', 'bounded_difference')


def run_all_checks(instance, tree=None, p=1.0, delta=None, seed=0, checks=CHECKS):
    """
    Runs the selected checks on one instance. `tree` replaces the solved MST wherever a check
    accepts a candidate tree, which is how corrupted trees are fed in.
    """
    if tree is None:
        tree = bipartite_mst(instance)
    reports = []
    if 'cut_property' in checks:
        reports.append(check_cut_property(instance, tree))
    if 'empty_cone' in checks:
        reports.append(check_empty_cone(instance, tree))
    if 'p_invariance' in checks:
        reports.append(check_p_invariance(instance, tree=tree))
    if 'bottleneck_optimality' in checks:
        reports.append(check_bottleneck_optimality(instance, tree))
    if 'mono_to_bi_bound' in checks:
        reports.append(check_mono_to_bi_bound(instance.red, instance.blue, p, metric=instance.metric, tree=tree))
    if 'bottleneck_mono_to_bi' in checks:
        reports.append(check_bottleneck_mono_to_bi(instance.red, instance.blue, metric=instance.metric, tree=tree))
    if 'torus_cube_transfer' in checks:
        if delta is None:
            delta = 2.0 * bottleneck_threshold(instance.with_metric('cube'))
        if delta < 0.5:
            reports.append(check_torus_cube_transfer(instance, delta, p=p, tree=tree))
        else:
            logger.info(f'torus/cube transfer skipped: delta={delta:.4f} is not below 1/2')
    if 'bounded_difference' in checks and p <= 1:
        reports.append(check_bounded_difference(instance, p, seed=seed))
    for report in reports:
        logger.debug(f'{report.lemma}: passed={report.passed} slack={report.slack}')
    return reports
