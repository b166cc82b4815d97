"""
Command-line entry point. Artifact paths go to stdout as one JSON object,
logging goes to stderr.

Exit codes: 0 success, 1 a verification or tail check failed, 2 usage error.
"""
import argparse
import csv
import json
import logging
import sys

import torch_bmst
from torch_bmst.beta_series.series import estimate_beta, term_rows, write_term_table
from torch_bmst.cli.config import resolve_config, write_effective_config
from torch_bmst.errors import BMSTError
from torch_bmst.experiments.plan import record_rows, split_counts, write_records, write_summary
from torch_bmst.experiments.scans import (
    concentration_scan, degree_scan, direct_beta, frieze_calibration, mono_scaling_scan, rate_statistics,
    scaling_scan,
)
from torch_bmst.experiments.tails import occupancy_tail_check, uniform_cube_tail_check
from torch_bmst.geometry.instance import load_instance, sample_uniform, save_instance
from torch_bmst.mst.bipartite import bipartite_mst
from torch_bmst.mst.kruskal import save_tree, tree_rows, tree_summary
from torch_bmst.structure_checks.corruption import CORRUPTIONS
from torch_bmst.structure_checks.hilbert import hilbert_chain_bound
from torch_bmst.structure_checks.report import write_reports
from torch_bmst.structure_checks.suite import CHECKS, run_all_checks
from torch_bmst.torch_utils.seed import fix_random_seed
from torch_bmst.utils.files import dump_json

logger = logging.getLogger('torch_bmst')


COMMANDS = ('gen', 'solve', 'verify', 'beta-series', 'beta-direct', 'scan-degree', 'scan-scaling',
            'scan-concentration', 'scan-rates', 'calibrate-frieze', 'tail-check')


def setup_logging(level='INFO'):
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, str(level).upper(), logging.INFO),
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s', force=True)


def _common_parser():
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument('--seed', type=int)
    common.add_argument('--out', type=str, help='output directory')
    common.add_argument('--workers', type=int)
    common.add_argument('--format', choices=('csv', 'json'))
    common.add_argument('--config', type=str, help='YAML or JSON file with parameter values')
    common.add_argument('--log-level', choices=('DEBUG', 'INFO', 'WARNING', 'ERROR'))
    common.add_argument('--timings', action='store_true', help='write wall times into the raw records')
    return common


def _instance_args(parser):
    parser.add_argument('--n', type=int)
    parser.add_argument('--d', type=int)
    parser.add_argument('--p', type=float)
    parser.add_argument('--alpha', type=float)
    parser.add_argument('--metric', choices=('cube', 'torus'))


def _plan_args(parser):
    _instance_args(parser)
    parser.add_argument('--n-schedule', type=int, nargs='+')
    parser.add_argument('--trials', type=int)
    parser.add_argument('--solver', choices=('brute', 'grid_boruvka'))


def build_parser():
    parser = argparse.ArgumentParser(prog='torch-bmst', description='Random bipartite Euclidean MST toolkit')
    parser.add_argument('--version', action='version', version=torch_bmst.__version__)
    subparsers = parser.add_subparsers(dest='command')
    common = _common_parser()

    def sub(name, help_text):
        return subparsers.add_parser(name, parents=[common], help=help_text, argument_default=argparse.SUPPRESS)

    gen = sub('gen', 'sample a uniform bipartite instance')
    _instance_args(gen)

    solve = sub('solve', 'bipartite MST of a sampled or loaded instance')
    _instance_args(solve)
    solve.add_argument('--instance', type=str, help='instance CSV written by gen')
    solve.add_argument('--solver', choices=('brute', 'grid_boruvka'))

    verify = sub('verify', 'structural checks on one instance')
    _instance_args(verify)
    verify.add_argument('--instance', type=str)
    verify.add_argument('--all', action='store_true')
    verify.add_argument('--checks', nargs='+', choices=CHECKS)
    verify.add_argument('--corrupt', choices=sorted(CORRUPTIONS))
    verify.add_argument('--delta', type=float)
    verify.add_argument('--solver', choices=('brute', 'grid_boruvka'))

    series = sub('beta-series', 'series estimate of beta_bMST(d, p)')
    series.add_argument('--d', type=int)
    series.add_argument('--p', type=float)
    series.add_argument('--alpha', type=float)
    series.add_argument('--kmax', type=int)
    series.add_argument('--samples', type=int)
    series.add_argument('--inner-samples', type=int)

    _plan_args(sub('beta-direct', 'extrapolated torus plateau estimate of beta_bMST(d, p)'))
    _plan_args(sub('scan-degree', 'max degree against log n'))
    scaling = sub('scan-scaling', 'normalized cost on cube and torus')
    _plan_args(scaling)
    scaling.add_argument('--mono', action='store_true', help='also scan the single color MST')
    _plan_args(sub('scan-concentration', 'relative deviation of the normalized cost'))
    _plan_args(sub('scan-rates', 'Hausdorff and nearest neighbor rates'))

    frieze = sub('calibrate-frieze', 'MST of K_n with uniform weights')
    frieze.add_argument('--n', type=int)
    frieze.add_argument('--trials', type=int)

    tail = sub('tail-check', 'occupancy tails against Chernoff bounds')
    tail.add_argument('--n', type=int)
    tail.add_argument('--d', type=int)
    tail.add_argument('--level', type=int)
    tail.add_argument('--ts', type=float, nargs='+')
    tail.add_argument('--trials', type=int)
    tail.add_argument('--volume', type=float, help='also run the uniform-over-cubes variant for this volume')
    return parser


def write_rows(rows, stem, config, meta=None):
    """ CSV table, or with --format json an object holding the same rows as an array. """
    if config.format == 'json':
        payload = dict(meta or {})
        payload['rows'] = rows
        return dump_json(payload, config.out_path / f'{stem}.json')
    path = config.out_path / f'{stem}.csv'
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='') as f:
        if meta:
            f.write(f'# {json.dumps(meta, sort_keys=True)}\n')
        if rows:
            writer = csv.DictWriter(f, fieldnames=list(rows[0]))
            writer.writeheader()
            for row in rows:
                writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return path


def write_plan_records(records, plan, config, stem='records'):
    if config.format == 'json':
        payload = {'plan': plan.to_dict(), 'version': torch_bmst.__version__,
                   'rows': record_rows(records, timings=config.timings)}
        return dump_json(payload, config.out_path / f'{stem}.json')
    return write_records(records, config.out_path / f'{stem}.csv', plan, timings=config.timings)


def _instance(config):
    if config.instance is not None:
        return load_instance(config.instance)
    n_red, n_blue = split_counts(config.n, config.alpha)
    return sample_uniform(n_red, n_blue, config.d, metric=config.metric, seed=config.seed)


def cmd_gen(config):
    instance = _instance(config)
    if config.format == 'json':
        payload = instance.describe()
        payload.update(red=instance.red.tolist(), blue=instance.blue.tolist())
        return [dump_json(payload, config.out_path / 'instance.json')], True
    return list(save_instance(instance, config.out_path / 'instance.csv')), True


def cmd_solve(config):
    instance = _instance(config)
    tree = bipartite_mst(instance, solver=config.solver)
    if config.format == 'json':
        tree_path = write_rows(tree_rows(tree), 'tree', config)
    else:
        tree_path = save_tree(tree, config.out_path / 'tree.csv')
    summary = dump_json(tree_summary(tree, instance, p=config.p), config.out_path / 'summary.json')
    return [tree_path, summary], True


def cmd_verify(config):
    instance = _instance(config)
    tree = bipartite_mst(instance, solver=config.solver)
    if config.corrupt is not None:
        tree = CORRUPTIONS[config.corrupt](instance, tree)
        logger.info(f'verifying a tree corrupted by {config.corrupt}')
    checks = CHECKS if config.all or not config.checks else tuple(config.checks)
    reports = run_all_checks(instance, tree=tree, p=config.p, delta=config.delta, seed=config.seed, checks=checks)
    if config.all and instance.metric.value == 'cube' and instance.dim <= 3:
        reports.append(hilbert_chain_bound(instance.red, p=config.p)[1])
    for report in reports:
        if not report.passed:
            logger.error(f'{report.lemma} failed, witness: {json.dumps(report.witness, sort_keys=True, default=float)}')
    if config.format == 'json':
        path = dump_json({'reports': [json.loads(r.to_json()) for r in reports]}, config.out_path / 'reports.json')
    else:
        path = write_reports(reports, config.out_path / 'reports.jsonl')
    return [path], all(report.passed for report in reports)


def cmd_beta_series(config):
    estimate = estimate_beta(config.d, config.p, config.alpha, K_max=config.kmax, samples_per_term=config.samples,
                             seed=config.seed, inner_samples=config.inner_samples, workers=config.workers)
    if config.format == 'json':
        table = write_rows(term_rows(estimate.terms), 'terms', config)
    else:
        table = write_term_table(estimate.terms, config.out_path / 'terms.csv')
    return [table, dump_json(estimate.to_dict(), config.out_path / 'beta.json')], True


def cmd_beta_direct(config):
    estimate, records = direct_beta(config.d, config.p, config.alpha, config.n_schedule, config.trials,
                                    seed=config.seed, workers=config.workers)
    # direct estimates always run on the torus
    plan = config.to_plan('direct_beta', metric='torus')
    return [write_plan_records(records, plan, config), dump_json(estimate.to_dict(), config.out_path / 'beta.json')], True


def _scan_command(experiment, scan, **kwargs):
    def command(config):
        plan = config.to_plan(experiment)
        summary, records = scan(plan, workers=config.workers, **kwargs)
        artifacts = [write_plan_records(records, plan, config), write_summary(summary, config.out_path / 'summary.json', plan)]
        if experiment == 'scaling' and config.mono:
            mono, mono_records = mono_scaling_scan(plan, workers=config.workers)
            artifacts.append(write_plan_records(mono_records, plan, config, stem='mono_records'))
            artifacts.append(write_summary(mono, config.out_path / 'mono_summary.json', plan))
        return artifacts, True
    return command


def cmd_scan_scaling(config):
    return _scan_command('scaling', scaling_scan)(config)


def cmd_calibrate_frieze(config):
    result = frieze_calibration(config.n, config.trials, seed=config.seed, workers=config.workers)
    return [dump_json(result, config.out_path / 'frieze.json')], True


def cmd_tail_check(config):
    checks = occupancy_tail_check(config.n, config.level, config.ts, config.trials, seed=config.seed, d=config.d)
    if config.volume is not None:
        checks += [uniform_cube_tail_check(config.n, config.d, config.volume, t, config.trials, seed=config.seed)
                   for t in config.ts]
    rows = [{k: v for k, v in check.to_dict().items() if k != 'details'} for check in checks]
    return [write_rows(rows, 'tails', config)], all(check.passed for check in checks)


HANDLERS = {
    'gen': cmd_gen,
    'solve': cmd_solve,
    'verify': cmd_verify,
    'beta-series': cmd_beta_series,
    'beta-direct': cmd_beta_direct,
    'scan-degree': _scan_command('degree', degree_scan),
    'scan-scaling': cmd_scan_scaling,
    'scan-concentration': _scan_command('concentration', concentration_scan),
    'scan-rates': _scan_command('rates', rate_statistics),
    'calibrate-frieze': cmd_calibrate_frieze,
    'tail-check': cmd_tail_check,
}


def run(argv=None):
    parser = build_parser()
    try:
        args = vars(parser.parse_args(argv))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    command = args.pop('command', None)
    if command is None:
        parser.print_usage(sys.stderr)
        return 2
    setup_logging(args.pop('log_level', 'INFO'))
    config_path = args.pop('config', None)
    try:
        config = resolve_config(command, args, config_path)
        fix_random_seed(config.seed)
        artifacts, ok = HANDLERS[command](config)
        artifacts.append(write_effective_config(config))
    except (BMSTError, OSError) as exc:
        logger.error(f'{command}: {exc}')
        return 2
    print(json.dumps({'command': command, 'artifacts': [str(path) for path in artifacts], 'passed': ok}, sort_keys=True))
    return 0 if ok else 1


def main():
    sys.exit(run())


if __name__ == '__main__':
    main()
