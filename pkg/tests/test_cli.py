import json

import pytest

from torch_bmst.cli.config import resolve_config
from torch_bmst.cli.run import run
from torch_bmst.errors import InvalidPlanError
from torch_bmst.experiments.plan import read_records


def _artifacts(capsys):
    out = capsys.readouterr().out.strip().splitlines()
    return json.loads(out[-1])


def test_solve_writes_tree_and_summary(tmp_path, capsys):
    code = run(['solve', '--d', '2', '--n', '200', '--alpha', '0.5', '--p', '1', '--seed', '7', '--out', str(tmp_path)])
    assert code == 0
    listing = _artifacts(capsys)
    assert listing['command'] == 'solve'
    names = {p.split('/')[-1] for p in listing['artifacts']}
    assert names == {'tree.csv', 'summary.json', 'effective_config.json'}
    summary = json.loads((tmp_path / 'summary.json').read_text())
    assert summary['n_R'] == 100 and summary['n_B'] == 100
    assert len((tmp_path / 'tree.csv').read_text().splitlines()) == 200


def test_same_argv_gives_identical_artifacts(tmp_path, capsys):
    for sub in ('a', 'b'):
        assert run(['scan-degree', '--n-schedule', '32', '64', '--trials', '2', '--seed', '5',
                    '--out', str(tmp_path / 'run')]) == 0
        for name in ('records.csv', 'summary.json'):
            (tmp_path / f'{sub}_{name}').write_bytes((tmp_path / 'run' / name).read_bytes())
    for name in ('records.csv', 'summary.json'):
        assert (tmp_path / f'a_{name}').read_bytes() == (tmp_path / f'b_{name}').read_bytes()


def test_gen_then_solve_loaded_instance(tmp_path, capsys):
    assert run(['gen', '--n', '50', '--d', '3', '--seed', '1', '--out', str(tmp_path)]) == 0
    assert (tmp_path / 'instance.csv').exists() and (tmp_path / 'instance.json').exists()
    assert run(['solve', '--instance', str(tmp_path / 'instance.csv'), '--format', 'json',
                '--out', str(tmp_path / 'solved')]) == 0
    rows = json.loads((tmp_path / 'solved' / 'tree.json').read_text())['rows']
    assert len(rows) == 49


def test_verify_passes_on_true_mst(tmp_path, capsys):
    assert run(['verify', '--all', '--n', '300', '--d', '2', '--seed', '3', '--out', str(tmp_path)]) == 0
    reports = [json.loads(line) for line in (tmp_path / 'reports.jsonl').read_text().splitlines()]
    assert all(r['passed'] for r in reports)


@pytest.mark.parametrize('corruption', ['swap', 'reconnect'])
def test_verify_fails_on_corrupted_tree(tmp_path, capsys, corruption):
    code = run(['verify', '--all', '--n', '300', '--d', '2', '--seed', '3', '--corrupt', corruption,
                '--format', 'json', '--out', str(tmp_path)])
    assert code == 1
    reports = json.loads((tmp_path / 'reports.json').read_text())['reports']
    failed = [r for r in reports if not r['passed']]
    assert failed and any(r['witness'] for r in failed)


def test_beta_series_writes_terms(tmp_path, capsys):
    code = run(['beta-series', '--d', '1', '--p', '0.5', '--alpha', '0.5', '--kmax', '3', '--samples', '500',
                '--out', str(tmp_path)])
    assert code == 0
    assert (tmp_path / 'terms.csv').read_text().startswith('k_R,k_B,E,stderr,acceptance,samples')
    beta = json.loads((tmp_path / 'beta.json').read_text())
    assert beta['K_max'] == 3 and beta['value'] > 0


def test_usage_errors_exit_2(tmp_path, capsys):
    assert run(['beta-series', '--d', '1', '--p', '1.5', '--kmax', '3', '--samples', '10', '--out', str(tmp_path)]) == 2
    assert run(['solve', '--bogus']) == 2
    assert run(['frobnicate']) == 2
    assert run([]) == 2
    assert run(['solve', '--alpha', '1.5', '--out', str(tmp_path)]) == 2


def test_config_precedence(tmp_path):
    config_file = tmp_path / 'plan.yaml'
    config_file.write_text('n: 50\nd: 3\n')
    config = resolve_config('solve', {'n': 60}, config_file)
    assert (config.n, config.d) == (60, 3)
    config = resolve_config('solve', {}, config_file)
    assert config.n == 50
    # shipped defaults of calibrate-frieze
    assert resolve_config('calibrate-frieze', {}).n == 200
    config_file.write_text('unknown_key: 1\n')
    with pytest.raises(InvalidPlanError):
        resolve_config('solve', {}, config_file)


def test_effective_config_is_written(tmp_path, capsys):
    assert run(['calibrate-frieze', '--n', '10', '--trials', '20', '--out', str(tmp_path)]) == 0
    config = json.loads((tmp_path / 'effective_config.json').read_text())
    assert config['command'] == 'calibrate-frieze' and config['n'] == 10
    assert json.loads((tmp_path / 'frieze.json').read_text())['trials'] == 20


def test_tail_check_command(tmp_path, capsys):
    code = run(['tail-check', '--n', '2000', '--d', '1', '--level', '3', '--ts', '2', '0.5', '--trials', '20',
                '--volume', '0.125', '--format', 'json', '--out', str(tmp_path)])
    assert code == 0
    rows = json.loads((tmp_path / 'tails.json').read_text())['rows']
    assert len(rows) == 4 and all(r['passed'] for r in rows)


def test_scan_commands_run(tmp_path, capsys):
    common = ['--n-schedule', '32', '64', '--trials', '2', '--d', '2']
    assert run(['scan-scaling', *common, '--mono', '--out', str(tmp_path / 'scaling')]) == 0
    assert (tmp_path / 'scaling' / 'mono_summary.json').exists()
    assert run(['scan-rates', *common, '--out', str(tmp_path / 'rates')]) == 0
    assert run(['scan-concentration', *common, '--out', str(tmp_path / 'conc')]) == 0
    assert run(['beta-direct', '--n-schedule', '32', '64', '128', '--trials', '2', '--d', '1', '--p', '0.5',
                '--out', str(tmp_path / 'direct')]) == 0


def test_beta_direct_records_are_labelled_torus(tmp_path, capsys):
    code = run(['beta-direct', '--n-schedule', '16', '32', '64', '--trials', '2', '--d', '1', '--p', '0.5',
                '--metric', 'cube', '--out', str(tmp_path)])
    assert code == 0
    plan, records = read_records(tmp_path / 'records.csv')
    assert plan['metric'] == 'torus' and plan['experiment'] == 'direct_beta'
    assert records and all(r.metric == 'torus' for r in records)
