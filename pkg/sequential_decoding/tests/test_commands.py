import csv
import io
import json

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from main import main


def run(*args):
    stdout = io.StringIO()
    call_command(*args, stdout=stdout)
    return list(csv.DictReader(io.StringIO(stdout.getvalue())))


def values(rows, metric):
    return [float(row['value']) for row in rows if row['metric'] == metric]


def without_timing(rows):
    return [{key: value for key, value in row.items() if key != 'wall_time'} for row in rows]


def exit_code(*args):
    with pytest.raises(CommandError) as excinfo:
        call_command(*args, stdout=io.StringIO())
    return excinfo.value.returncode


class TestCapacity:
    def test_orthogonal_pair(self):
        rows = run('capacity', '--ensemble', 'orthogonal-pair')
        assert values(rows, 'chi') == [pytest.approx(1.0)]

    def test_theta_zero(self):
        assert values(run('capacity', '--theta', '0'), 'chi') == [pytest.approx(0.0, abs=1e-12)]

    def test_canonical(self):
        rows = run('capacity', '--ensemble', 'two-pure-theta', '--params', '0.7853981633974483')
        assert values(rows, 'chi')[0] == pytest.approx(0.6009, abs=1e-3)
        assert values(rows, 'letter_entropy') == [pytest.approx(0.0, abs=1e-12)] * 2

    def test_ensemble_document(self, tmp_path):
        path = tmp_path / 'ensemble.json'
        path.write_text(json.dumps({
            'version': 1,
            'dim': 2,
            'probs': [0.5, 0.5],
            'states': [
                [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]],
                [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]],
            ],
        }))
        assert values(run('capacity', '--ensemble', str(path)), 'chi') == [pytest.approx(1.0)]

    def test_report_document_loads_back(self, tmp_path):
        report = tmp_path / 'capacity.json'
        run('capacity', '--ensemble', 'depolarized-pair', '--report', str(report))
        document = tmp_path / 'depolarized.json'
        document.write_text(json.dumps(json.loads(report.read_text())['document']))
        original = values(run('capacity', '--ensemble', 'depolarized-pair'), 'chi')[0]
        assert values(run('capacity', '--ensemble', str(document)), 'chi')[0] == pytest.approx(original, abs=1e-12)


class TestTypicality:
    def test_sweep(self):
        rows = run('typicality', '--n-list', '4,8,12', '--delta', '0.25')
        masses = values(rows, 'avg_atypical_mass')
        assert len(masses) == 3
        assert masses[2] < masses[0]
        assert values(rows, 'typical_rank')[0] == 0

    def test_orthogonal_pair_has_no_atypical_mass(self):
        rows = run('typicality', '--ensemble', 'orthogonal-pair', '--n-list', '2,4', '--delta', '0.1')
        assert values(rows, 'avg_atypical_mass') == [pytest.approx(0.0, abs=1e-12)] * 2
        assert values(rows, 'cond_atypical_mass') == [pytest.approx(0.0, abs=1e-12)] * 2
        assert all(margin >= -1e-9 for margin in values(rows, 'sandwich_lower_margin'))

    def test_first_n_below_epsilon(self):
        rows = run('typicality', '--ensemble', 'orthogonal-pair', '--n-list', '2,4', '--delta', '0.1',
                   '--epsilon', '0.1', '--no-sandwich')
        assert values(rows, 'n0') == [2.0]
        assert not values(rows, 'sandwich_lower_margin')

    def test_monte_carlo_reports_stderr(self):
        rows = run('typicality', '--ensemble', 'depolarized-pair', '--n', '4', '--delta', '0.3',
                   '--mc', '--samples', '200', '--seed', '3')
        (row,) = [row for row in rows if row['metric'] == 'cond_atypical_mass']
        assert row['stderr'] != ''


class TestDecode:
    def test_exact_matches_bruteforce(self):
        rows = run('decode', '--n', '2', '--N', '2', '--delta', '0.6', '--bruteforce')
        assert values(rows, 'avg_err_exact')[0] == pytest.approx(values(rows, 'avg_err_bruteforce')[0], abs=1e-10)

    def test_orthogonal_pair_distinct_codes(self):
        rows = run('decode', '--ensemble', 'orthogonal-pair', '--n', '3', '--N', '1', '--delta', '0.1')
        assert values(rows, 'avg_err_exact') == [pytest.approx(0.0, abs=1e-10)]

    def test_monte_carlo_is_deterministic(self):
        args = ('decode', '--n', '3', '--rate', '0.5', '--mc', '--codes', '30', '--seed', '9',
                '--compare-pgm', '--per-code', '--samples', '50')
        first = run(*args)
        second = run(*args)
        assert without_timing(first) == without_timing(second)
        assert len(values(first, 'code_err')) == 30
        assert values(first, 'pgm_reference_bound')
        assert {row['N'] for row in first} == {'3'}

    def test_rate_sets_code_size_per_block_length(self):
        rows = run('decode', '--n-list', '2,4', '--rate', '0.5', '--delta', '0.3')
        assert [row['N'] for row in rows] == ['2', '4']


class TestBounds:
    def test_rows(self):
        rows = run('bounds', '--n', '4', '--N', '2', '--delta', '0.3', '--zmax', '3')
        assert len(values(rows, 'f_z')) == 4
        assert values(rows, 'A_exact')[0] == pytest.approx(values(rows, 'A_expansion')[0], abs=1e-10)
        success = 1.0 - values(rows, 'avg_err_exact')[0]
        assert success >= values(rows, 'success_lower_bound')[0] - 1e-9
        assert min(values(rows, 'appendix_b_w0_margin') + values(rows, 'appendix_b_q_margin')) >= -1e-9

    def test_verdict(self):
        rows = run('bounds', '--n', '4', '--rate', '0.25', '--delta', '0.1')
        (row,) = [row for row in rows if row['metric'] == 'rate_below_threshold']
        assert row['index'] == 'below'
        assert float(row['value']) == 1.0


class TestTrajectories:
    def test_orthogonal_pair_is_concentrated(self, tmp_path):
        code = tmp_path / 'code.json'
        code.write_text('[[0, 1], [1, 0]]')
        rows = run('trajectories', '--ensemble', 'orthogonal-pair', '--n', '2', '--delta', '0.1',
                   '--code-file', str(code), '--samples', '100')
        frequencies = {row['index']: float(row['value']) for row in rows if row['metric'] == 'trajectory_frequency'}
        assert frequencies['1:1'] == 1.0
        assert frequencies['2:2'] == 1.0
        assert frequencies['1:0'] == 0.0

    def test_canonical_histograms_match(self):
        rows = run('trajectories', '--n', '4', '--N', '2', '--delta', '0.3', '--samples', '4000', '--seed', '1')
        assert all(abs(z) <= 3.0 for z in values(rows, 'z_score'))
        assert values(rows, 'underflow_resamples') == [0.0, 0.0]

    def test_same_seed_same_histogram(self):
        args = ('trajectories', '--n', '3', '--N', '2', '--delta', '0.3', '--samples', '200', '--seed', '4')
        assert without_timing(run(*args)) == without_timing(run(*args))

    def test_sent_beyond_code(self):
        assert exit_code('trajectories', '--n', '3', '--N', '2', '--delta', '0.3', '--sent', '3') == 2


class TestConfigFile:
    def test_flags_override_file(self, tmp_path):
        config = tmp_path / 'experiment.env'
        config.write_text('ensemble=orthogonal-pair\nn_list=2,3\ndelta=0.3\nN=2\n')
        rows = run('decode', '--config', str(config), '--delta', '0.1', '--n', '2')
        assert {row['delta'] for row in rows} == {'0.1'}
        assert {row['n'] for row in rows} == {'2'}

    def test_rate_flag_displaces_file_code_size(self, tmp_path):
        config = tmp_path / 'experiment.env'
        config.write_text('n=2\nN=2\ndelta=0.6\n')
        rows = run('decode', '--config', str(config), '--rate', '0.5')
        assert [row['N'] for row in rows] == ['2']

    def test_missing_file(self, tmp_path):
        assert exit_code('capacity', '--config', str(tmp_path / 'missing.env')) == 2

    def test_environment_does_not_displace_file(self, tmp_path, monkeypatch):
        config = tmp_path / 'experiment.env'
        config.write_text('ensemble=orthogonal-pair\nn=2\nN=2\ndelta=0.3\n')
        monkeypatch.setenv('delta', '0.9')
        monkeypatch.setenv('N', '3')
        rows = run('decode', '--config', str(config))
        assert {row['delta'] for row in rows} == {'0.3'}
        assert {row['N'] for row in rows} == {'2'}

    def test_boolean_keys(self, tmp_path):
        config = tmp_path / 'experiment.env'
        config.write_text('ensemble=orthogonal-pair\nn=2\nN=2\ndelta=0.3\nmode=mc\ncodes=4\ncompare_pgm=yes\n')
        rows = run('decode', '--config', str(config))
        assert values(rows, 'pgm_err_mc')

    def test_bad_file_value(self, tmp_path):
        config = tmp_path / 'experiment.env'
        config.write_text('n=two\n')
        assert exit_code('capacity', '--config', str(config)) == 2


class TestOutputs:
    def test_csv_manifest_and_report(self, tmp_path):
        out = tmp_path / 'runs' / 'decode.csv'
        report = tmp_path / 'decode.json'
        call_command('decode', '--n', '2', '--N', '2', '--delta', '0.6', '--experiment', 'x1',
                     '--out', str(out), '--report', str(report), stdout=io.StringIO())
        with open(out, newline='') as stream:
            rows = list(csv.DictReader(stream))
        assert rows[0]['experiment'] == 'x1'
        manifest = json.loads((tmp_path / 'runs' / 'decode.csv.manifest.json').read_text())
        assert manifest['command'] == 'decode'
        assert manifest['config']['N'] == 2
        assert json.loads(report.read_text())['rows'][0]['N'] == 2


class TestExitCodes:
    def test_unknown_preset(self):
        assert exit_code('capacity', '--ensemble', 'nonsense') == 2

    def test_missing_block_length(self):
        assert exit_code('decode', '--N', '2') == 2

    def test_both_code_sizes(self):
        assert exit_code('decode', '--n', '2', '--N', '2', '--rate', '0.5') == 2

    def test_exact_budget(self):
        assert exit_code('bounds', '--n', '7', '--N', '2') == 3

    def test_dimension_budget(self):
        assert exit_code('typicality', '--n', '13') == 3

    def test_invalid_state(self, tmp_path):
        path = tmp_path / 'bad.json'
        path.write_text(json.dumps({
            'version': 1,
            'dim': 2,
            'probs': [1.0],
            'states': [[[[1.2, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-0.2, 0.0]]]],
        }))
        assert exit_code('capacity', '--ensemble', str(path)) == 4

    def test_console_script(self, capsys):
        assert main(['capacity', '--ensemble', 'nonsense']) == 2
        assert main(['fly']) == 2
        assert main(['decode', '--n', 'two', '--N', '2']) == 2
        assert main(['decode', '--n', '2', '--N', '2', '--exact', '--mc']) == 2
        assert main(['capacity', '--bogus', '1']) == 2
        assert main(['capacity', '--ensemble', 'orthogonal-pair']) == 0
        assert 'chi' in capsys.readouterr().out
