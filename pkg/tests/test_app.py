import json

import pytest
from click.testing import CliRunner

from app import RunConfig, log2_exact, main, run_command
from modules.errors import TransformDomainError
from modules.quantum_money import VerdictTrace
from modules.group_action import ToyGroupAction


@pytest.fixture
def invoke():
    runner = CliRunner()

    def run(*args):
        return runner.invoke(main, list(args))
    return run


def report_of(result):
    return json.loads(result.stdout)


# ==================== transform-check ====================

def test_transform_check_small(invoke):
    result = invoke('--command', 'transform-check', '--n', '3')
    assert result.exit_code == 0
    report = report_of(result)
    assert report['schema_version'] == 1
    assert [row['transform'] for row in report['rows']] == ['QFT', 'QHT_recursive', 'QHT_via_QFT', 'QS_I']
    for row in report['rows']:
        assert row['max_error'] <= 1e-9
        assert row['ancilla_residual'] <= 1e-9


def test_transform_check_single_qubit(invoke):
    result = invoke('--command', 'transform-check', '--N', '2')
    assert result.exit_code == 0
    assert 'QS_I' not in [row['transform'] for row in report_of(result)['rows']]


def test_transform_check_csv(invoke):
    result = invoke('--command', 'transform-check', '--n', '2', '--format', 'csv')
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert lines[0] == 'transform,n,max_error,ancilla_residual,tally'
    assert len(lines) == 5


def test_malformed_size_is_precondition_failure(invoke):
    result = invoke('--command', 'transform-check', '--N', '12')
    assert result.exit_code == 3
    assert result.stdout == ''


def test_oversized_transform_is_budget_failure(invoke):
    result = invoke('--command', 'transform-check', '--n', '11')
    assert result.exit_code == 4


# ==================== gate-bench ====================

def test_gate_bench_models(invoke):
    result = invoke('--command', 'gate-bench', '--n', '10')
    assert result.exit_code == 0
    report = report_of(result)
    last = report['rows'][-1]
    assert last['n'] == 10
    assert last['model_recursive'] == 200
    assert last['model_qft_based'] == 250
    assert last['tally_recursive'] == 235
    assert last['tally_qft_based'] == 303
    assert 0.75 <= last['ratio'] <= 0.85
    assert report['model_ratio'] == pytest.approx(1.25)
    assert 1.8 <= report['fit_recursive'][0] <= 2.2


def test_gate_bench_csv_header(invoke):
    result = invoke('--command', 'gate-bench', '--n', '6', '--n-min', '2', '--format', 'csv')
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert lines[0] == 'n,tally_recursive,tally_qft_based,model_recursive,model_qft_based,ratio'
    assert len(lines) == 6


def test_gate_bench_bad_range(invoke):
    result = invoke('--command', 'gate-bench', '--n', '3', '--n-min', '5')
    assert result.exit_code == 3


def test_gate_bench_output_file_is_reproducible(invoke, tmp_path):
    first = tmp_path / 'first.json'
    second = tmp_path / 'second.json'
    assert invoke('--command', 'gate-bench', '--n', '8', '--out', str(first)).exit_code == 0
    assert invoke('--command', 'gate-bench', '--n', '8', '--out', str(second)).exit_code == 0
    assert first.read_bytes() == second.read_bytes()
    assert json.loads(first.read_text())['command'] == 'gate-bench'


# ==================== money-demo ====================

def test_money_demo_verdicts(invoke):
    result = invoke('--command', 'money-demo', '--N', '16', '--seed', '3')
    assert result.exit_code == 0
    report = report_of(result)
    verdicts = report['verdicts']
    assert verdicts['genuine']['accepted']
    assert not verdicts['tampered']['accepted']
    assert not verdicts['twisted']['accepted']
    assert report['fourier']['verdict']['accepted']
    assert report['serial'] % 2 == 1
    assert report['twist_error'] <= 1e-10


def test_money_demo_verdict_round_trip(invoke):
    report = report_of(invoke('--command', 'money-demo', '--N', '16', '--seed', '1'))
    ga = ToyGroupAction.from_seed(16, 1)
    genuine = report['verdicts']['genuine']
    assert VerdictTrace.from_json(json.dumps(genuine), ga).to_dict() == genuine


def test_money_demo_too_small(invoke):
    assert invoke('--command', 'money-demo', '--N', '4').exit_code == 3


def test_money_demo_has_no_csv(invoke):
    result = invoke('--command', 'money-demo', '--format', 'csv')
    assert result.exit_code == 2


# ==================== walk-recover ====================

def test_walk_recover_reports_each_step(invoke):
    result = invoke('--command', 'walk-recover', '--N', '16', '--bits', '8', '--runs', '3', '--min-success', '2')
    assert result.exit_code == 0
    report = report_of(result)
    assert report['successes'] >= 2
    for run in report['runs']:
        if 'error' not in run:
            assert run['u_schedule'] == [1, 2, 4, 8]
            assert len(run['theta']) == 4
            assert run['fidelity'] >= 1 - 1e-6


def test_walk_recover_bits_budget(invoke):
    assert invoke('--command', 'walk-recover', '--N', '16', '--bits', '11').exit_code == 4


# ==================== HELPERS ====================

def test_log2_exact():
    assert log2_exact(64) == 6
    with pytest.raises(TransformDomainError):
        log2_exact(48)


def test_run_command_returns_text_and_code():
    text, code = run_command(RunConfig('gate-bench', n=5, n_min=3))
    assert code == 0
    assert text.endswith('\n')
    assert json.loads(text)['n_max'] == 5
